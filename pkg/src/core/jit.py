"""Selection between compiled and interpreted numba kernels."""

from typing import Any

from src.core.config import settings


def compiled(kernel: Any) -> Any:
    """Return the JIT dispatcher, or its pure-Python body when JIT is disabled."""
    if settings.use_jit:
        return kernel
    return kernel.py_func
