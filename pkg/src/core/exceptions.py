"""Exception hierarchy for the GPAC library."""


class GpacError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(GpacError, ValueError):
    """Configuration inconsistent with itself or with the dataset."""


class DegenerateInputError(GpacError, ValueError):
    """Input that admits no meaningful result (zero rows, coincident points, ...)."""


class DatasetFormatError(GpacError, ValueError):
    """Malformed dataset file."""

    def __init__(self, path: str, message: str, line: int | None = None) -> None:
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class NumericalError(GpacError, ArithmeticError):
    """Non-finite value produced despite log-domain stabilisation."""
