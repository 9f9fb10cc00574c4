"""Run output files: labels, probabilities, traces and reports."""

from collections.abc import Iterable
from pathlib import Path

import numpy as np
import structlog
from pydantic import BaseModel

from src.core.models import TraceRecord

logger = structlog.get_logger()

LABELS_FILE = "labels.txt"
PROBS_FILE = "probs.csv"
TRACE_FILE = "trace.ldj"
REPORT_FILE = "report.json"


def write_labels(path: str | Path, labels: np.ndarray) -> None:
    """One integer label per line."""
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(f"{int(label)}\n" for label in labels)


def read_labels(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int64, ndmin=1)


def write_probs(path: str | Path, probs: np.ndarray) -> None:
    """Comma-separated rows at 17 significant digits."""
    np.savetxt(path, probs, fmt="%.17g", delimiter=",")


def read_probs(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.float64, delimiter=",", ndmin=2)


def write_trace(path: str | Path, records: Iterable[TraceRecord]) -> None:
    """One JSON object per epoch."""
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(record.model_dump_json() + "\n" for record in records)


def read_trace(path: str | Path) -> list[TraceRecord]:
    with open(path, encoding="utf-8") as f:
        return [TraceRecord.model_validate_json(line) for line in f if line.strip()]


def write_report(path: str | Path, report: BaseModel) -> None:
    Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote report", path=str(path))
