"""Dataset files: delimited text and raw little-endian binary."""

import csv
from enum import Enum
from pathlib import Path

import numpy as np
import structlog

from src.core.exceptions import DatasetFormatError
from src.core.models import Dataset

logger = structlog.get_logger()

# Binary layout: header (n, d) then n*d features, row-major; labels in a sibling file
HEADER_DTYPE = np.dtype("<u8")
FEATURE_DTYPE = np.dtype("<f8")
LABEL_DTYPE = np.dtype("<i8")
LABELS_SUFFIX = ".labels"


class DatasetFormat(str, Enum):
    CSV = "csv"
    BINARY = "binary"


def labels_path(path: str | Path) -> Path:
    """Sibling file holding the labels of a binary dataset."""
    path = Path(path)
    return path.with_name(path.name + LABELS_SUFFIX)


def _parse_csv(path: Path, label_column: int | None) -> tuple[np.ndarray, np.ndarray | None]:
    rows: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None

    with open(path, newline="", encoding="utf-8") as f:
        for line_no, record in enumerate(csv.reader(f), start=1):
            if not record or all(not field.strip() for field in record):
                continue
            if width is None:
                width = len(record)
                if label_column is not None and not -width <= label_column < width:
                    raise DatasetFormatError(
                        str(path), f"label column {label_column} out of range", line=line_no
                    )
            elif len(record) != width:
                raise DatasetFormatError(
                    str(path), f"expected {width} fields, got {len(record)}", line=line_no
                )

            values = list(record)
            if label_column is not None:
                raw_label = values.pop(label_column % width).strip()
                try:
                    label = float(raw_label)
                except ValueError as e:
                    raise DatasetFormatError(
                        str(path), f"non-numeric label {raw_label!r}", line=line_no
                    ) from e
                if not label.is_integer():
                    raise DatasetFormatError(
                        str(path), f"label {raw_label!r} is not an integer", line=line_no
                    )
                labels.append(int(label))

            try:
                rows.append([float(v) for v in values])
            except ValueError as e:
                raise DatasetFormatError(str(path), f"non-numeric feature ({e})", line=line_no) from e

    if not rows:
        raise DatasetFormatError(str(path), "no samples")
    features = np.asarray(rows, dtype=np.float64)
    return features, (np.asarray(labels, dtype=np.int64) if label_column is not None else None)


def _read_binary(path: Path) -> tuple[np.ndarray, np.ndarray | None]:
    raw = path.read_bytes()
    header_bytes = 2 * HEADER_DTYPE.itemsize
    if len(raw) < header_bytes:
        raise DatasetFormatError(str(path), "truncated header")
    n, d = (int(v) for v in np.frombuffer(raw, dtype=HEADER_DTYPE, count=2))

    expected = header_bytes + n * d * FEATURE_DTYPE.itemsize
    if len(raw) != expected:
        raise DatasetFormatError(
            str(path), f"header says {n}x{d} ({expected} bytes) but file has {len(raw)} bytes"
        )
    features = np.frombuffer(raw, dtype=FEATURE_DTYPE, offset=header_bytes).reshape(n, d)

    labels = None
    sibling = labels_path(path)
    if sibling.exists():
        label_bytes = sibling.read_bytes()
        if len(label_bytes) != n * LABEL_DTYPE.itemsize:
            raise DatasetFormatError(str(sibling), f"expected {n} labels")
        labels = np.frombuffer(label_bytes, dtype=LABEL_DTYPE).astype(np.int64)
    return features.astype(np.float64), labels


def load_dataset(
    path: str | Path,
    fmt: DatasetFormat = DatasetFormat.CSV,
    label_column: int | None = None,
) -> Dataset:
    """Read a dataset; CSV labels come from ``label_column`` (negative counts from the end)."""
    path = Path(path)
    if not path.is_file():
        raise DatasetFormatError(str(path), "no such file")

    if DatasetFormat(fmt) == DatasetFormat.CSV:
        features, labels = _parse_csv(path, label_column)
    else:
        features, labels = _read_binary(path)

    data = Dataset(features=features, labels=labels, name=path.stem)
    logger.info(
        "Loaded dataset",
        path=str(path),
        format=DatasetFormat(fmt).value,
        n=data.n,
        d=data.d,
        labelled=data.labels is not None,
    )
    return data


def save_dataset(data: Dataset, path: str | Path, fmt: DatasetFormat = DatasetFormat.BINARY) -> None:
    """Write a dataset; CSV puts the label (if any) in the last column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if DatasetFormat(fmt) == DatasetFormat.BINARY:
        header = np.asarray([data.n, data.d], dtype=HEADER_DTYPE)
        with open(path, "wb") as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(data.features, dtype=FEATURE_DTYPE).tobytes())
        if data.labels is not None:
            labels_path(path).write_bytes(np.asarray(data.labels, dtype=LABEL_DTYPE).tobytes())
    else:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            for i in range(data.n):
                row = [f"{v:.17g}" for v in data.features[i]]
                if data.labels is not None:
                    row.append(str(int(data.labels[i])))
                writer.writerow(row)

    logger.info("Saved dataset", path=str(path), format=DatasetFormat(fmt).value, n=data.n)
