"""CSV-backed streams"""

import csv
import logging
from collections.abc import Iterator
from pathlib import Path

import numpy as np

from sohot.config import ConfigError
from sohot.streams.base import Sample, Stream, StreamParseError

logger = logging.getLogger(__name__)


def _resolve_label_column(header: list[str], label_column: str | int | None) -> int:
    if label_column is None:
        return len(header) - 1
    if isinstance(label_column, int) or label_column.lstrip("-").isdigit():
        index = int(label_column)
        if not -len(header) <= index < len(header):
            msg = f"label column index {index} out of range for {len(header)} columns"
            raise ConfigError(msg, key="label_column")
        return index % len(header)
    if label_column not in header:
        msg = f"label column '{label_column}' not found in header {header}"
        raise ConfigError(msg, key="label_column")
    return header.index(label_column)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(
    path: str | Path, label_column: str | int | None = None
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a CSV file into a feature matrix and contiguous labels

    Column kinds are taken from the first data row: numeric columns are
    parsed as floats, all others are integer-encoded by order of first
    appearance. Labels are encoded the same way.

    Returns:
        (features, labels, feature_names)

    Raises:
        StreamParseError: If a numeric cell cannot be parsed, a row has the
            wrong number of cells, or the file has no data rows
        ConfigError: If the label column does not exist
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            msg = "empty file, a header row is required"
            raise StreamParseError(msg, str(path)) from None
        label_index = _resolve_label_column(header, label_column)
        feature_indices = [i for i in range(len(header)) if i != label_index]

        numeric: list[bool] | None = None
        codes: dict[int, dict[str, int]] = {}
        label_codes: dict[str, int] = {}
        rows: list[list[float]] = []
        labels: list[int] = []

        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                msg = f"expected {len(header)} cells, got {len(row)}"
                raise StreamParseError(msg, str(path), line_number)
            cells = [cell.strip() for cell in row]
            if numeric is None:
                numeric = [_is_number(cells[i]) for i in feature_indices]

            values: list[float] = []
            for kind_numeric, i in zip(numeric, feature_indices, strict=True):
                cell = cells[i]
                if kind_numeric:
                    try:
                        values.append(float(cell))
                    except ValueError:
                        msg = f"cannot parse '{cell}' in column '{header[i]}' as a number"
                        raise StreamParseError(msg, str(path), line_number) from None
                else:
                    column = codes.setdefault(i, {})
                    values.append(float(column.setdefault(cell, len(column))))
            rows.append(values)
            labels.append(label_codes.setdefault(cells[label_index], len(label_codes)))

    if not rows:
        msg = "no data rows"
        raise StreamParseError(msg, str(path))
    names = [header[i] for i in feature_indices]
    logger.info(
        "Loaded %d rows, %d features, %d classes from %s",
        len(rows),
        len(names),
        len(label_codes),
        path,
    )
    return np.asarray(rows, dtype=float), np.asarray(labels, dtype=np.int64), names


def csv_stream(
    path: str | Path,
    label_column: str | int | None = None,
    shuffle_seed: int | None = None,
) -> Stream:
    """Stream the rows of a CSV file, shuffled when a seed is given"""
    features, labels, _names = load_csv(path, label_column)
    order = np.arange(labels.shape[0])
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(order)
    n_classes = int(labels.max()) + 1

    def generate() -> Iterator[Sample]:
        for i in order:
            yield Sample(features[i].copy(), int(labels[i]))

    return Stream(
        generate(),
        n_features=features.shape[1],
        n_classes=n_classes,
        name=Path(path).name,
    )
