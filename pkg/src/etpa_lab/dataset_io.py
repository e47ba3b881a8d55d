"""Dataset CSV reading and writing.

One row per acquisition bin::

    sample_label,concentration_molar,pump_power_mW,bin_index,duration_s,singles1,singles2,coincidences

UTF-8, LF line endings, ``.`` decimal separator. Floats are written with
``repr`` so a load/save cycle reproduces the file byte for byte.
"""
from __future__ import annotations

import csv
import math
import os
from collections import OrderedDict
from pathlib import Path

import numpy as np

from .source import Dataset, MeasurementSeries

__all__ = ["COLUMNS", "DatasetError", "dump_dataset", "load_dataset", "save_dataset"]

COLUMNS = (
    "sample_label",
    "concentration_molar",
    "pump_power_mW",
    "bin_index",
    "duration_s",
    "singles1",
    "singles2",
    "coincidences",
)


class DatasetError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.column = column


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_dataset(dataset: Dataset) -> str:
    lines = [",".join(COLUMNS)]
    for s in dataset.series:
        head = f"{s.label},{_fmt(s.concentration)},{_fmt(s.pump_power_mw)}"
        dur = _fmt(s.bin_duration_s)
        for i, (s1, s2, c) in enumerate(s.counts):
            lines.append(f"{head},{i},{dur},{s1},{s2},{c}")
    return "\n".join(lines) + "\n"


def save_dataset(dataset: Dataset, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_dataset(dataset).encode("utf-8"))
    return path


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DatasetError(f"not a number: {text!r}", line, column) from None
    if not math.isfinite(v) or v < 0:
        raise DatasetError(f"must be finite and non-negative: {text!r}", line, column)
    return v


def _parse_count(text: str, line: int, column: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise DatasetError(f"not an integer: {text!r}", line, column) from None
    if v < 0:
        raise DatasetError(f"negative count {v}", line, column)
    return v


def load_dataset(path: str | os.PathLike) -> Dataset:
    """Parse a dataset CSV; errors name the offending line and column."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("file is empty", 1) from None
        if tuple(header) != COLUMNS:
            raise DatasetError(f"header must be {','.join(COLUMNS)!r}, got {','.join(header)!r}", 1)

        groups: OrderedDict[tuple[str, float], dict] = OrderedDict()
        conc_of: dict[str, float] = {}
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            if len(row) != len(COLUMNS):
                raise DatasetError(f"expected {len(COLUMNS)} fields, got {len(row)}", lineno)
            label = row[0]
            if not label or any(ch in label for ch in ',"\r\n'):
                raise DatasetError(f"invalid sample label {label!r}", lineno, "sample_label")
            conc = _parse_float(row[1], lineno, "concentration_molar")
            power = _parse_float(row[2], lineno, "pump_power_mW")
            idx = _parse_count(row[3], lineno, "bin_index")
            dur = _parse_float(row[4], lineno, "duration_s")
            if dur == 0:
                raise DatasetError("bin duration must be positive", lineno, "duration_s")
            s1, s2, c = (_parse_count(row[k], lineno, COLUMNS[k]) for k in (5, 6, 7))
            if c > min(s1, s2):
                raise DatasetError(f"coincidences {c} exceed singles ({s1}, {s2})", lineno, "coincidences")
            if conc_of.setdefault(label, conc) != conc:
                raise DatasetError(f"concentration of {label!r} changes from {conc_of[label]!r}", lineno,
                                   "concentration_molar")
            g = groups.setdefault((label, power), {"duration": dur, "bins": {}})
            if g["duration"] != dur:
                raise DatasetError("bin duration differs within one series", lineno, "duration_s")
            if idx in g["bins"]:
                raise DatasetError(f"duplicate bin_index {idx} for {label!r} at {power} mW", lineno, "bin_index")
            g["bins"][idx] = (s1, s2, c)

    if not groups:
        raise DatasetError("dataset has a header but no data rows")
    series = []
    for (label, power), g in groups.items():
        bins = g["bins"]
        if sorted(bins) != list(range(len(bins))):
            raise DatasetError(f"bin_index values for {label!r} at {power} mW are not 0..{len(bins) - 1}",
                               column="bin_index")
        counts = np.array([bins[i] for i in range(len(bins))], dtype=np.int64)
        series.append(MeasurementSeries(label, conc_of[label], power, g["duration"], counts))
    return Dataset(series)
