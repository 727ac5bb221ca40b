"""CSV and JSON readers/writers for point sets, labeled data, shapes and traces."""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .geometry import LabeledDataset, PointSet, PolytopeShape

_DIM_RE = re.compile(r"#\s*d\s*=\s*(\d+)")


def _read_rows(path) -> tuple[np.ndarray, int | None]:
    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"no such file: {path}")
    declared = None
    rows = []
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                m = _DIM_RE.match(text)
                if m and declared is None:
                    declared = int(m.group(1))
                continue
            try:
                rows.append([float(v) for v in next(csv.reader([text]))])
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InvalidInputError(f"{path}: rows have differing lengths {sorted(widths)}")
    return np.array(rows, dtype=np.float64), declared


def read_points(path) -> PointSet:
    data, declared = _read_rows(path)
    if declared is not None and declared != data.shape[1]:
        raise InvalidInputError(f"{path}: header says d={declared}, rows have {data.shape[1]}")
    return PointSet(data)


def write_points(path, ps: PointSet) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# d={ps.d}\n")
        np.savetxt(fh, ps.points, delimiter=",", fmt="%.17g")


def read_labeled(path) -> LabeledDataset:
    data, declared = _read_rows(path)
    if data.shape[1] < 2:
        raise InvalidInputError(f"{path}: need coordinates plus a label column")
    if declared is not None and declared != data.shape[1] - 1:
        raise InvalidInputError(f"{path}: header says d={declared}, rows have {data.shape[1] - 1}")
    return LabeledDataset(data[:, :-1], data[:, -1])


def write_labeled(path, ds: LabeledDataset) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# d={ds.points.shape[1]}\n")
        np.savetxt(fh, np.column_stack([ds.points, ds.labels]), delimiter=",", fmt="%.17g")


def read_shape(path) -> PolytopeShape:
    """One face per line: d normal coordinates followed by the offset t."""
    data, _ = _read_rows(path)
    if data.shape[1] < 2:
        raise InvalidInputError(f"{path}: need normal coordinates plus an offset")
    return PolytopeShape(data[:, :-1], data[:, -1])


def write_shape(path, shape: PolytopeShape) -> None:
    with open(path, "w", newline="") as fh:
        np.savetxt(fh, np.column_stack([shape.normals, shape.offsets]), delimiter=",", fmt="%.17g")


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


TRACE_COLUMNS = ("k", "J", "D", "gap", "mu", "cert_gap")


def write_trace(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in rows:
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
