"""
Matrix / vector CSV files and JSON manifests.

Matrices are plain rows of comma-separated floats written with 17
significant digits so a write/read cycle is bit-exact. Manifests are
sorted-key JSON without timestamps, so reruns produce identical bytes.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Tuple, Union

import numpy as np

from ..errors import DataIOError, ParseError

PathLike = Union[str, Path]


def utf8_lines(path: Path) -> Iterator[str]:
    """Decoded lines of path; undecodable bytes raise ParseError with their line number."""
    with open(path, "rb") as f:
        for line, raw in enumerate(f, 1):
            try:
                yield raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise ParseError(f"Line {line}: invalid UTF-8 at byte {e.start} ({e.reason})",
                                 line, path=str(path))


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_matrix_csv(matrix, path: PathLike):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", encoding="utf-8") as f:
        for row in matrix:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def read_matrix_csv(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"Matrix file not found: {path}", path=str(path))
    rows = []
    for line, text in enumerate(utf8_lines(path), 1):
        if not text.strip():
            continue
        try:
            rows.append([float(cell) for cell in text.strip().split(",")])
        except ValueError:
            raise ParseError(f"Line {line}: non-numeric entry in {path.name}", line,
                             path=str(path))
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(f"Line {line}: expected {len(rows[0])} columns, got {len(rows[-1])}",
                             line, path=str(path))
    if not rows:
        raise DataIOError(f"Matrix file is empty: {path}", path=str(path))
    return np.array(rows, dtype=float)


def write_vector_csv(vector, path: PathLike):
    vector = np.asarray(vector, dtype=float).ravel()
    with open(path, "w", encoding="utf-8") as f:
        for v in vector:
            f.write(_fmt(v) + "\n")


def read_vector_csv(path: PathLike) -> np.ndarray:
    return read_matrix_csv(path).ravel()


def write_loss_trace(trace: Iterable[Tuple[int, float]], path: PathLike):
    with open(path, "w", encoding="utf-8") as f:
        f.write("iteration,loss\n")
        for iteration, value in trace:
            f.write(f"{int(iteration)},{_fmt(value)}\n")


def write_manifest(data: Dict[str, Any], path: PathLike):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def read_manifest(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"Manifest not found: {path}", path=str(path))
    try:
        return json.loads("".join(utf8_lines(path)))
    except json.JSONDecodeError as e:
        raise ParseError(f"Line {e.lineno}: invalid JSON in {path.name} ({e.msg})", e.lineno,
                         path=str(path))
