"""Dense matrix file I/O.

Two on-disk formats:

* CSV: row-major, one matrix row per line, decimal floats.
* Binary: 8-byte magic ``RRIEMAT1``, then u64 rows, u64 cols, then
  rows*cols IEEE-754 f64 values, little-endian, row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

MAGIC = b"RRIEMAT1"
_HEADER = struct.Struct("<QQ")

PathLike = Union[str, Path]


def write_matrix_csv(path: PathLike, a: np.ndarray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    np.savetxt(path, a, delimiter=",", fmt="%.17g")


def read_matrix_csv(path: PathLike) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


def write_matrix_binary(path: PathLike, a: np.ndarray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(rows, cols))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_matrix_binary(path: PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        rows, cols = _HEADER.unpack(fh.read(_HEADER.size))
        data = fh.read(rows * cols * 8)
    if len(data) != rows * cols * 8:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(data, dtype="<f8").astype(float).reshape(rows, cols)


def write_matrix(path: PathLike, a: np.ndarray) -> None:
    """Write CSV if the suffix is .csv, binary otherwise."""
    if str(path).endswith(".csv"):
        write_matrix_csv(path, a)
    else:
        write_matrix_binary(path, a)


def read_matrix(path: PathLike) -> np.ndarray:
    """Read either format, sniffing the binary magic first."""
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return read_matrix_binary(path)
    return read_matrix_csv(path)
