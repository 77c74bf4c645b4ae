"""Matrix file formats.

* MatrixMarket coordinate (1-based, ``real general``) for sparse matrices.
* Dense text: first line ``rows cols``, then the entries in row-major order.
* Dense binary: little-endian ``uint64`` rows and cols, then row-major
  little-endian ``float64`` entries.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.io
import scipy.sparse as sp

from .linalg import as_csr, as_dense

_HEADER = np.dtype("<u8")
_VALUES = np.dtype("<f8")


def read_matrix_market(path) -> sp.csr_matrix:
    M = scipy.io.mmread(os.fspath(path))
    return as_csr(M, os.fspath(path))


def write_matrix_market(path, S) -> None:
    S = as_csr(S)
    scipy.io.mmwrite(os.fspath(path), S.tocoo(), field="real", symmetry="general")


def read_dense_text(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows cols'")
        rows, cols = int(header[0]), int(header[1])
        values = np.array(fh.read().split(), dtype=np.float64)
    if values.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {values.size}")
    return as_dense(values.reshape(rows, cols), os.fspath(path))


def write_dense_text(path, A) -> None:
    A = as_dense(A)
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_dense_binary(path) -> np.ndarray:
    raw = open(path, "rb").read()
    if len(raw) < 16:
        raise ValueError(f"{path}: truncated header")
    rows, cols = (int(v) for v in np.frombuffer(raw[:16], dtype=_HEADER))
    values = np.frombuffer(raw[16:], dtype=_VALUES)
    if values.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {values.size}")
    return as_dense(values.reshape(rows, cols).astype(np.float64), os.fspath(path))


def write_dense_binary(path, A) -> None:
    A = as_dense(A)
    with open(path, "wb") as fh:
        fh.write(np.array(A.shape, dtype=_HEADER).tobytes())
        fh.write(np.ascontiguousarray(A, dtype=_VALUES).tobytes())


def load_matrix(path):
    """Load by extension: ``.mtx`` sparse, ``.bin`` dense binary, otherwise dense text."""
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if ext == ".mtx":
        return read_matrix_market(path)
    if ext == ".bin":
        return read_dense_binary(path)
    return read_dense_text(path)
