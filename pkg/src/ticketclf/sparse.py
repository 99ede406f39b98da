"""Row-major sparse matrices in canonical CSR form, plus triplet file I/O.

Canonical means: column indices strictly increasing within each row, no
explicitly stored zeros, finite values.  The on-disk triplet format is a
UTF-8 text file::

    # ticketclf-triplets v1 <n_rows> <n_cols>
    <row>\t<col>\t<value>
    ...

sorted by (row, col), values written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

TRIPLET_MAGIC = "# ticketclf-triplets v1"


def canonical(X) -> sp.csr_matrix:
    X = sp.csr_matrix(X, dtype=np.float64, copy=True)
    X.sum_duplicates()
    X.eliminate_zeros()
    X.sort_indices()
    if not np.all(np.isfinite(X.data)):
        raise ValueError("sparse matrix contains non-finite values")
    return X


def is_canonical(X) -> bool:
    if not sp.isspmatrix_csr(X):
        return False
    if np.any(X.data == 0) or not np.all(np.isfinite(X.data)):
        return False
    for i in range(X.shape[0]):
        cols = X.indices[X.indptr[i]:X.indptr[i + 1]]
        if np.any(np.diff(cols) <= 0):
            return False
    return True


def row_pairs(X, i: int) -> list[tuple[int, float]]:
    """Sorted ``(column, value)`` pairs of row ``i``."""
    lo, hi = X.indptr[i], X.indptr[i + 1]
    return [(int(c), float(v)) for c, v in zip(X.indices[lo:hi], X.data[lo:hi])]


def save_triplets(X, path) -> None:
    X = canonical(X)
    coo = X.tocoo()
    lines = [f"{TRIPLET_MAGIC} {X.shape[0]} {X.shape[1]}"]
    lines += [f"{r}\t{c}\t{v!r}" for r, c, v in zip(coo.row, coo.col, coo.data.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_triplets(path) -> sp.csr_matrix:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith(TRIPLET_MAGIC):
        raise ValueError(f"{path}: not a triplet matrix file")
    n_rows, n_cols = (int(v) for v in text[0][len(TRIPLET_MAGIC):].split())
    rows, cols, vals = [], [], []
    for line in text[1:]:
        if not line.strip():
            continue
        r, c, v = line.split("\t")
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(v))
    X = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, n_cols), dtype=np.float64)
    return canonical(X)
