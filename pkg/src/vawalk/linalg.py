"""Small dense linear algebra that works over Fractions and floats alike.

Matrices are numpy arrays; exact ones use ``dtype=object`` holding
``Fraction`` entries, so ``@`` and elementwise arithmetic stay exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np


class SingularSystemError(ArithmeticError):
    pass


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def as_fraction_matrix(rows: Sequence[Sequence]) -> np.ndarray:
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, val in enumerate(row):
            arr[i, j] = Fraction(val)
    return arr


def fraction_identity(n: int) -> np.ndarray:
    return as_fraction_matrix([[int(i == j) for j in range(n)] for i in range(n)])


def fraction_zeros(*shape: int) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(Fraction(0))
    return arr


def _is_zero(x, tol: float) -> bool:
    if isinstance(x, Fraction):
        return x == 0
    return abs(x) <= tol


def row_reduce(a: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and the pivot columns.

    Partial pivoting picks the largest-magnitude candidate; for Fractions that
    is harmless and keeps one code path for both modes.
    """
    r = a.copy()
    nrows, ncols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        best = max(range(row, nrows), key=lambda i: abs(r[i, col]))
        if _is_zero(r[best, col], tol):
            continue
        if best != row:
            r[[row, best]] = r[[best, row]]
        r[row] = r[row] / r[row, col]
        for i in range(nrows):
            if i != row and not _is_zero(r[i, col], 0.0):
                r[i] = r[i] - r[i, col] * r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: np.ndarray, tol: float = 1e-12) -> int:
    return len(row_reduce(a, tol)[1])


def solve_consistent(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Solve ``a @ x = b`` for a full-column-rank, possibly tall, consistent system.

    Raises SingularSystemError when the columns are dependent or the system
    is inconsistent beyond ``tol`` (exactly, for Fractions).
    """
    nrows, ncols = a.shape
    aug = np.empty((nrows, ncols + 1), dtype=a.dtype if is_exact(a) else float)
    aug[:, :ncols] = a
    aug[:, ncols] = b
    red, pivots = row_reduce(aug, tol if not is_exact(a) else 0.0)
    if pivots != list(range(ncols)):
        raise SingularSystemError("system is singular or inconsistent")
    for i in range(ncols, nrows):
        if not _is_zero(red[i, ncols], tol):
            raise SingularSystemError("inconsistent system")
    return red[:ncols, ncols].copy()


def column_space_basis(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Columns of ``a`` at pivot positions; a basis of its column space."""
    _, pivots = row_reduce(a, tol)
    return a[:, pivots]


def gram_schmidt(vectors: Sequence[np.ndarray], form: np.ndarray) -> list[np.ndarray]:
    """Orthogonalize (not normalize) against the symmetric bilinear ``form``.

    Normalization would need square roots; staying unnormalized keeps exact
    inputs exact, and the block-zero checks only need orthogonality.
    """
    out: list[np.ndarray] = []
    for v in vectors:
        w = v.copy()
        for u in out:
            w = w - (u @ form @ w) / (u @ form @ u) * u
        if any(not _is_zero(c, 1e-12) for c in w):
            out.append(w)
    return out
