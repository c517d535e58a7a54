"""Numeric rank and null spaces of small dense matrices."""

from __future__ import annotations

import numpy as np

# relative to the largest entry of the input
PIVOT_RTOL = 1e-9
# below this the whole matrix counts as zero
ZERO_ATOL = 1e-12


def row_echelon(matrix, rtol: float = PIVOT_RTOL):
    """Partial-pivot Gaussian elimination.

    Returns ``(reduced, pivot_columns)`` where ``reduced`` is in reduced row
    echelon form.  A pivot is accepted when its magnitude exceeds
    ``rtol * max|a_ij|`` of the input.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = a.shape
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale <= ZERO_ATOL:
        return np.zeros_like(a), []
    threshold = rtol * scale
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= threshold:
            a[r:, c] = 0.0
            continue
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] /= a[r, c]
        for i in range(rows):
            if i != r and a[i, c] != 0.0:
                a[i] -= a[i, c] * a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def numeric_rank(matrix, rtol: float = PIVOT_RTOL) -> int:
    return len(row_echelon(matrix, rtol)[1])


def null_space(matrix, rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Basis of the right null space, one vector per row."""
    a = np.atleast_2d(np.array(matrix, dtype=float))
    cols = a.shape[1]
    reduced, pivots = row_echelon(a, rtol)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols)
        v[f] = 1.0
        for r, pc in enumerate(pivots):
            v[pc] = -reduced[r, f]
        basis.append(v)
    return np.array(basis).reshape(len(basis), cols)
