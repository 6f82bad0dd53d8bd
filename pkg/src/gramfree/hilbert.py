"""Finite truncations of a real Hilbert space.

A vector of H is represented by its first ``d`` coordinates as a 1-D float64
array. Everything here is a pure function of its inputs.

The Gram determinant computed by :func:`gram_det_direct` is deliberately
independent of the incremental engine in :mod:`gramfree.engine`: it uses
compensated inner products and a pivoted Cholesky factorization of the full
Gram matrix, so it can serve as the oracle the engine is checked against.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DimensionError, EmptyInputError

#: Relative pivot tolerance below which the Gram matrix is declared singular.
TOL_PIVOT = 1e-12


def as_vector(v, d: int | None = None) -> np.ndarray:
    """Validate ``v`` as a truncated vector and return it as a float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise DimensionError(f"expected dimension {d}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite coordinates")
    return arr


def as_family(vs: Sequence) -> np.ndarray:
    """Stack a nonempty family of equal-length vectors into a (n, d) array."""
    if len(vs) == 0:
        raise EmptyInputError("empty vector family")
    rows = [as_vector(v) for v in vs]
    d = rows[0].shape[0]
    for i, r in enumerate(rows):
        if r.shape[0] != d:
            raise DimensionError(
                f"vector {i} has dimension {r.shape[0]}, expected {d}")
    return np.vstack(rows)


def inner(u, v) -> float:
    """Inner product with compensated summation of the coordinate products."""
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return math.fsum((u * v).tolist())


def norm(v) -> float:
    return math.sqrt(inner(v, v))


def gram_matrix(vs: Sequence) -> np.ndarray:
    """Matrix of pairwise inner products; the lower triangle mirrors the upper."""
    V = as_family(vs)
    n = V.shape[0]
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = math.fsum((V[i] * V[j]).tolist())
    return G


def pivoted_cholesky(G: np.ndarray, tol: float = TOL_PIVOT):
    """Diagonally pivoted Cholesky factorization of a PSD matrix.

    Returns ``(pivots, order)`` where ``pivots`` are the squared diagonal
    entries of the factor taken in pivot ``order``. Factorization stops as soon
    as the largest remaining diagonal falls to ``tol * max(diag(G))`` or below;
    in that case fewer than ``n`` pivots are returned, certifying numerical
    rank deficiency.
    """
    A = np.array(G, dtype=np.float64, copy=True)
    n = A.shape[0]
    scale = float(np.max(np.diag(A))) if n else 0.0
    cutoff = tol * scale
    order = list(range(n))
    pivots: list[float] = []
    for j in range(n):
        rest = np.diag(A)[j:]
        p = j + int(np.argmax(rest))
        if A[p, p] <= cutoff or scale <= 0.0:
            break
        if p != j:
            A[[j, p], :] = A[[p, j], :]
            A[:, [j, p]] = A[:, [p, j]]
            order[j], order[p] = order[p], order[j]
        piv = A[j, j]
        pivots.append(float(piv))
        col = A[j + 1:, j] / math.sqrt(piv)
        A[j + 1:, j + 1:] -= np.outer(col, col)
        A[j + 1:, j] = col
    return pivots, order


def gram_logdet_direct(vs: Sequence) -> float:
    """Log of the Gram determinant, ``-inf`` when the family is numerically dependent."""
    G = gram_matrix(vs)
    pivots, _ = pivoted_cholesky(G)
    if len(pivots) < G.shape[0]:
        return -math.inf
    return math.fsum(math.log(p) for p in pivots)


def gram_det_direct(vs: Sequence) -> float:
    """Gram determinant of ``vs`` from a pivoted factorization of the full Gram matrix.

    Clamped to exactly 0 when a pivot falls below ``TOL_PIVOT`` times the
    largest diagonal entry.
    """
    G = gram_matrix(vs)
    pivots, _ = pivoted_cholesky(G)
    if len(pivots) < G.shape[0]:
        return 0.0
    return math.prod(pivots)
