"""Incremental Gram determinant of a growing vector sequence.

Each appended vector ``v_k`` is reduced to its component ``v'_k`` orthogonal
to the span of the vectors absorbed so far (modified Gram-Schmidt, with one
extra pass when cancellation is detected). The residual distance
``h_k = |v'_k|`` then updates the determinant through

    det Gram(v_0..v_k) = det Gram(v_0..v_{k-1}) * h_k**2

which the state keeps in log form, since the product underflows long before
anything interesting happens.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .hilbert import as_vector

#: Default relative dependence threshold: ``h <= TOL_DEP * |v|`` flags dependence.
TOL_DEP = 1e-10
#: Re-orthogonalize when the first-pass residual drops below this fraction of ``|v|``.
REORTH_FACTOR = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class AppendOutcome:
    residual: float
    log_det_after: float
    dependent_now: bool


class GramState:
    """Orthonormal basis, residual distances and log Gram determinant.

    ``count`` vectors have been absorbed; ``basis`` holds the normalized
    residuals of those that were not flagged dependent. ``log_det`` is
    ``-inf`` once any residual fell at or below ``tol_dep * |v|`` and stays
    there.
    """

    def __init__(self, d: int, tol_dep: float = TOL_DEP):
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ConfigError(f"truncation dimension must be >= 1, got {d!r}")
        if not tol_dep >= 0.0:
            raise ConfigError(f"tol_dep must be >= 0, got {tol_dep!r}")
        self.d = int(d)
        self.tol_dep = float(tol_dep)
        self._basis = np.zeros((self.d, self.d))
        self._rank = 0
        self.residuals: list[float] = []
        self.log_det = 0.0
        self.count = 0
        self.dependent = False

    @property
    def basis(self) -> np.ndarray:
        return self._basis[:self._rank]

    @property
    def rank(self) -> int:
        return self._rank

    def _project_out(self, r: np.ndarray) -> None:
        # modified Gram-Schmidt: project against the updated residual each time
        for w in self._basis[:self._rank]:
            r -= np.dot(w, r) * w

    def _residual(self, v: np.ndarray) -> tuple[np.ndarray, float, float]:
        norm_v = math.sqrt(np.dot(v, v))
        r = v.copy()
        if self._rank == 0:
            return r, norm_v, norm_v
        self._project_out(r)
        h = math.sqrt(np.dot(r, r))
        if h < REORTH_FACTOR * norm_v:
            self._project_out(r)
            h = math.sqrt(np.dot(r, r))
        return r, h, norm_v

    def append(self, v) -> AppendOutcome:
        v = as_vector(v, self.d)
        r, h, norm_v = self._residual(v)
        dependent_now = h <= self.tol_dep * norm_v or self._rank == self.d
        self.residuals.append(h)
        self.count += 1
        if dependent_now:
            self.dependent = True
            self.log_det = -math.inf
        else:
            self._basis[self._rank] = r / h
            self._rank += 1
            if not self.dependent:
                self.log_det += 2.0 * math.log(h)
        return AppendOutcome(h, self.log_det, dependent_now)

    def distance_to_span(self, v) -> float:
        """Distance from ``v`` to the span of the absorbed vectors; the state is not modified."""
        v = as_vector(v, self.d)
        return self._residual(v)[1]

    def det(self) -> float:
        if self.log_det == -math.inf:
            return 0.0
        return math.exp(self.log_det)

    def __repr__(self):
        return (f"GramState(d={self.d}, count={self.count}, rank={self._rank}, "
                f"log_det={self.log_det!r}, dependent={self.dependent})")


def engine_new(d: int, tol_dep: float = TOL_DEP) -> GramState:
    return GramState(d, tol_dep)


def append(state: GramState, v) -> AppendOutcome:
    return state.append(v)


def distance_to_span(state: GramState, v) -> float:
    return state.distance_to_span(v)


def det_from_state(state: GramState) -> float:
    return state.det()
