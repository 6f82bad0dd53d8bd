"""Probability measures on truncated H.

The reference measure is a nondegenerate diagonal Gaussian (``BaseGaussian``):
it gives zero mass to every proper subspace. ``DegenerateSubspace`` lives on a
finite-dimensional subspace and so breaks that property on purpose; it is
used as the contrast case in the experiments.

Randomness is counter based: the vector drawn for ``SeedPath(s, t, j)`` comes
from a Philox stream keyed by ``(s, t)`` whose counter starts at ``j << 192``.
Nothing depends on the order in which draws are made.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, DimensionError, NotAbsolutelyContinuousError
from .hilbert import as_family, as_vector, gram_det_direct

_U64 = 1 << 64
RESERVED_KINDS = ("uniform_ball", "student_t")


def geometric_spectrum(d: int, ratio: float = 0.5) -> np.ndarray:
    """Variances ``ratio**i`` for ``i = 0..d-1``."""
    return ratio ** np.arange(d, dtype=np.float64)


@dataclass(eq=False)
class CovarianceSpec:
    lambdas: np.ndarray
    mean: np.ndarray | None = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        if lam.ndim != 1 or lam.size == 0:
            raise ConfigError("lambdas must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise ConfigError("all variances must be finite and strictly positive")
        self.lambdas = lam
        if self.mean is None:
            self.mean = np.zeros_like(lam)
        else:
            try:
                self.mean = as_vector(self.mean, lam.size)
            except (DimensionError, ValueError) as exc:
                raise ConfigError(f"bad mean: {exc}") from None

    @property
    def d(self) -> int:
        return self.lambdas.size

    @property
    def trace(self) -> float:
        return math.fsum(self.lambdas.tolist())

    @classmethod
    def geometric(cls, d: int, ratio: float = 0.5) -> "CovarianceSpec":
        return cls(geometric_spectrum(d, ratio))


@dataclass(eq=False)
class BaseGaussian:
    cov: CovarianceSpec

    @property
    def d(self) -> int:
        return self.cov.d


@dataclass(eq=False)
class DegenerateSubspace:
    """Gaussian combinations of a fixed linearly independent ``(m, d)`` basis."""
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.float64)
        if B.ndim != 2:
            raise ConfigError("basis must be an (m, d) array; use shape (0, d) for {0}")
        if not np.all(np.isfinite(B)):
            raise ConfigError("basis has non-finite entries")
        if B.shape[0] > 0 and not gram_det_direct(list(B)) > 0.0:
            raise ConfigError("basis vectors are linearly dependent")
        self.basis = B

    @property
    def d(self) -> int:
        return self.basis.shape[1]


@dataclass(eq=False)
class AffineShift:
    point: np.ndarray
    inner: "SamplerSpec"

    def __post_init__(self):
        self.point = as_vector(self.point)
        if self.point.size != self.inner.d:
            raise ConfigError(
                f"shift has dimension {self.point.size}, inner sampler {self.inner.d}")

    @property
    def d(self) -> int:
        return self.point.size


@dataclass(eq=False)
class Mixture:
    weights: np.ndarray
    parts: list

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or w.size != len(self.parts):
            raise ConfigError("mixture needs one positive weight per part")
        if np.any(w <= 0) or abs(math.fsum(w.tolist()) - 1.0) > 1e-12:
            raise ConfigError("mixture weights must be positive and sum to 1")
        if len({p.d for p in self.parts}) != 1:
            raise ConfigError("mixture parts have different dimensions")
        self.weights = w
        self.parts = list(self.parts)

    @property
    def d(self) -> int:
        return self.parts[0].d


@dataclass(eq=False)
class IndependentSequence:
    """Independent draws, the ``j``-th from ``per_index[j]``."""
    per_index: list = field(default_factory=list)

    def __post_init__(self):
        if not self.per_index:
            raise ConfigError("independent sequence needs at least one law")
        if any(isinstance(p, IndependentSequence) for p in self.per_index):
            raise ConfigError("independent sequences cannot be nested")
        if len({p.d for p in self.per_index}) != 1:
            raise ConfigError("sequence laws have different dimensions")
        self.per_index = list(self.per_index)

    @property
    def d(self) -> int:
        return self.per_index[0].d

    def law(self, j: int):
        if j >= len(self.per_index):
            raise ConfigError(
                f"independent sequence has {len(self.per_index)} laws, draw {j} requested")
        return self.per_index[j]


SamplerSpec = Union[BaseGaussian, DegenerateSubspace, AffineShift, Mixture,
                    IndependentSequence]


@dataclass(frozen=True)
class SeedPath:
    master_seed: int
    trial_index: int
    draw_index: int

    def __post_init__(self):
        for name in ("master_seed", "trial_index", "draw_index"):
            value = getattr(self, name)
            if not 0 <= value < _U64:
                raise ConfigError(f"{name} must be an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        bits = np.random.Philox(key=[self.master_seed, self.trial_index],
                                counter=[0, 0, 0, self.draw_index])
        return np.random.Generator(bits)


# -- sampling ---------------------------------------------------------------

def _draw(spec, gen: np.random.Generator) -> np.ndarray:
    if isinstance(spec, BaseGaussian):
        z = gen.standard_normal(spec.d)
        return spec.cov.mean + np.sqrt(spec.cov.lambdas) * z
    if isinstance(spec, DegenerateSubspace):
        c = gen.standard_normal(spec.basis.shape[0])
        return c @ spec.basis if c.size else np.zeros(spec.d)
    if isinstance(spec, AffineShift):
        return spec.point + _draw(spec.inner, gen)
    if isinstance(spec, Mixture):
        u = gen.random()
        j = int(np.searchsorted(np.cumsum(spec.weights), u, side="right"))
        return _draw(spec.parts[min(j, len(spec.parts) - 1)], gen)
    raise ConfigError(f"cannot sample from {type(spec).__name__}")


def law_at(spec, draw_index: int):
    """The law of draw ``draw_index``; a plain spec is used for every index."""
    if isinstance(spec, IndependentSequence):
        return spec.law(draw_index)
    return spec


def sample(spec, seed: SeedPath) -> np.ndarray:
    """Draw one vector; a pure function of ``(spec, seed)``."""
    return _draw(law_at(spec, seed.draw_index), seed.generator())


# -- densities --------------------------------------------------------------

def _push_shift(spec, point: np.ndarray):
    # fold affine shifts into Gaussian means so only Gaussians/mixtures remain
    if isinstance(spec, BaseGaussian):
        return BaseGaussian(CovarianceSpec(spec.cov.lambdas, spec.cov.mean + point))
    if isinstance(spec, AffineShift):
        return _push_shift(spec.inner, point + spec.point)
    if isinstance(spec, Mixture):
        return Mixture(spec.weights, [_push_shift(p, point) for p in spec.parts])
    if isinstance(spec, DegenerateSubspace):
        raise NotAbsolutelyContinuousError(
            "law is carried by a finite-dimensional affine subspace, which the base measure does not charge")
    raise ConfigError(f"no density for {type(spec).__name__}")


def _log_ratio(spec, base: CovarianceSpec, x: np.ndarray) -> float:
    if isinstance(spec, BaseGaussian):
        lam, mu = spec.cov.lambdas, spec.cov.mean
        lb, mb = base.lambdas, base.mean
        terms = 0.5 * np.log(lb / lam) - (x - mu) ** 2 / (2 * lam) + (x - mb) ** 2 / (2 * lb)
        return math.fsum(terms.tolist())
    if isinstance(spec, Mixture):
        logs = [math.log(w) + _log_ratio(p, base, x)
                for w, p in zip(spec.weights, spec.parts)]
        return float(logsumexp(logs))
    raise ConfigError(f"no density for {type(spec).__name__}")


def log_density_wrt_base(spec, base: CovarianceSpec, vs: Sequence) -> float:
    """Log Radon-Nikodym derivative of the joint law of ``vs`` against the product base measure.

    For independent draws the joint density is the product of the per-draw
    densities, so the log density is a sum over draws.
    """
    V = as_family(vs)
    if V.shape[1] != base.d:
        raise DimensionError(f"vectors have dimension {V.shape[1]}, base {base.d}")
    total = []
    for j, x in enumerate(V):
        law = _push_shift(law_at(spec, j), np.zeros(base.d))
        if law.d != base.d:
            raise DimensionError(f"law {j} has dimension {law.d}, base {base.d}")
        total.append(_log_ratio(law, base, x))
    return math.fsum(total)


def density_wrt_base(spec, base: CovarianceSpec, vs: Sequence) -> float:
    return math.exp(log_density_wrt_base(spec, base, vs))


def support_dimension(spec) -> int:
    """Dimension of the linear span that samples from ``spec`` can fill.

    Used to predict the index at which dependence becomes certain. An affine
    shift off the subspace adds one dimension to the linear span.
    """
    if isinstance(spec, BaseGaussian):
        return spec.d
    if isinstance(spec, DegenerateSubspace):
        return spec.basis.shape[0]
    if isinstance(spec, AffineShift):
        m = support_dimension(spec.inner)
        if m >= spec.d or not np.any(spec.point):
            return m
        if isinstance(spec.inner, DegenerateSubspace) and m > 0:
            lifted = np.vstack([spec.inner.basis, spec.point])
            return m + (1 if gram_det_direct(list(lifted)) > 0.0 else 0)
        return min(m + 1, spec.d)
    if isinstance(spec, Mixture):
        return max(support_dimension(p) for p in spec.parts)
    if isinstance(spec, IndependentSequence):
        return max(support_dimension(p) for p in spec.per_index)
    raise ConfigError(f"unknown sampler {type(spec).__name__}")


def is_absolutely_continuous(spec) -> bool:
    laws = spec.per_index if isinstance(spec, IndependentSequence) else [spec]
    try:
        for law in laws:
            _push_shift(law, np.zeros(spec.d))
    except NotAbsolutelyContinuousError:
        return False
    return True


# -- serialization ----------------------------------------------------------

def spec_to_dict(spec) -> dict:
    if isinstance(spec, BaseGaussian):
        out = {"kind": "gaussian", "lambdas": spec.cov.lambdas.tolist()}
        if np.any(spec.cov.mean):
            out["mean"] = spec.cov.mean.tolist()
        return out
    if isinstance(spec, DegenerateSubspace):
        return {"kind": "degenerate", "d": spec.d, "basis": spec.basis.tolist()}
    if isinstance(spec, AffineShift):
        return {"kind": "affine_shift", "point": spec.point.tolist(),
                "inner": spec_to_dict(spec.inner)}
    if isinstance(spec, Mixture):
        return {"kind": "mixture", "weights": spec.weights.tolist(),
                "parts": [spec_to_dict(p) for p in spec.parts]}
    if isinstance(spec, IndependentSequence):
        return {"kind": "independent",
                "per_index": [spec_to_dict(p) for p in spec.per_index]}
    raise ConfigError(f"unknown sampler {type(spec).__name__}")


def spec_from_dict(data: dict, d: int | None = None):
    """Build a sampler from its dict form.

    Shorthands: a Gaussian may give ``decay`` (variances ``decay**i``) instead
    of ``lambdas``; a degenerate sampler may give ``m`` (the first ``m``
    coordinate axes) instead of ``basis``. Both need ``d``.
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"sampler entry needs a 'kind': {data!r}")
    kind = data["kind"]
    d = data.get("d", d)
    try:
        if kind == "gaussian":
            if "lambdas" in data:
                lam = np.asarray(data["lambdas"], dtype=np.float64)
            elif d is not None:
                lam = geometric_spectrum(int(d), float(data.get("decay", 0.5)))
            else:
                raise ConfigError("gaussian sampler needs 'lambdas' or a dimension")
            if d is not None and lam.size != d:
                raise ConfigError(f"gaussian has {lam.size} variances, expected d={d}")
            return BaseGaussian(CovarianceSpec(lam, data.get("mean")))
        if kind == "degenerate":
            if "basis" in data:
                B = np.asarray(data["basis"], dtype=np.float64)
                if B.size == 0:
                    if d is None:
                        raise ConfigError("empty degenerate basis needs 'd'")
                    B = np.zeros((0, int(d)))
            elif "m" in data and d is not None:
                m = int(data["m"])
                if not 0 <= m <= int(d):
                    raise ConfigError(f"m must lie in [0, d], got {m}")
                B = np.eye(int(d))[:m]
            else:
                raise ConfigError("degenerate sampler needs 'basis', or 'm' and a dimension")
            if d is not None and B.shape[1] != d:
                raise ConfigError(f"degenerate basis has dimension {B.shape[1]}, expected d={d}")
            return DegenerateSubspace(B)
        if kind == "affine_shift":
            return AffineShift(np.asarray(data["point"], dtype=np.float64),
                               spec_from_dict(data["inner"], d))
        if kind == "mixture":
            return Mixture(data["weights"], [spec_from_dict(p, d) for p in data["parts"]])
        if kind == "independent":
            return IndependentSequence([spec_from_dict(p, d) for p in data["per_index"]])
    except KeyError as exc:
        raise ConfigError(f"{kind} sampler is missing {exc}") from None
    except (DimensionError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    if kind in RESERVED_KINDS:
        raise ConfigError(f"sampler kind {kind!r} is reserved but not implemented")
    raise ConfigError(f"unknown sampler kind {kind!r}")


def specs_equal(a, b) -> bool:
    return spec_to_dict(a) == spec_to_dict(b)
