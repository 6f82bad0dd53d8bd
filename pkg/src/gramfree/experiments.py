"""Monte Carlo experiments on randomly drawn vector sequences.

Every trial draws ``e_0, ..., e_{k_max}`` from the configured sampler, feeds
them to a fresh :class:`~gramfree.engine.GramState` and records, for each
``k``, the residual distance, the log Gram determinant and whether the family
has become dependent. Trials only depend on ``(master_seed, trial_index)``.

Reports keep raw tallies rather than running means. Sums of floats are held
exactly as integers in units of 2**-1074 (every finite double is such a
multiple), so merging partial reports in any order reproduces the serial
report bit for bit.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .engine import TOL_DEP, GramState
from .errors import ConfigError, MergeError
from .hilbert import as_family, as_vector, gram_det_direct
from .measures import (AffineShift, BaseGaussian, CovarianceSpec, DegenerateSubspace,
                       IndependentSequence, SeedPath, law_at, sample, spec_from_dict,
                       spec_to_dict, specs_equal, support_dimension)

DEFAULT_D = 64
DEFAULT_K_MAX = 10
DEFAULT_TRIALS = 1000
DEFAULT_T_GRID = (1.0, 10.0, 1e2, 1e4, 1e6)
DEFAULT_EPS_GRID = (1e-12, 1e-8, 1e-4)
#: Absolute distance under which a draw counts as lying in an affine subspace.
TOL_ABS = 1e-9
#: Standard errors of slack allowed in the bound inequality.
BOUND_SLACK = 3.0

_FX = 1074


def _fx(x: float) -> int:
    """Exact fixed-point image of a finite double, in units of 2**-1074."""
    num, den = float(x).as_integer_ratio()
    return num << (_FX + 1 - den.bit_length())


def _fx_mean(total: int, n: int) -> float:
    return total / (n << _FX)


def _fx_var(s1: int, s2: int, n: int) -> float:
    """Unbiased sample variance from exact fixed-point sums of x and x**2."""
    if n < 2:
        return 0.0
    num = ((s2 * n) << _FX) - s1 * s1
    return max(0.0, float(Fraction(num, (n * (n - 1)) << (2 * _FX))))


@dataclass(eq=False)
class ExperimentConfig:
    d: int = DEFAULT_D
    k_max: int = DEFAULT_K_MAX
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    sampler: object = None
    tol_dep: float = TOL_DEP
    t_grid: tuple = DEFAULT_T_GRID
    eps_grid: tuple = DEFAULT_EPS_GRID

    def __post_init__(self):
        if self.sampler is None:
            self.sampler = BaseGaussian(CovarianceSpec.geometric(self.d))
        self.t_grid = tuple(float(t) for t in self.t_grid)
        self.eps_grid = tuple(float(e) for e in self.eps_grid)
        self.validate()

    def validate(self) -> None:
        for name in ("d", "k_max", "trials", "master_seed"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise ConfigError(f"{name} must be an integer")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.master_seed < 1 << 64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if not self.tol_dep >= 0.0:
            raise ConfigError("tol_dep must be >= 0")
        for name in ("t_grid", "eps_grid"):
            grid = getattr(self, name)
            if not grid or not all(math.isfinite(g) and g > 0 for g in grid):
                raise ConfigError(f"{name} must be nonempty and strictly positive")
        if self.sampler.d != self.d:
            raise ConfigError(f"sampler has dimension {self.sampler.d}, config d={self.d}")
        if isinstance(self.sampler, IndependentSequence) and \
                len(self.sampler.per_index) < self.k_max + 1:
            raise ConfigError(
                f"independent sequence gives {len(self.sampler.per_index)} laws, "
                f"k_max={self.k_max} needs {self.k_max + 1}")

    def replace(self, **changes) -> "ExperimentConfig":
        fields = dict(d=self.d, k_max=self.k_max, trials=self.trials,
                      master_seed=self.master_seed, sampler=self.sampler,
                      tol_dep=self.tol_dep, t_grid=self.t_grid, eps_grid=self.eps_grid)
        fields.update(changes)
        return ExperimentConfig(**fields)

    def to_dict(self) -> dict:
        return {"d": int(self.d), "k_max": int(self.k_max), "trials": int(self.trials),
                "master_seed": int(self.master_seed), "tol_dep": self.tol_dep,
                "t_grid": list(self.t_grid), "eps_grid": list(self.eps_grid),
                "sampler": spec_to_dict(self.sampler)}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        d = int(data.get("d", DEFAULT_D))
        sampler = data.pop("sampler", None)
        known = {"d", "k_max", "trials", "master_seed", "tol_dep", "t_grid", "eps_grid"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if sampler is not None:
            sampler = spec_from_dict(sampler, d)
        return cls(sampler=sampler, **data)


# -- single trials ------------------------------------------------------------

@dataclass(frozen=True)
class KObservation:
    residual: float
    log_det: float
    dependent: bool


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    per_k: tuple


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialRecord:
    state = GramState(config.d, config.tol_dep)
    obs = []
    for k in range(config.k_max + 1):
        v = sample(config.sampler, SeedPath(config.master_seed, trial_index, k))
        out = state.append(v)
        obs.append(KObservation(out.residual, out.log_det_after, state.dependent))
    return TrialRecord(trial_index, tuple(obs))


# -- tallies -------------------------------------------------------------------

@dataclass
class KTally:
    n: int = 0
    dependent: int = 0
    finite: int = 0
    sum_log_det: int = 0
    sum_sq_log_det: int = 0

    def add(self, ob: KObservation) -> None:
        self.n += 1
        if ob.dependent:
            self.dependent += 1
        if ob.log_det != -math.inf:
            self.finite += 1
            self.sum_log_det += _fx(ob.log_det)
            self.sum_sq_log_det += _fx(ob.log_det * ob.log_det)

    def merged(self, other: "KTally") -> "KTally":
        return KTally(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self) -> tuple:
        return (self.n, self.dependent, self.finite, self.sum_log_det, self.sum_sq_log_det)

    @property
    def freeness_rate(self) -> float:
        return (self.n - self.dependent) / self.n

    @property
    def mean_log_det(self) -> float:
        return _fx_mean(self.sum_log_det, self.finite) if self.finite else math.nan

    @property
    def stderr(self) -> float:
        """Standard error of ``mean_log_det`` over the trials with finite log det."""
        if not self.finite:
            return math.nan
        var = _fx_var(self.sum_log_det, self.sum_sq_log_det, self.finite)
        return math.sqrt(var / self.finite)


@dataclass
class BoundTally:
    """Per-k counts of ``det > eps`` and exact sums of ``exp(-t det)`` and its square."""
    t_grid: tuple
    eps_grid: tuple
    exceed: list = field(default_factory=list)
    sum_exp: list = field(default_factory=list)
    sum_exp_sq: list = field(default_factory=list)

    @classmethod
    def empty(cls, n_k: int, t_grid, eps_grid) -> "BoundTally":
        return cls(tuple(t_grid), tuple(eps_grid),
                   [[0] * len(eps_grid) for _ in range(n_k)],
                   [[0] * len(t_grid) for _ in range(n_k)],
                   [[0] * len(t_grid) for _ in range(n_k)])

    def add(self, k: int, log_det: float) -> None:
        det = math.exp(log_det) if log_det != -math.inf else 0.0
        row = self.exceed[k]
        for i, eps in enumerate(self.eps_grid):
            if det > eps:
                row[i] += 1
        s1, s2 = self.sum_exp[k], self.sum_exp_sq[k]
        for i, t in enumerate(self.t_grid):
            e = math.exp(-t * det)
            s1[i] += _fx(e)
            s2[i] += _fx(e * e)

    def merged(self, other: "BoundTally") -> "BoundTally":
        def add2(a, b):
            return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
        return BoundTally(self.t_grid, self.eps_grid, add2(self.exceed, other.exceed),
                          add2(self.sum_exp, other.sum_exp),
                          add2(self.sum_exp_sq, other.sum_exp_sq))

    def rows(self, ns: Sequence[int]) -> list[dict]:
        out = []
        for k, n in enumerate(ns):
            for it, t in enumerate(self.t_grid):
                mean_e = _fx_mean(self.sum_exp[k][it], n)
                sd_e = math.sqrt(_fx_var(self.sum_exp[k][it], self.sum_exp_sq[k][it], n))
                for ie, eps in enumerate(self.eps_grid):
                    lhs = self.exceed[k][ie] / n
                    rhs, se = _bound_rhs(mean_e, sd_e, n, t * eps)
                    out.append({"k": k, "t": t, "eps": eps, "lhs_hat": lhs,
                                "rhs_hat": rhs, "stderr_rhs": se,
                                "satisfied": lhs >= rhs - BOUND_SLACK * se})
        return out

    def monotone_in_t(self) -> list[bool]:
        """Whether the empirical mean of exp(-t det) is nonincreasing in t, per k."""
        order = sorted(range(len(self.t_grid)), key=lambda i: self.t_grid[i])
        flags = []
        for sums in self.sum_exp:
            seq = [sums[i] for i in order]
            flags.append(all(a >= b for a, b in zip(seq, seq[1:])))
        return flags


def _bound_rhs(mean_e: float, sd_e: float, n: int, t_eps: float) -> tuple[float, float]:
    """``1 - mean * exp(t eps)`` and its standard error, evaluated in log space."""
    rhs = 1.0 - math.exp(math.log(mean_e) + t_eps) if mean_e > 0 else 1.0
    if sd_e > 0:
        try:
            se = math.exp(math.log(sd_e) - 0.5 * math.log(n) + t_eps)
        except OverflowError:
            se = math.inf
    else:
        se = 0.0
    return rhs, se


@dataclass
class HitTally:
    draws: int = 0
    continuous_hits: int = 0
    contrast_hits: int = 0

    def merged(self, other: "HitTally") -> "HitTally":
        return HitTally(self.draws + other.draws,
                        self.continuous_hits + other.continuous_hits,
                        self.contrast_hits + other.contrast_hits)


# -- reports -------------------------------------------------------------------

@dataclass
class ExperimentReport:
    kind: str
    config: dict
    trial_ranges: list
    per_k: list = field(default_factory=list)
    bound: BoundTally | None = None
    hits: HitTally | None = None
    probe: dict | None = None

    @property
    def trials(self) -> int:
        return sum(b - a for a, b in self.trial_ranges)

    @property
    def freeness_rate(self) -> list[float]:
        return [t.freeness_rate for t in self.per_k]

    @property
    def inf_freeness_rate(self) -> float:
        """Infimum of the freeness rate over the observed k (not over all k)."""
        return min(self.freeness_rate)

    @property
    def zeroset_measure(self) -> list[float]:
        return [t.dependent / t.n for t in self.per_k]

    def per_k_rows(self) -> list[dict]:
        rows = []
        for k, t in enumerate(self.per_k):
            row = {"k": k, "trials": t.n, "dependent": t.dependent,
                   "freeness_rate": t.freeness_rate}
            if self.kind == "zeroset":
                row["zeroset_measure"] = t.dependent / t.n
            row.update(mean_log_det=t.mean_log_det, stderr=t.stderr, finite=t.finite)
            rows.append(row)
        return rows

    def bound_rows(self) -> list[dict]:
        return self.bound.rows([t.n for t in self.per_k]) if self.bound else []

    def hit_rates(self) -> dict:
        h = self.hits
        return {"k": self.probe["k"], "draws": h.draws,
                "continuous_hits": h.continuous_hits, "contrast_hits": h.contrast_hits,
                "continuous_rate": h.continuous_hits / h.draws,
                "contrast_rate": h.contrast_hits / h.draws}

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "config": self.config,
               "trial_ranges": [list(r) for r in self.trial_ranges],
               "trials": self.trials}
        if self.probe is not None:
            out["probe"] = self.probe
        if self.per_k:
            out["per_k"] = self.per_k_rows()
            out["inf_freeness_rate_observed_k"] = self.inf_freeness_rate
        if self.bound is not None:
            out["bound_table"] = self.bound_rows()
            out["monotone_in_t"] = self.bound.monotone_in_t()
        if self.hits is not None:
            out["hit_counts"] = self.hit_rates()
        out["tallies"] = self._tallies()
        return _jsonable(out)

    def _tallies(self) -> dict:
        out = {"per_k": [[hex(x) for x in t.astuple()] for t in self.per_k]}
        if self.bound is not None:
            out["bound"] = {
                "exceed": self.bound.exceed,
                "sum_exp": [[hex(x) for x in r] for r in self.bound.sum_exp],
                "sum_exp_sq": [[hex(x) for x in r] for r in self.bound.sum_exp_sq]}
        if self.hits is not None:
            out["hits"] = [self.hits.draws, self.hits.continuous_hits, self.hits.contrast_hits]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        """Rebuild a report (for merging) from the output of :meth:`to_dict`."""
        tallies = data["tallies"]
        per_k = [KTally(*(int(x, 16) for x in row)) for row in tallies["per_k"]]
        bound = None
        if "bound" in tallies:
            b = tallies["bound"]
            cfg = data["config"]
            bound = BoundTally(tuple(cfg["t_grid"]), tuple(cfg["eps_grid"]),
                               [list(r) for r in b["exceed"]],
                               [[int(x, 16) for x in r] for r in b["sum_exp"]],
                               [[int(x, 16) for x in r] for r in b["sum_exp_sq"]])
        hits = HitTally(*tallies["hits"]) if "hits" in tallies else None
        return cls(data["kind"], data["config"],
                   [tuple(r) for r in data["trial_ranges"]],
                   per_k, bound, hits, data.get("probe"))


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def merge_reports(parts: Sequence[ExperimentReport]) -> ExperimentReport:
    """Combine reports over disjoint trial ranges of the same experiment."""
    if not parts:
        raise MergeError("nothing to merge")
    first = parts[0]
    for p in parts[1:]:
        if p.kind != first.kind or p.config != first.config or p.probe != first.probe:
            raise MergeError("reports come from different experiments")
        if len(p.per_k) != len(first.per_k):
            raise MergeError("reports have different k ranges")
    ranges = sorted(r for p in parts for r in p.trial_ranges)
    coalesced = []
    for a, b in ranges:
        if coalesced and a < coalesced[-1][1]:
            raise MergeError(f"trial ranges overlap at trial {a}")
        if coalesced and a == coalesced[-1][1]:
            coalesced[-1] = (coalesced[-1][0], b)
        else:
            coalesced.append((a, b))
    per_k = list(first.per_k)
    bound, hits = first.bound, first.hits
    for p in parts[1:]:
        per_k = [a.merged(b) for a, b in zip(per_k, p.per_k)]
        if bound is not None:
            bound = bound.merged(p.bound)
        if hits is not None:
            hits = hits.merged(p.hits)
    return ExperimentReport(first.kind, first.config, coalesced, per_k, bound, hits,
                            first.probe)


# -- experiment runners ---------------------------------------------------------

def _run_chunk(kind: str, config: ExperimentConfig, start: int, stop: int,
               probe: dict | None = None) -> ExperimentReport:
    if kind == "negligibility":
        return _negligibility_chunk(config, start, stop, probe)
    n_k = config.k_max + 1
    per_k = [KTally() for _ in range(n_k)]
    bound = BoundTally.empty(n_k, config.t_grid, config.eps_grid) if kind == "bound" else None
    for trial in range(start, stop):
        rec = run_trial(config, trial)
        for k, ob in enumerate(rec.per_k):
            per_k[k].add(ob)
            if bound is not None:
                bound.add(k, ob.log_det)
    return ExperimentReport(kind, config.to_dict(), [(start, stop)], per_k, bound)


def _execute(kind, config, start, stop, workers, probe=None) -> ExperimentReport:
    stop = config.trials if stop is None else stop
    if not 0 <= start < stop:
        raise ConfigError(f"empty or invalid trial range [{start}, {stop})")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    if workers == 1:
        return _run_chunk(kind, config, start, stop, probe)
    edges = np.linspace(start, stop, workers + 1).round().astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, kind, config, a, b, probe) for a, b in chunks]
        parts = [f.result() for f in futures]
    return merge_reports(parts)


def run_freeness(config: ExperimentConfig, *, start: int = 0, stop: int | None = None,
                 workers: int = 1) -> ExperimentReport:
    """Per-k rate at which the drawn family is still linearly independent."""
    config.validate()
    return _execute("freeness", config, start, stop, workers)


def run_bound(config: ExperimentConfig, *, start: int = 0, stop: int | None = None,
              workers: int = 1) -> ExperimentReport:
    """Empirical check of P(det > eps) >= 1 - E[exp(-t det)] exp(t eps) on the t/eps grids."""
    config.validate()
    return _execute("bound", config, start, stop, workers)


def is_base_measure(spec) -> bool:
    if isinstance(spec, BaseGaussian):
        return True
    if isinstance(spec, IndependentSequence):
        first = spec.per_index[0]
        return isinstance(first, BaseGaussian) and all(
            specs_equal(first, p) for p in spec.per_index)
    return False


def run_zeroset_probe(config: ExperimentConfig, *, start: int = 0, stop: int | None = None,
                      workers: int = 1) -> ExperimentReport:
    """Fraction of base-measure draws whose Gram determinant is numerically zero, per k."""
    config.validate()
    if not is_base_measure(config.sampler):
        raise ConfigError("the zero-set probe needs i.i.d. draws from the base Gaussian")
    return _execute("zeroset", config, start, stop, workers)


def contrast_sampler(subspace: np.ndarray, shift: np.ndarray) -> AffineShift:
    """A sampler whose draws all lie in ``shift + span(subspace)``."""
    return AffineShift(shift, DegenerateSubspace(subspace))


def _probe_geometry(probe: dict, d: int, tol_dep: float):
    subspace = np.asarray(probe["subspace"], dtype=np.float64).reshape(-1, d)
    shift = np.asarray(probe["shift"], dtype=np.float64)
    state = GramState(d, tol_dep)
    for b in subspace:
        if state.append(b).dependent_now:
            raise ConfigError("subspace basis is linearly dependent")
    return subspace, shift, state


def _negligibility_chunk(config, start, stop, probe) -> ExperimentReport:
    d, k = config.d, probe["k"]
    subspace, shift, span = _probe_geometry(probe, d, config.tol_dep)
    contrast = contrast_sampler(subspace, shift)
    # A = H^(k-1) x (shift + span): only block k-1 is constrained. The draws
    # are counter based, so skipping blocks 0..k-2 leaves block k-1 unchanged.
    j = k - 1
    hits = HitTally()
    for trial in range(start, stop):
        seed = SeedPath(config.master_seed, trial, j)
        hits.draws += 1
        v = sample(config.sampler, seed)
        if span.distance_to_span(v - shift) <= TOL_ABS:
            hits.continuous_hits += 1
        w = sample(contrast, seed)
        if span.distance_to_span(w - shift) <= TOL_ABS:
            hits.contrast_hits += 1
    return ExperimentReport("negligibility", config.to_dict(), [(start, stop)],
                            hits=hits, probe=probe)


def run_negligibility_probe(subspace, shift, k: int, config: ExperimentConfig, *,
                            start: int = 0, stop: int | None = None,
                            workers: int = 1) -> ExperimentReport:
    """Hit rates of the strict affine subspace ``H^(k-1) x (shift + span(subspace))``.

    Two samplers are run on the same seeds: ``config.sampler`` (expected to
    miss) and a sampler supported on the subspace itself (must always hit).
    """
    config.validate()
    d = config.d
    try:
        shift = as_vector(shift, d)
        basis = np.zeros((0, d)) if len(subspace) == 0 else as_family(subspace)
    except ValueError as exc:
        raise ConfigError(f"bad probe geometry: {exc}") from None
    if basis.shape[1] != d:
        raise ConfigError(f"subspace has dimension {basis.shape[1]}, config d={d}")
    if basis.shape[0] >= d:
        raise ConfigError("affine subspace must be strict (fewer than d basis vectors)")
    if basis.shape[0] and not gram_det_direct(list(basis)) > 0.0:
        raise ConfigError("subspace basis is linearly dependent")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ConfigError("k must be a positive integer")
    if isinstance(config.sampler, IndependentSequence):
        law_at(config.sampler, k - 1)
    probe = {"subspace": basis.tolist(), "shift": shift.tolist(), "k": int(k)}
    _probe_geometry(probe, d, config.tol_dep)
    return _execute("negligibility", config, start, stop, workers, probe)


def predicted_onset(config: ExperimentConfig) -> int:
    """First k at which dependence is forced by the sampler's support."""
    return support_dimension(config.sampler)


SELFTEST_TOL = 1e-8


def run_selftest(cases: int = 1000, d: int = 32, k_max: int = 16, master_seed: int = 0,
                 tol_dep: float = TOL_DEP) -> dict:
    """Compare the incremental log determinant against the direct factorization.

    Each case draws between 1 and ``min(d, k_max + 1)`` vectors with
    coordinates uniform in [-1, 1]. Cases whose direct determinant is at or
    below 1e-200 are counted but not compared.
    """
    if cases < 1 or d < 1 or k_max < 0:
        raise ConfigError("selftest needs cases >= 1, d >= 1, k_max >= 0")
    from .hilbert import gram_logdet_direct

    rows = []
    for case in range(cases):
        gen = SeedPath(master_seed, case, 0).generator()
        n = int(gen.integers(1, min(d, k_max + 1) + 1))
        vs = gen.uniform(-1.0, 1.0, size=(n, d))
        state = GramState(d, tol_dep)
        for v in vs:
            state.append(v)
        direct = gram_logdet_direct(list(vs))
        compared = direct > math.log(1e-200)
        diff = abs(state.log_det - direct) if compared else math.nan
        rows.append({"case": case, "n_vectors": n, "log_det_incremental": state.log_det,
                     "log_det_direct": direct, "abs_diff": diff, "compared": compared})
    diffs = [r["abs_diff"] for r in rows if r["compared"]]
    max_diff = max(diffs) if diffs else 0.0
    return {"cases": cases, "d": d, "k_max": k_max, "master_seed": master_seed,
            "compared": len(diffs), "max_abs_log_diff": max_diff,
            "tolerance": SELFTEST_TOL, "passed": max_diff <= SELFTEST_TOL, "rows": rows}
