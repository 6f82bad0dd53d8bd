"""Acceptance criteria, one test each; run with ``pytest tests/test_acceptance.py -s``."""
import json
import math
import time

import numpy as np
import pytest

from gramfree.engine import GramState
from gramfree.experiments import (ExperimentConfig, merge_reports, run_bound, run_freeness,
                                  run_negligibility_probe, run_zeroset_probe)
from gramfree.hilbert import gram_det_direct, inner
from gramfree.measures import BaseGaussian, CovarianceSpec, DegenerateSubspace

pytestmark = pytest.mark.slow


def test_1_oracle_equivalence(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst, compared = 0.0, 0
    for _ in range(1000):
        n = int(rng.integers(1, 17))
        vs = rng.uniform(-1.0, 1.0, size=(n, 32))
        state = GramState(32)
        for v in vs:
            state.append(v)
        direct = gram_det_direct(list(vs))
        if direct > 1e-200:
            compared += 1
            worst = max(worst, abs(state.log_det - math.log(direct)))
    elapsed = time.perf_counter() - start
    criterion("1 oracle equivalence", worst <= 1e-8 and compared == 1000 and elapsed < 10,
              f"max |dlog det| = {worst:.3e} over {compared} cases in {elapsed:.1f}s")


def test_2_almost_sure_freeness(criterion):
    sampler = BaseGaussian(CovarianceSpec.geometric(50))
    start = time.perf_counter()
    rates = {}
    for tol in (1e-8, 1e-10, 1e-12):
        cfg = ExperimentConfig(d=50, k_max=10, trials=10_000, master_seed=2,
                               sampler=sampler, tol_dep=tol)
        rates[tol] = run_freeness(cfg).freeness_rate
    elapsed = time.perf_counter() - start
    ok = all(r == [1.0] * 11 for r in rates.values()) and elapsed < 60
    worst = min(min(r) for r in rates.values())
    criterion("2 almost-sure freeness", ok,
              f"min freeness rate {worst} over 3 tolerances in {elapsed:.1f}s")


def test_3_hypothesis_violation_contrast(criterion):
    d, m = 50, 3
    cfg = ExperimentConfig(d=d, k_max=6, trials=1000, master_seed=3,
                           sampler=DegenerateSubspace(np.eye(d)[:m]))
    report = run_freeness(cfg)
    dep = [t.dependent / t.n for t in report.per_k]
    criterion("3 hypothesis-violation contrast", dep == [0.0] * m + [1.0] * (7 - m),
              f"dependence fraction per k = {dep}")


def test_4_proof_inequality(criterion):
    cfg = ExperimentConfig(d=50, k_max=6, trials=10_000, master_seed=4)
    report = run_bound(cfg)
    rows = report.bound_rows()
    bad = [r for r in rows if not r["lhs_hat"] >= r["rhs_hat"] - 3 * r["stderr_rhs"]]
    monotone = report.bound.monotone_in_t()
    criterion("4 proof inequality", not bad and len(rows) == 7 * 5 * 3 and all(monotone),
              f"{len(rows) - len(bad)}/{len(rows)} rows satisfied, monotone in t: {all(monotone)}")


def test_5_zero_set_measure(criterion):
    # d kept small: with variances 2**-i the last residual at k = d-1 scales like
    # 2**-(d/2) and approaches tol_dep once d nears 50
    d = 16
    report = run_zeroset_probe(ExperimentConfig(d=d, k_max=d, trials=10_000, master_seed=5))
    measure = report.zeroset_measure
    ok = measure[:d] == [0.0] * d and measure[d] == 1.0
    criterion("5 zero-set measure", ok,
              f"d={d}: max over k<d = {max(measure[:d])}, at k=d = {measure[d]}")


def test_6_negligibility_probes(criterion):
    d = 50
    rng = np.random.default_rng(6)
    subspace = rng.standard_normal((3, d))
    shift = rng.standard_normal(d)
    cfg = ExperimentConfig(d=d, trials=100_000, master_seed=6)
    lines, ok = [], True
    for k in (1, 2, 3):
        h = run_negligibility_probe(subspace, shift, k, cfg).hits
        ok &= h.continuous_hits == 0 and h.contrast_hits == h.draws == 100_000
        lines.append(f"k={k}: {h.continuous_hits}/{h.draws} vs {h.contrast_hits}/{h.draws}")
    criterion("6 negligibility probes", ok, "; ".join(lines))


def test_7_determinism_and_merge(criterion):
    cfg = ExperimentConfig(d=50, k_max=10, trials=2000, master_seed=0xC0FFEE)
    serial = run_bound(cfg)
    parallel = run_bound(cfg, workers=4)
    same_bytes = json.dumps(serial.to_dict()) == json.dumps(parallel.to_dict())
    edges = [0, 300, 1100, 1500, 2000]
    parts = [run_bound(cfg, start=a, stop=b) for a, b in zip(edges, edges[1:])]
    perms = [[0, 1, 2, 3], [3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]]
    merged_ok = all(merge_reports([parts[i] for i in p]) == serial for p in perms)
    criterion("7 determinism and merge", same_bytes and merged_ok,
              f"4-worker bytes identical: {same_bytes}; permuted merges equal serial: {merged_ok}")


def test_8_algebraic_properties(criterion):
    rng = np.random.default_rng(8)
    fails = {"permutation": 0, "scaling": 0, "hadamard": 0}
    for _ in range(1000):
        d = int(rng.integers(2, 17))
        n = int(rng.integers(1, d + 1))
        vs = rng.uniform(-1.0, 1.0, size=(n, d))
        det = gram_det_direct(list(vs))
        perm = gram_det_direct(list(vs[rng.permutation(n)]))
        if abs(perm - det) > 1e-9 * det:
            fails["permutation"] += 1
        c = float(rng.uniform(0.1, 10.0)) * rng.choice([-1.0, 1.0])
        scaled = vs.copy()
        scaled[0] *= c
        if abs(gram_det_direct(list(scaled)) - c * c * det) > 1e-9 * c * c * det:
            fails["scaling"] += 1
        if det > math.prod(inner(v, v) for v in vs) * (1 + 1e-9):
            fails["hadamard"] += 1
    criterion("8 algebraic properties", not any(fails.values()),
              f"failures out of 1000: {fails}")
