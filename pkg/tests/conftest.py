import itertools

import numpy as np
import pytest


def leibniz_det(M):
    """Determinant by summing over all permutations; only for tiny matrices."""
    n = len(M)
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1.0 if inversions % 2 else 1.0
        for i in range(n):
            term *= M[i][perm[i]]
        total += term
    return total


def lstsq_distance(vs, v):
    """Distance from v to span(vs) via a least-squares solve."""
    v = np.asarray(v, dtype=float)
    if len(vs) == 0:
        return float(np.linalg.norm(v))
    A = np.asarray(vs, dtype=float).T
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    return float(np.linalg.norm(v - A @ coef))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


_CRITERIA = []


@pytest.fixture
def criterion():
    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" :: {detail}" if detail else "")
        _CRITERIA.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
