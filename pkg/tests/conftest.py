import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dmdgp.genio import instance_from_points, sample_chain

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def leibniz_det(m):
    """Determinant by permutation expansion; independent of numpy's LU."""
    n = len(m)
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = -1.0 if inversions % 2 else 1.0
        for r, c in enumerate(perm):
            term *= m[r][c]
        total += term
    return total


def cm_matrix(points):
    """Bordered squared-distance matrix of the points."""
    m = len(points)
    out = [[0.0] * (m + 1) for _ in range(m + 1)]
    for a in range(1, m + 1):
        out[0][a] = out[a][0] = 1.0
        for b in range(1, m + 1):
            out[a][b] = math.dist(points[a - 1], points[b - 1]) ** 2
    return out


def chain_instance(n, K, seed, cutoff=None, pruning_pairs=None):
    rng = np.random.default_rng(seed)
    pts = sample_chain(n, K, rng)
    return instance_from_points(pts, K, cutoff=cutoff, pruning_pairs=pruning_pairs), pts


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance criteria report one line each in the terminal summary.
CRITERIA: dict = {}


def record(criterion: str, passed: bool, detail: str) -> None:
    CRITERIA[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(CRITERIA, key=lambda c: [int(t) if t.isdigit() else t for t in c.replace(".", " ").split()]):
        passed, detail = CRITERIA[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
