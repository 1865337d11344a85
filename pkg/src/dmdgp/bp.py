"""Classic Branch-and-Prune: depth-first search over the binary K-lateration tree."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import ArgumentError, RefusalError, SolverFailure, SolverTimeout
from .geometry import laterate
from .instance import DMDGPInstance, discretization_radii, initial_clique, require_valid

ENUMERATION_GUARD = 24


@dataclass
class BPStats:
    nodes_expanded: int = 0
    prunes: int = 0
    solutions_found: int = 0
    wall_time: float = 0.0


@dataclass
class BPResult:
    x: np.ndarray  # (n, K); row v-1 holds vertex v
    stats: BPStats


def _search(
    instance: DMDGPInstance,
    tolerance: float,
    stats: BPStats,
    last: Optional[int] = None,
    prune: bool = True,
    max_nodes: Optional[int] = None,
    time_limit: Optional[float] = None,
) -> Iterator[list]:
    """Yield every leaf (list of positions, index 0 unused) of the pruned tree over vertices 1..last.

    The yielded list is the live search buffer; copy it before resuming.
    Iterative so that chains of thousands of vertices do not hit the
    recursion limit.
    """
    k = instance.K
    last = instance.n if last is None else last
    x: list = [None] * (last + 1)
    x[1 : k + 1] = initial_clique(instance).tolist()
    radii = [None] * (last + 1)
    for v in range(k + 1, last + 1):
        radii[v] = discretization_radii(instance, v)
    checks = instance.pruning_by_vertex if prune else {}
    dist = math.dist

    cands: list = [None] * (last + 2)
    nxt = [0] * (last + 2)
    start = time.perf_counter()

    def expand(v):
        plus, minus, tangent = laterate(x[v - k : v], radii[v], tolerance, vertex=v)
        return (plus,) if tangent else (plus, minus)

    i = k + 1
    cands[i] = expand(i)
    while i > k:
        c = cands[i]
        p = nxt[i]
        if p == len(c):
            i -= 1
            continue
        nxt[i] = p + 1
        pos = c[p]
        pr = checks.get(i)
        if pr is not None:
            feasible = True
            for h, d in zip(*pr):
                if abs(dist(pos, x[h]) - d) > tolerance * (d if d > 1.0 else 1.0):
                    feasible = False
                    break
            if not feasible:
                stats.prunes += 1
                continue
        x[i] = pos
        stats.nodes_expanded += 1
        if stats.nodes_expanded & 255 == 0:
            if max_nodes is not None and stats.nodes_expanded >= max_nodes:
                raise SolverTimeout(f"node budget of {max_nodes} exhausted", stats=stats)
            if time_limit is not None and time.perf_counter() - start > time_limit:
                raise SolverTimeout(f"time limit of {time_limit}s exceeded", stats=stats)
        if i == last:
            stats.solutions_found += 1
            yield x
            continue
        i += 1
        cands[i] = expand(i)
        nxt[i] = 0


def bp_solve(
    instance: DMDGPInstance,
    tolerance: float = 1e-4,
    max_nodes: Optional[int] = None,
    time_limit: Optional[float] = None,
) -> BPResult:
    """First realisation found by depth-first BP (x+ explored before x-).

    Raises SolverTimeout when a budget runs out and SolverFailure when the
    whole tree is pruned away.
    """
    require_valid(instance)
    stats = BPStats()
    t0 = time.perf_counter()
    try:
        for leaf in _search(instance, tolerance, stats, max_nodes=max_nodes, time_limit=time_limit):
            stats.wall_time = time.perf_counter() - t0
            return BPResult(np.array(leaf[1:], dtype=float), stats)
    finally:
        stats.wall_time = time.perf_counter() - t0
    raise SolverFailure("search tree exhausted without a feasible realization", stats=stats)


def _guard(depth: int, limit: int) -> None:
    if depth > limit:
        raise RefusalError(f"exhaustive enumeration over 2^{depth} leaves refused (limit 2^{limit})")


def enumerate_all_solutions(
    instance: DMDGPInstance, tolerance: float = 1e-7, guard: int = ENUMERATION_GUARD
) -> tuple[list[np.ndarray], BPStats]:
    """Every leaf of the BP tree that satisfies all pruning edges, including both mirror images."""
    require_valid(instance)
    _guard(instance.n - instance.K, guard)
    stats = BPStats()
    t0 = time.perf_counter()
    sols = [np.array(leaf[1:], dtype=float) for leaf in _search(instance, tolerance, stats)]
    stats.wall_time = time.perf_counter() - t0
    return sols, stats


def dedup_values(values, rel_tol: float = 1e-7) -> list[float]:
    """Collapse sorted values whose relative gap to the current cluster head is within ``rel_tol``."""
    out: list[float] = []
    for v in sorted(values):
        if out and v - out[-1] <= rel_tol * max(abs(v), abs(out[-1])):
            continue
        out.append(v)
    return out


def distance_value_set(
    instance: DMDGPInstance, i: int, j: int, rel_tol: float = 1e-7, guard: int = ENUMERATION_GUARD
) -> list[float]:
    """Distinct values of ||x_j - x_i|| over every path of the unpruned tree.

    Only vertices 1..j are enumerated since later choices cannot change the
    value; the size guard therefore applies to j - K.
    """
    k = instance.K
    if not (1 <= i < j <= instance.n):
        raise ArgumentError(f"need 1 <= i < j <= n, got i={i}, j={j}")
    require_valid(instance)
    if j - i <= k:
        return [instance.d(i, j)]
    _guard(j - k, guard)
    stats = BPStats()
    values = [math.dist(leaf[i], leaf[j]) for leaf in _search(instance, 1e-7, stats, last=j, prune=False)]
    return dedup_values(values, rel_tol)
