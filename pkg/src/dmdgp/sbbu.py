"""Symmetry-based build-up (SBBU) solver.

The practical solver grows a partial realization vertex by vertex and, for
each pruning edge {i, j} whose endpoints' components differ, corrects x_j by
the unique composition of partial reflections that meets d_ij, then applies
the same composition to x_{i+K+1}..x_t.  A conceptual variant that keeps a
global binary vector over a fixed starting realization is provided as a
small-instance oracle.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import ArgumentError, RefusalError, SolverFailure
from .geometry import HyperplaneReflector, hyperplane, laterate, reflect, reflect_list, reflector_from_list
from .instance import (
    DMDGPInstance,
    Edge,
    discretization_radii,
    initial_clique,
    local_symmetry_vertices,
    order_pruning_edges,
    require_valid,
)
from .partition import ComponentPartition

log = logging.getLogger(__name__)

# Largest number of reflectors whose 2^m compositions are materialised in one array.
SCAN_CHUNK_BITS = 18
# Up to this many reflectors the scan runs on float lists instead of numpy.
SMALL_SCAN_BITS = 4
CONCEPTUAL_GUARD = 20


@dataclass
class WorkAccounting:
    sizes: list = field(default_factory=list)  # (edge, |S^ij|) for explicitly solved edges
    W: int = 0
    W_bar: int = 0

    def add(self, edge: Edge, size: int) -> None:
        self.sizes.append((edge, size))
        if size > 0:
            self.W += 2**size
            self.W_bar = max(self.W_bar, 2**size)


@dataclass
class EdgeTrace:
    edge: Edge
    skipped: bool
    symmetry: tuple  # S^ij, empty when skipped
    candidates: int
    residual: float  # | ||x_i - x_j'|| - d_ij | of the chosen candidate (or at skip time)
    runner_up: float = math.inf  # second-best residual among candidates

    @property
    def s_size(self) -> int:
        return len(self.symmetry)


@dataclass
class SolverState:
    x: list  # x[v] is the position of v_v as a float list for v <= t; x[0] unused
    t: int
    partition: ComponentPartition
    work: WorkAccounting = field(default_factory=WorkAccounting)
    trace: Optional[list] = None  # EdgeTrace per processed edge when tracing

    @classmethod
    def empty(cls, instance: DMDGPInstance, trace: bool = False) -> "SolverState":
        return cls(
            [None] * (instance.n + 1), 0, ComponentPartition(instance.n, instance.K), trace=[] if trace else None
        )

    def realization(self) -> np.ndarray:
        """Positions 1..t as a (t, K) array."""
        return np.array(self.x[1 : self.t + 1], dtype=float)


@dataclass
class SBBUStats:
    W: int
    W_bar: int
    sizes: list
    skipped: int
    wall_time: float
    trace: Optional[list] = None

    @property
    def explicit(self) -> int:
        return len(self.sizes)


@dataclass
class SBBUResult:
    x: np.ndarray  # (n, K)
    stats: SBBUStats


def initialize_positions(state: SolverState, instance: DMDGPInstance, j: int, tolerance: float = 1e-4) -> SolverState:
    """Grow x_{t+1}..x_j with the x^- root of each K-lateration; earlier positions are never touched."""
    k = instance.K
    if j > instance.n:
        raise ArgumentError(f"cannot initialize up to {j} > n={instance.n}")
    if state.t >= j:
        return state
    x = state.x
    if state.t == 0:
        x[1 : k + 1] = initial_clique(instance).tolist()
        state.t = k
    for i in range(state.t + 1, j + 1):
        x[i] = laterate(x[i - k : i], discretization_radii(instance, i), tolerance, vertex=i)[1]
    state.t = max(state.t, j)
    return state


def _expand(points: np.ndarray, reflectors: list[HyperplaneReflector]) -> np.ndarray:
    """All compositions of ``reflectors`` applied to ``points``.

    The last reflector is applied first. Row index bit m-1-q selects
    reflector q, so the first reflector is the most significant bit and
    numeric order equals lexicographic order of the selection vector.
    """
    for r in reversed(reflectors):
        points = np.concatenate([points, reflect(r, points)])
    return points


def _residuals_small(planes: list, xj: list, xi: list, d: float) -> list:
    pts = [xj]
    for nrm, anc in reversed(planes):
        pts += [reflect_list(nrm, anc, p) for p in pts]
    return [abs(math.dist(xi, p) - d) for p in pts]


def scan_compositions(planes: list, xj, xi, d: float) -> tuple[int, float, float, int]:
    """Exhaustive search over the 2^m reflector selections for x_j.

    ``planes`` holds (normal, anchor) pairs in increasing vertex order.
    Returns ``(index, best, runner_up, ties)``: ``index`` encodes the
    selection as in :func:`_expand`, ``ties`` counts other selections
    within 1e-12 relative of the best residual.
    """
    m = len(planes)
    tie_eps = 1e-12 * max(1.0, d)
    if m <= SMALL_SCAN_BITS:
        near = list(enumerate(_residuals_small(planes, list(xj), list(xi), d)))
        near.sort(key=lambda p: p[1])
    else:
        reflectors = [HyperplaneReflector(np.array(nrm), np.array(anc)) for nrm, anc in planes]
        xi = np.asarray(xi, dtype=float)
        split = max(0, m - SCAN_CHUNK_BITS)
        inner, outer = reflectors[m - split :], reflectors[: m - split]
        start = np.asarray(xj, dtype=float)[None, :]
        bases = _expand(start, inner) if split else start
        near = []
        for low, base in enumerate(bases):
            pts = _expand(base[None, :], outer)
            diff = pts - xi
            res = np.abs(np.sqrt(np.einsum("ak,ak->a", diff, diff)) - d)
            top = np.argpartition(res, 1)[:2]
            near += [((int(pos) << split) | low, float(res[pos])) for pos in top]
        near.sort(key=lambda p: (p[1], p[0]))
    best = near[0][1]
    ties = [idx for idx, r in near if r <= best + tie_eps]
    best_idx = min(ties)
    runner_up = min((r for idx, r in near if idx != best_idx), default=math.inf)
    return best_idx, best, runner_up, len(ties) - 1


def solve_subproblem(
    state: SolverState, instance: DMDGPInstance, edge: Edge, tolerance: float = 1e-4
) -> SolverState:
    """Correct the partial realization so that ||x_i - x_j|| = d_ij, keeping earlier constraints."""
    i, j = edge
    k = instance.K
    part = state.partition
    if state.t < j:
        raise ArgumentError(f"positions up to {j} must be initialized first (t={state.t})")
    # The first component contains i+K; the first vertices of the others form S^ij.
    roots, firsts = part.intervals_between(i + k, j)
    symmetry = tuple(firsts[1:])
    if not symmetry:
        raise ArgumentError(f"edge {edge} has no local symmetry vertices; it should be skipped")
    x = state.x
    planes = [hyperplane(x[l - k : l], vertex=l) for l in symmetry]
    d = instance.edges[(i, j)]
    m = len(symmetry)
    if m == 1:
        nrm, anc = planes[0]
        flipped = reflect_list(nrm, anc, x[j])
        r0 = abs(math.dist(x[i], x[j]) - d)
        r1 = abs(math.dist(x[i], flipped) - d)
        tie_eps = 1e-12 * (d if d > 1.0 else 1.0)
        if r1 < r0 - tie_eps:
            idx, best, runner_up = 1, r1, r0
        else:
            idx, best, runner_up = 0, r0, r1
        ties = 1 if abs(r1 - r0) <= tie_eps else 0
    else:
        idx, best, runner_up, ties = scan_compositions(planes, x[j], x[i], d)
    if state.trace is not None:
        state.trace.append(EdgeTrace(edge, False, symmetry, 2**m, best, runner_up))
    if ties:
        log.warning("edge %s: %d selections tie with the best residual %.3e; taking the first", edge, ties, best)
    if best > tolerance * (d if d > 1.0 else 1.0):
        raise SolverFailure(
            f"no reflection composition satisfies edge {edge} (best residual {best:.3e}, |S|={m})",
            residual=best,
            edge=edge,
            s_size=m,
        )
    t = state.t
    for q in range(m - 1, -1, -1):
        if (idx >> (m - 1 - q)) & 1:
            nrm, anc = planes[q]
            for v in range(symmetry[q], t + 1):
                x[v] = reflect_list(nrm, anc, x[v])
    part.unite(roots)
    state.work.add(edge, m)
    return state


def sbbu_solve(instance: DMDGPInstance, tolerance: float = 1e-4, trace: bool = False) -> SBBUResult:
    """Practical SBBU over the (j ascending, i descending) pruning-edge order.

    Edges whose endpoints ``i+K`` and ``j`` already share a component are
    solved implicitly; their residual is still checked and a violation
    raises SolverFailure.  With ``trace`` every edge gets an EdgeTrace.
    """
    require_valid(instance)
    t0 = time.perf_counter()
    k = instance.K
    state = SolverState.empty(instance, trace=trace)
    initialize_positions(state, instance, k, tolerance)
    part = state.partition
    x = state.x
    dist = math.dist
    skipped = 0
    by_j = instance.pruning_by_vertex
    for j in sorted(by_j):
        ids, ds = by_j[j]
        initialize_positions(state, instance, j, tolerance)
        # Components are intervals, so rho(i+K) == rho(j) iff i+K >= first(rho(j)).
        first = part.first(part.find(j))
        for p in range(len(ids) - 1, -1, -1):
            i = ids[p]
            if i + k >= first:
                d = ds[p]
                res = abs(dist(x[i], x[j]) - d)
                skipped += 1
                if state.trace is not None:
                    state.trace.append(EdgeTrace((i, j), True, (), 0, res))
                if res > tolerance * (d if d > 1.0 else 1.0):
                    raise SolverFailure(
                        f"implicitly solved edge {(i, j)} violated by {res:.3e}", residual=res, edge=(i, j), s_size=0
                    )
                continue
            solve_subproblem(state, instance, (i, j), tolerance)
            first = part.first(part.find(j))
    if state.t < instance.n:
        initialize_positions(state, instance, instance.n, tolerance)
    work = state.work
    stats = SBBUStats(work.W, work.W_bar, work.sizes, skipped, time.perf_counter() - t0, state.trace)
    return SBBUResult(state.realization(), stats)


class PartialReflections:
    """Realizations U(x0, s) generated from a fixed x0 by partial reflections.

    ``flips`` is the set of vertices l with s_l = 1. Reflector R^l is built
    from x0's positions of v_{l-K}..v_{l-1}; position m of U(x0, s) is x0_m
    reflected by every flipped R^l with l <= m, highest l first.
    """

    def __init__(self, x0, K: int):
        x0 = np.asarray(x0, dtype=float)
        if x0.ndim != 2 or x0.shape[1] != K:
            raise ArgumentError(f"expected an (n, {K}) realization, got shape {x0.shape}")
        self.K = K
        self.n = x0.shape[0]
        self.x0 = np.vstack([np.zeros((1, K)), x0])
        self._refl: dict[int, HyperplaneReflector] = {}

    def reflector(self, l: int) -> HyperplaneReflector:
        if not (self.K < l <= self.n):
            raise ArgumentError(f"no partial reflection for vertex {l}")
        r = self._refl.get(l)
        if r is None:
            r = self._refl[l] = reflector_from_list(self.x0[l - self.K : l].tolist(), vertex=l)
        return r

    def position(self, m: int, flips) -> np.ndarray:
        p = self.x0[m]
        for l in sorted((l for l in flips if l <= m), reverse=True):
            p = reflect(self.reflector(l), p)
        return p

    def realization(self, flips) -> np.ndarray:
        x = self.x0.copy()
        for l in sorted(flips, reverse=True):
            x[l:] = reflect(self.reflector(l), x[l:])
        return x[1:]


def sbbu_conceptual_solve(
    instance: DMDGPInstance, x0, tolerance: float = 1e-4, guard: int = CONCEPTUAL_GUARD
) -> np.ndarray:
    """Global-binary-vector SBBU starting from a realization ``x0`` of the discretization edges.

    S^ij comes from the direct set-builder computation and all reflectors
    are taken from ``x0``. Exhaustive, so refused above ``n - K > guard``.
    """
    require_valid(instance)
    k = instance.K
    if instance.n - k > guard:
        raise RefusalError(f"conceptual SBBU refused for n-K={instance.n - k} > {guard}")
    gen = PartialReflections(x0, k)
    flips: set[int] = set()
    order = order_pruning_edges(instance.partition)
    for pos, edge in enumerate(order):
        sym = local_symmetry_vertices(instance, edge, order[:pos])
        if not sym:
            continue
        i, j = edge
        d = instance.edges[edge]
        xi = gen.position(i, flips)
        base = flips - sym
        best, best_flips = math.inf, None
        for r in range(len(sym) + 1):
            for chosen in combinations(sorted(sym), r):
                trial = base | set(chosen)
                res = abs(math.dist(xi, gen.position(j, trial)) - d)
                if res < best:
                    best, best_flips = res, trial
        if best > tolerance * max(1.0, d):
            raise SolverFailure(
                f"no allowed flip vector satisfies edge {edge} (best residual {best:.3e})",
                residual=best,
                edge=edge,
                s_size=len(sym),
            )
        flips = best_flips
    return gen.realization(flips)
