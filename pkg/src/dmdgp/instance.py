"""DMDGP instance model, edge classification, pruning-edge order and symmetry-vertex sets.

Vertices are 1-based and stored in the discretization order. The set
computations here are deliberately direct transcriptions of their
set-builder definitions; the SBBU solver computes the same sets through a
union-find partition and is checked against these.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import ArgumentError, InstanceError
from .geometry import place_clique

Edge = tuple[int, int]


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class DMDGPInstance:
    """Weighted graph on vertices 1..n with embedding dimension K.

    ``edges`` maps ordered pairs ``(i, j)`` with ``i < j`` to distances.
    Structural DMDGP properties (the chain of (K+1)-cliques) are *not*
    enforced here; use :func:`validate_dmdgp` or :func:`require_valid`.
    """

    n: int
    K: int
    edges: Mapping[Edge, float] = field(repr=False)

    def __post_init__(self):
        if self.K < 1:
            raise InstanceError(f"dimension K must be >= 1, got {self.K}")
        if self.n <= self.K:
            raise InstanceError(f"need n > K, got n={self.n}, K={self.K}")
        clean = {}
        for (i, j), d in self.edges.items():
            if not (1 <= i < j <= self.n):
                raise InstanceError(f"edge {(i, j)} out of range or not ordered (i < j <= {self.n})")
            d = float(d)
            if not (math.isfinite(d) and d > 0.0):
                raise InstanceError(f"edge {(i, j)} has non-positive or non-finite weight {d}")
            clean[(i, j)] = d
        object.__setattr__(self, "edges", clean)

    @classmethod
    def from_edges(cls, n: int, K: int, triples: Iterable[tuple[int, int, float]]) -> "DMDGPInstance":
        """Build from ``(i, j, d)`` triples; duplicates (in either orientation) are an error."""
        edges = {}
        for i, j, d in triples:
            e = _edge(int(i), int(j))
            if e in edges:
                raise InstanceError(f"duplicate edge {e}")
            edges[e] = d
        return cls(n, K, edges)

    def d(self, i: int, j: int) -> float:
        return self.edges[_edge(i, j)]

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.edges

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def partition(self) -> "EdgePartition":
        return classify_edges(self)

    @cached_property
    def pruning_by_vertex(self) -> dict[int, tuple[list[int], list[float]]]:
        """For each j, the earlier endpoints i and distances of pruning edges {i, j}."""
        out: dict[int, tuple[list[int], list[float]]] = {}
        for i, j in sorted(self.partition.pruning):
            ids, ds = out.setdefault(j, ([], []))
            ids.append(i)
            ds.append(self.edges[(i, j)])
        return out

    @cached_property
    def clique_sq_dist(self) -> np.ndarray:
        """Squared distance matrix of the first K vertices."""
        k = self.K
        d2 = np.zeros((k, k))
        for a in range(1, k + 1):
            for b in range(a + 1, k + 1):
                d2[a - 1, b - 1] = d2[b - 1, a - 1] = self.d(a, b) ** 2
        return d2

    def __eq__(self, other):
        if not isinstance(other, DMDGPInstance):
            return NotImplemented
        return (self.n, self.K, self.edges) == (other.n, other.K, other.edges)

    def __hash__(self):
        return hash((self.n, self.K, len(self.edges)))


@dataclass(frozen=True)
class EdgePartition:
    discretization: frozenset
    pruning: frozenset


def classify_edges(instance: DMDGPInstance) -> EdgePartition:
    """Split edges by |i - j| <= K (discretization) versus > K (pruning)."""
    k = instance.K
    disc = frozenset(e for e in instance.edges if e[1] - e[0] <= k)
    prun = frozenset(e for e in instance.edges if e[1] - e[0] > k)
    return EdgePartition(disc, prun)


@dataclass
class ValidationReport:
    missing_edges: list = field(default_factory=list)
    triangle_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing_edges and not self.triangle_violations

    def summary(self) -> str:
        if self.ok:
            return "valid"
        parts = []
        if self.missing_edges:
            parts.append(f"missing discretization edges: {self.missing_edges[:10]}")
        if self.triangle_violations:
            parts.append(f"triangle inequality violations: {self.triangle_violations[:10]}")
        return "; ".join(parts)


def validate_dmdgp(instance: DMDGPInstance, rel_tol: float = 1e-12) -> ValidationReport:
    """Report missing discretization edges and triangle violations inside consecutive (K+1)-cliques."""
    n, k = instance.n, instance.K
    report = ValidationReport()
    for j in range(2, n + 1):
        for i in range(max(1, j - k), j):
            if (i, j) not in instance.edges:
                report.missing_edges.append((i, j))
    if report.missing_edges:
        return report
    seen = set()
    for start in range(1, n - k + 1):
        for a, b, c in combinations(range(start, start + k + 1), 3):
            if (a, b, c) in seen:
                continue
            seen.add((a, b, c))
            dab, dbc, dac = instance.d(a, b), instance.d(b, c), instance.d(a, c)
            longest = max(dab, dbc, dac)
            if 2.0 * longest > dab + dbc + dac + rel_tol * longest:
                report.triangle_violations.append((a, b, c))
    return report


def require_valid(instance: DMDGPInstance) -> None:
    report = validate_dmdgp(instance)
    if not report.ok:
        raise InstanceError(f"instance is not a DMDGP: {report.summary()}")


def order_pruning_edges(partition: EdgePartition | Iterable[Edge]) -> tuple[Edge, ...]:
    """Pruning edges sorted by increasing j, ties by decreasing i."""
    edges = partition.pruning if isinstance(partition, EdgePartition) else partition
    return tuple(sorted(edges, key=lambda e: (e[1], -e[0])))


def preceding_edges(order: tuple[Edge, ...], e: Edge) -> set[Edge]:
    """P^ij: every pruning edge strictly before ``e`` in ``order``."""
    e = _edge(*e)
    try:
        pos = order.index(e)
    except ValueError:
        raise ArgumentError(f"edge {e} is not in the pruning order") from None
    return set(order[:pos])


def symmetry_vertices(instance: DMDGPInstance) -> set[int]:
    """Vertices l >= K+1 not covered by any edge {i, j} with i + K < l <= j."""
    n, k = instance.n, instance.K
    cover = [0] * (n + 2)
    for i, j in instance.edges:
        if j > i + k:
            cover[i + k + 1] += 1
            cover[j + 1] -= 1
    out = set()
    running = 0
    for l in range(1, n + 1):
        running += cover[l]
        if l >= k + 1 and running == 0:
            out.add(l)
    return out


def local_symmetry_vertices(instance: DMDGPInstance, e: Edge, preceding: Iterable[Edge]) -> set[int]:
    """S^ij: l in i+K+1..j not covered by any {u, w} in ``preceding`` with u + K < l <= w."""
    i, j = _edge(*e)
    k = instance.K
    if j - i <= k:
        raise ArgumentError(f"{(i, j)} is not a pruning edge for K={k}")
    prev = list(preceding)
    return {l for l in range(i + k + 1, j + 1) if not any(u + k < l <= w for u, w in prev)}


def initial_clique(instance: DMDGPInstance) -> np.ndarray:
    """Canonical positions of vertices 1..K (see :func:`geometry.place_clique`)."""
    return place_clique(instance.clique_sq_dist)


def discretization_radii(instance: DMDGPInstance, i: int) -> list[float]:
    """Distances from v_i to v_{i-K}, ..., v_{i-1}, in that order."""
    k = instance.K
    try:
        return [instance.edges[(h, i)] for h in range(i - k, i)]
    except KeyError as exc:
        raise InstanceError(f"missing discretization edge {exc.args[0]} for vertex {i}") from None
