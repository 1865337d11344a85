"""Union-find partition of vertices K+1..n with per-component minimum index.

Every merge unites the components meeting a contiguous vertex range, so
components stay contiguous intervals. Roots therefore also track the last
index, which lets :meth:`ComponentPartition.components_between` hop from one
component to the next instead of visiting every vertex.
"""
from __future__ import annotations

from .errors import ArgumentError


class ComponentPartition:
    """Disjoint sets over vertices ``K+1..n``, initially singletons."""

    def __init__(self, n: int, K: int):
        if n <= K:
            raise ArgumentError(f"need n > K, got n={n}, K={K}")
        self.n = n
        self.K = K
        self._parent = list(range(n + 1))
        self._size = [1] * (n + 1)
        self._first = list(range(n + 1))
        self._last = list(range(n + 1))
        self.count = n - K

    def _check(self, v: int) -> None:
        if not (self.K < v <= self.n):
            raise ArgumentError(f"vertex {v} outside {self.K + 1}..{self.n}")

    def find(self, v: int) -> int:
        """Root id of the component holding ``v`` (path halving)."""
        self._check(v)
        parent = self._parent
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def _check_root(self, cid: int) -> None:
        if not (self.K < cid <= self.n) or self._parent[cid] != cid:
            raise ArgumentError(f"{cid} is not a component id")

    def first(self, cid: int) -> int:
        """Smallest vertex index in component ``cid``."""
        self._check_root(cid)
        return self._first[cid]

    def last(self, cid: int) -> int:
        self._check_root(cid)
        return self._last[cid]

    def members(self, cid: int) -> range:
        self._check_root(cid)
        return range(self._first[cid], self._last[cid] + 1)

    def components_between(self, a: int, b: int) -> list[int]:
        """Ids of the components meeting ``a..b``, in vertex order."""
        roots = []
        v = a
        while v <= b:
            r = self.find(v)
            roots.append(r)
            v = self._last[r] + 1
        return roots

    def intervals_between(self, a: int, b: int) -> tuple[list[int], list[int]]:
        """Roots of the components meeting ``a..b`` and their first vertices, in vertex order."""
        self._check(a)
        parent, last, first = self._parent, self._last, self._first
        roots, firsts = [], []
        v = a
        while v <= b:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            roots.append(v)
            firsts.append(first[v])
            v = last[v] + 1
        return roots, firsts

    def unite(self, roots: list[int]) -> int:
        """Merge the given component roots (as returned by :meth:`intervals_between`)."""
        root = roots[0]
        for r in roots[1:]:
            root = self._union(root, r)
        return root

    def _union(self, a: int, b: int) -> int:
        if a == b:
            return a
        if self._size[a] < self._size[b]:
            a, b = b, a
        self._parent[b] = a
        self._size[a] += self._size[b]
        self._first[a] = min(self._first[a], self._first[b])
        self._last[a] = max(self._last[a], self._last[b])
        self.count -= 1
        return a

    def merge(self, edge: tuple[int, int]) -> int:
        """Unite every component meeting ``i+K..j`` for ``edge = (i, j)``; returns the new root."""
        i, j = edge
        lo = max(i + self.K, self.K + 1)
        return self.unite(self.components_between(lo, j))

    def classes(self) -> list[list[int]]:
        """All components as sorted vertex lists (for inspection and tests)."""
        out: dict[int, list[int]] = {}
        for v in range(self.K + 1, self.n + 1):
            out.setdefault(self.find(v), []).append(v)
        return sorted(out.values())
