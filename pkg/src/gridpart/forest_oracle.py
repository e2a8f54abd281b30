"""Exact spanning-tree / spanning-2-forest enumeration.

Ground truth for the matrix route at desk scale: the outage factor equals
``B_f * (w(T({i,w},{j,z})) - w(T({i,z},{j,w}))) / w(trees of G - e)`` for
``e = (i, j)`` and ``f = (w, z)``, where ``w`` sums the product of
susceptances over each forest. Everything here is exact ``Fraction``
arithmetic; nothing is shared with the numeric solver.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable

from . import _exact
from .exceptions import DisconnectsGraph, TooLarge
from .network import Network

MAX_BUSES = 10
MAX_LINES = 20


def _guard(n: int, m: int):
    if n > MAX_BUSES or m > MAX_LINES:
        raise TooLarge(f"enumeration limited to n <= {MAX_BUSES}, m <= {MAX_LINES} (got {n}, {m})")


def _forest_labels(n: int, edges) -> list[int] | None:
    """Root label per vertex if ``edges`` is acyclic, else None."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return None
        parent[ru] = rv
    return [find(a) for a in range(n)]


def _weight(ks, b) -> Fraction:
    w = Fraction(1)
    for k in ks:
        w *= b[k]
    return w


class ForestOracle:
    """Enumerates every spanning tree and 2-forest of a network once.

    Two-forests are aggregated by the bus bipartition they induce, so each
    factor query costs at most ``2**(n-1)`` set tests.
    """

    def __init__(self, net: Network):
        _guard(net.n, net.m)
        self.net = net
        self.n = net.n
        self.b = [_exact.to_fraction(ln.susceptance) for ln in net.lines]
        self.edges = list(zip(net.src_idx.tolist(), net.dst_idx.tolist()))
        full = (1 << self.n) - 1
        self._full = full

        # bipartition mask (side holding bus index 0) -> total weight
        self._two: dict[int, Fraction] = {}
        if self.n >= 2:
            for ks in combinations(range(net.m), self.n - 2):
                labels = _forest_labels(self.n, (self.edges[k] for k in ks))
                if labels is None:
                    continue
                mask = sum(1 << v for v in range(self.n) if labels[v] == labels[0])
                self._two[mask] = self._two.get(mask, Fraction(0)) + _weight(ks, self.b)

        self.tree_total = Fraction(0)
        self._with_edge = [Fraction(0)] * net.m
        for ks in combinations(range(net.m), self.n - 1):
            if _forest_labels(self.n, (self.edges[k] for k in ks)) is None:
                continue
            w = _weight(ks, self.b)
            self.tree_total += w
            for k in ks:
                self._with_edge[k] += w

    def _mask(self, buses: Iterable[int]) -> int:
        mask = 0
        for v in buses:
            mask |= 1 << self.net.bus_index[v]
        return mask

    def _matching(self, g1: int, g2: int) -> set[int]:
        if g1 & g2:
            return set()
        out = set()
        for mask in self._two:
            other = self._full & ~mask
            if (g1 & ~mask == 0 and g2 & ~other == 0) or (g1 & ~other == 0 and g2 & ~mask == 0):
                out.add(mask)
        return out

    def two_forest_weight(self, group1, group2) -> Fraction:
        return sum((self._two[k] for k in self._matching(self._mask(group1), self._mask(group2))),
                   Fraction(0))

    def tree_weight_without(self, e: int) -> Fraction:
        return self.tree_total - self._with_edge[self.net.line_index[e]]

    def lodf(self, e: int, ehat: int) -> Fraction:
        if e == ehat:
            raise ValueError("the factor is undefined on the diagonal")
        denom = self.tree_weight_without(e)
        if denom == 0:
            raise DisconnectsGraph(f"removing line {e} disconnects the network")
        i, j = self.net.line(e).endpoints
        w, z = self.net.line(ehat).endpoints
        pos = self._matching(self._mask((i, w)), self._mask((j, z)))
        neg = self._matching(self._mask((i, z)), self._mask((j, w)))
        if pos & neg:
            raise AssertionError("a 2-forest was counted in both families")
        num = sum((self._two[k] for k in pos), Fraction(0)) - sum(
            (self._two[k] for k in neg), Fraction(0))
        return self.b[self.net.line_index[ehat]] * num / denom


def spanning_tree_weight(net: Network, allowed: Iterable[int] | None = None) -> Fraction:
    """Sum over spanning trees using only ``allowed`` lines of the susceptance product.

    Returns 0 when the allowed lines do not span the network. The enumerated
    value is cross-checked against the Matrix-Tree determinant.
    """
    allowed = list(net.line_ids.tolist() if allowed is None else allowed)
    _guard(net.n, len(allowed))
    idx = [net.line_index[k] for k in allowed]
    b = {k: _exact.to_fraction(net.lines[k].susceptance) for k in idx}
    edges = {k: (int(net.src_idx[k]), int(net.dst_idx[k])) for k in idx}
    total = Fraction(0)
    for ks in combinations(idx, net.n - 1):
        if _forest_labels(net.n, (edges[k] for k in ks)) is not None:
            total += _weight(ks, b)
    lap = _exact.laplacian(net.n, [edges[k] for k in idx], [b[k] for k in idx])
    cofactor = _exact.det([row[1:] for row in lap[1:]])
    if cofactor != total:
        raise AssertionError(f"enumeration {total} disagrees with Matrix-Tree {cofactor}")
    return total


def two_forest_weight(net: Network, group1, group2) -> Fraction:
    """Weight of spanning 2-forests separating ``group1`` from ``group2``."""
    if set(group1) & set(group2):
        return Fraction(0)
    return ForestOracle(net).two_forest_weight(group1, group2)


def lodf_forest(net: Network, e: int, ehat: int) -> Fraction:
    """Exact outage factor from tripping ``e`` to ``ehat`` via forest sums."""
    return ForestOracle(net).lodf(e, ehat)
