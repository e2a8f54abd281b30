"""Small reference networks and random generators.

Bus ids start at 1; line ids are 1..m in the order the edges are listed.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

import numpy as np

from .network import Bus, Line, Network


def from_edges(edges: Sequence[tuple[int, int]], *, b=None, p=None, gens=(), n=None,
               slack=None, name="") -> Network:
    """Build a network from ``(source, target)`` pairs.

    ``b`` is a scalar or per-line sequence of susceptances, ``p`` a mapping
    or sequence (aligned with sorted bus ids) of injections.
    """
    ids = sorted({v for e in edges for v in e} | set(range(1, (n or 0) + 1)))
    if b is None:
        b = [1.0] * len(edges)
    elif np.isscalar(b):
        b = [float(b)] * len(edges)
    if p is None:
        p = {}
    elif not isinstance(p, dict):
        p = dict(zip(ids, p))
    gens = set(gens)
    buses = [Bus(i, float(p.get(i, 0.0)), i in gens) for i in ids]
    lines = [Line(k, int(u), int(v), float(x)) for k, ((u, v), x) in enumerate(zip(edges, b), start=1)]
    return Network(buses, lines, slack, name=name)


def path(n: int, **kw) -> Network:
    return from_edges([(i, i + 1) for i in range(1, n)], name=kw.pop("name", f"path{n}"), **kw)


def cycle(n: int, **kw) -> Network:
    edges = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    return from_edges(edges, name=kw.pop("name", f"cycle{n}"), **kw)


def complete(n: int, **kw) -> Network:
    return from_edges(list(combinations(range(1, n + 1), 2)), name=kw.pop("name", f"K{n}"), **kw)


def triangle(**kw) -> Network:
    """Triangle oriented (1,2), (2,3), (1,3)."""
    return from_edges([(1, 2), (2, 3), (1, 3)], name=kw.pop("name", "triangle"), **kw)


# butterfly bus labels
BUTTERFLY_BUS = {"i": 1, "j": 2, "c": 3, "w": 4, "z": 5}


def butterfly(**kw) -> Network:
    """Two triangles {i, j, c} and {w, z, c} sharing the body vertex c.

    Line 1 is the wing (i, j), line 4 the wing (w, z).
    """
    i, j, c, w, z = (BUTTERFLY_BUS[k] for k in "ijcwz")
    edges = [(i, j), (i, c), (j, c), (w, z), (w, c), (z, c)]
    return from_edges(edges, name=kw.pop("name", "butterfly"), **kw)


def two_triangles(**kw) -> Network:
    """Triangles {1,2,3} and {4,5,6} joined by line 4 = (3, 4)."""
    edges = [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (5, 6), (4, 6)]
    return from_edges(edges, name=kw.pop("name", "two-triangles"), **kw)


def two_squares_sharing_vertex(**kw) -> Network:
    """Two 4-cycles sharing bus 1."""
    edges = [(1, 2), (2, 3), (3, 4), (4, 1), (1, 5), (5, 6), (6, 7), (7, 1)]
    return from_edges(edges, name=kw.pop("name", "two-squares"), **kw)


# double ring: two hexagons, generator and load at the ends of the lower tie
DOUBLE_RING_GEN = 4
DOUBLE_RING_LOAD = 11
DOUBLE_RING_UPPER_TIE = 13
DOUBLE_RING_LOWER_TIE = 14


def double_ring(transfer: float = 1.0) -> Network:
    """Two hexagonal rings joined by an upper and a lower tie-line.

    Left ring buses 1..6 (1 top-left, 2 top-right, 3 right, 4 bottom-right,
    5 bottom-left, 6 left), right ring 7..12 laid out the same way. The
    upper tie joins 2 and 7, the lower tie joins 4 and 11. The generator
    sits at 4 and the load at 11, so with the upper tie closed part of the
    transfer detours around both hexagons.
    """
    left = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1)]
    right = [(a + 6, b + 6) for a, b in left]
    edges = left + right + [(2, 7), (4, 11)]
    p = {DOUBLE_RING_GEN: transfer, DOUBLE_RING_LOAD: -transfer}
    return from_edges(edges, p=p, gens=[DOUBLE_RING_GEN], name="double-ring")


# -- random networks ---------------------------------------------------------


def random_connected(n: int, m: int, rng: np.random.Generator, *, b_range=(0.5, 5.0),
                     rational: bool = False) -> Network:
    """Random connected simple graph: random spanning tree plus extra lines.

    With ``rational=True`` susceptances are multiples of 1/100, which survive
    the oracle's rationalisation exactly.
    """
    m = min(max(m, n - 1), n * (n - 1) // 2)
    order = rng.permutation(n) + 1
    edges = set()
    for k in range(1, n):
        u, v = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((u, v))
    pool = [(u, v) for u, v in combinations(range(1, n + 1), 2)
            if (u, v) not in edges and (v, u) not in edges]
    extra = rng.choice(len(pool), size=m - len(edges), replace=False) if m > len(edges) else []
    edges = sorted(edges) + [pool[k] for k in sorted(extra)]
    edges = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in edges]
    if rational:
        lo, hi = (int(round(x * 100)) for x in b_range)
        b = rng.integers(lo, hi + 1, size=len(edges)) / 100
    else:
        b = rng.uniform(*b_range, size=len(edges))
    return from_edges(edges, b=b, n=n, name=f"random-{n}-{len(edges)}")


def random_balanced_injection(net: Network, rng: np.random.Generator) -> np.ndarray:
    p = rng.normal(size=net.n)
    return p - p.mean()


def _random_block(size: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Edges of a random 2-connected graph on vertices 0..size-1 (size >= 3)."""
    edges = {(k, (k + 1) % size) for k in range(size)}
    for u, v in combinations(range(size), 2):
        if (u, v) not in edges and (v, u) not in edges and rng.random() < 0.35:
            edges.add((u, v))
    return sorted(edges)


def random_multiregion(rng: np.random.Generator, *, regions: int = 2, max_buses: int = 14,
                       b_range=(0.5, 5.0)) -> Network:
    """Random network with ``regions`` tree-partition regions.

    Each region is a chain of random 2-connected blocks glued at cut
    vertices; regions are joined by single bridges to form a tree.
    """
    edges: list[tuple[int, int]] = []
    region_buses: list[list[int]] = []
    next_id = 1
    budget = max_buses
    for r in range(regions):
        remaining = regions - r - 1
        room = budget - 3 * remaining
        size = int(rng.integers(3, max(4, min(room, 8)) + 1))
        size = min(size, room)
        buses = list(range(next_id, next_id + size))
        next_id += size
        budget -= size
        # split the region into one or two blocks sharing a cut vertex
        if size >= 5 and rng.random() < 0.6:
            k = int(rng.integers(3, size - 1))
            first, second = buses[:k], [buses[k - 1]] + buses[k:]
            blocks = [first, second] if len(second) >= 3 else [buses]
        else:
            blocks = [buses]
        if sum(len(bl) for bl in blocks) - (len(blocks) - 1) != size:
            blocks = [buses]
        for bl in blocks:
            for u, v in _random_block(len(bl), rng):
                edges.append((bl[u], bl[v]))
        region_buses.append(buses)
    for r in range(1, regions):
        a = int(rng.choice(region_buses[int(rng.integers(0, r))]))
        c = int(rng.choice(region_buses[r]))
        edges.append((a, c))
    edges = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in edges]
    b = rng.uniform(*b_range, size=len(edges))
    return from_edges(edges, b=b, name=f"multiregion-{regions}")
