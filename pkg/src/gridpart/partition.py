"""Bridges, the irreducible tree partition and the cell (block) decomposition.

All graph traversals are iterative so that networks with thousands of buses
do not hit the interpreter recursion limit.
"""

from __future__ import annotations

from array import array
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .network import Network


@dataclass(frozen=True)
class TreePartition:
    """Regions of a tree partition and the lines joining them.

    Regions are ordered by their smallest bus id.
    """

    regions: tuple[frozenset, ...]
    bridges: frozenset
    region_of: dict = field(compare=False, repr=False)

    @property
    def k(self) -> int:
        return len(self.regions)

    def region_of_line(self, net: Network, line_id: int) -> int | None:
        """Region holding a line, or None when the line is a bridge."""
        if line_id in self.bridges:
            return None
        return self.region_of[net.line(line_id).source]

    def to_dict(self) -> dict:
        return {
            "regions": [sorted(r) for r in self.regions],
            "bridges": sorted(self.bridges),
        }


@dataclass(frozen=True)
class CellDecomposition:
    """Blocks of every region, as sets of line ids, plus cut vertices.

    ``cells`` are ordered by smallest line id. ``cell_region[c]`` is the
    region that holds cell ``c``. ``cut_vertices`` are articulation points of
    the whole network that touch at least one cell; singleton regions own no
    cells and so contribute none.
    """

    cells: tuple[frozenset, ...]
    cell_region: tuple[int, ...]
    cut_vertices: frozenset
    cut_vertices_by_region: dict = field(compare=False, repr=False)
    cell_of: dict = field(compare=False, repr=False)

    def cells_in_region(self, region: int) -> list[int]:
        return [c for c, r in enumerate(self.cell_region) if r == region]

    def cell_buses(self, net: Network, cell: int) -> set[int]:
        out = set()
        for lid in self.cells[cell]:
            out.update(net.line(lid).endpoints)
        return out

    def to_dict(self) -> dict:
        return {
            "cells": [sorted(c) for c in self.cells],
            "cut_vertices": sorted(self.cut_vertices),
        }


@dataclass(frozen=True)
class PartitionOrderResult:
    finer: bool
    witness: dict | None = None


def _csr(net: Network):
    """Flat adjacency: neighbours of vertex ``v`` are ``nbr[start[v]:start[v+1]]``.

    Packed machine-int arrays rather than lists of boxed ints keep the
    working set small, so traversal cost stays flat as networks grow;
    ``eid`` holds the matching line indices.
    """
    ends = np.concatenate([net.src_idx, net.dst_idx])
    other = np.concatenate([net.dst_idx, net.src_idx])
    lines = np.concatenate([np.arange(net.m), np.arange(net.m)])
    order = np.argsort(ends, kind="stable")
    start = np.zeros(net.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ends, minlength=net.n), out=start[1:])
    return (array("q", start.tobytes()), array("q", other[order].astype(np.int64).tobytes()),
            array("q", lines[order].astype(np.int64).tobytes()))


def _lowlink(net: Network, want_blocks: bool):
    """Single iterative DFS computing bridges, and optionally blocks and
    articulation points.

    Returns ``(bridges, blocks, articulation)`` with line and bus *indices*.
    """
    n = net.n
    start, nbr, eid = _csr(net)
    pos = start[:-1]
    disc = array("q", [-1]) * n
    low = array("q", [0]) * n
    via = array("q", [-1]) * n  # line used to enter each vertex
    bridges: list[int] = []
    blocks: list[list[int]] = []
    artic: set[int] = set()
    edge_stack: list[int] = []
    t = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        root_children = 0
        stack = [root]
        while stack:
            v = stack[-1]
            i, end = pos[v], start[v + 1]
            pe = via[v]
            descended = False
            while i < end:
                w, k = nbr[i], eid[i]
                i += 1
                if k == pe:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = t
                    t += 1
                    via[w] = k
                    if want_blocks:
                        edge_stack.append(k)
                    stack.append(w)
                    descended = True
                    break
                if disc[w] < disc[v]:
                    if want_blocks:
                        edge_stack.append(k)
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            pos[v] = i
            if descended:
                continue
            stack.pop()
            if not stack:
                continue
            u = stack[-1]
            if low[v] < low[u]:
                low[u] = low[v]
            if low[v] > disc[u]:
                bridges.append(pe)
            if want_blocks and low[v] >= disc[u]:
                if u == root:
                    root_children += 1
                else:
                    artic.add(u)
                block = []
                while True:
                    k = edge_stack.pop()
                    block.append(k)
                    if k == pe:
                        break
                blocks.append(block)
        if root_children > 1:
            artic.add(root)
    return bridges, blocks, artic


def find_bridges(net: Network) -> frozenset:
    """Line ids whose removal disconnects the network (Tarjan low-link, O(n+m))."""
    bridges, _, _ = _lowlink(net, want_blocks=False)
    return frozenset(int(net.line_ids[k]) for k in bridges)


def _bfs_components(net: Network, skip_lines: set[int]) -> list[int]:
    start, nbr, eid = _csr(net)
    blocked = bytearray(net.m)
    for k in skip_lines:
        blocked[k] = 1
    label = array("q", [-1]) * net.n
    c = 0
    for s in range(net.n):
        if label[s] != -1:
            continue
        label[s] = c
        q = deque([s])
        while q:
            v = q.popleft()
            for i in range(start[v], start[v + 1]):
                w = nbr[i]
                if label[w] == -1 and not blocked[eid[i]]:
                    label[w] = c
                    q.append(w)
        c += 1
    return label


def _ordered_partition(net: Network, label: Sequence[int], bridges: frozenset) -> TreePartition:
    groups: dict[int, set[int]] = {}
    for k, lab in enumerate(label):
        groups.setdefault(lab, set()).add(int(net.bus_ids[k]))
    regions = tuple(sorted((frozenset(g) for g in groups.values()), key=min))
    region_of = {b: r for r, reg in enumerate(regions) for b in reg}
    return TreePartition(regions, bridges, region_of)


def irreducible_tree_partition(net: Network, bridges: Iterable[int] | None = None) -> TreePartition:
    """Unique finest tree partition: components left after deleting all bridges.

    Bridges come from Tarjan's algorithm; components are labelled by
    breadth-first search over the remaining lines.
    """
    bridges = find_bridges(net) if bridges is None else frozenset(bridges)
    skip = {net.line_index[b] for b in bridges}
    label = _bfs_components(net, skip)
    return _ordered_partition(net, label, bridges)


def cell_decomposition(net: Network, tp: TreePartition | None = None) -> CellDecomposition:
    """Block decomposition of every tree-partition region, in O(n+m)."""
    if tp is None:
        tp = irreducible_tree_partition(net)
    _, blocks, artic = _lowlink(net, want_blocks=True)
    line_ids = net.line_ids.tolist()
    bus_ids = net.bus_ids.tolist()
    src = net.src_idx.tolist()
    dst = net.dst_idx.tolist()
    cells, cell_idx = [], []
    for block in blocks:
        if len(block) == 1 and line_ids[block[0]] in tp.bridges:
            continue
        cells.append(frozenset(line_ids[k] for k in block))
        cell_idx.append(block)
    order = sorted(range(len(cells)), key=lambda c: min(cells[c]))
    cells = [cells[c] for c in order]
    cell_idx = [cell_idx[c] for c in order]
    cell_of = {lid: c for c, cell in enumerate(cells) for lid in cell}
    cell_region = tuple(tp.region_of[bus_ids[src[block[0]]]] for block in cell_idx)

    in_cell = [False] * net.n
    for block in cell_idx:
        for k in block:
            in_cell[src[k]] = in_cell[dst[k]] = True
    cut = frozenset(bus_ids[v] for v in artic if in_cell[v])
    grouped: dict[int, set[int]] = {r: set() for r in range(tp.k)}
    for v in cut:
        grouped[tp.region_of[v]].add(v)
    by_region = {r: frozenset(vs) for r, vs in grouped.items()}
    return CellDecomposition(tuple(cells), cell_region, cut, by_region, cell_of)


def _as_regions(p) -> list[frozenset]:
    if isinstance(p, TreePartition):
        return list(p.regions)
    return [frozenset(r) for r in p]


def is_finer(p1, p2) -> PartitionOrderResult:
    """Whether every region of ``p1`` lies inside some region of ``p2``.

    Both arguments may be TreePartition objects or plain iterables of bus
    sets covering the same buses. The witness maps region indices of ``p1``
    to the containing region index of ``p2``.
    """
    r1, r2 = _as_regions(p1), _as_regions(p2)
    if set().union(*r1) != set().union(*r2):
        raise ValueError("partitions cover different bus sets")
    owner = {b: j for j, reg in enumerate(r2) for b in reg}
    witness = {}
    for i, reg in enumerate(r1):
        targets = {owner[b] for b in reg}
        if len(targets) != 1:
            return PartitionOrderResult(False, None)
        witness[i] = targets.pop()
    return PartitionOrderResult(True, witness)


def is_tree_partition(net: Network, regions) -> bool:
    """Whether the reduced multigraph of ``regions`` is a tree.

    The reduced graph is connected because the network is, so it is a tree
    exactly when it has one edge fewer than it has regions.
    """
    regions = _as_regions(regions)
    owner = {b: j for j, reg in enumerate(regions) for b in reg}
    if len(owner) != net.n or sum(len(r) for r in regions) != net.n:
        return False
    crossing = sum(1 for ln in net.lines if owner[ln.source] != owner[ln.target])
    return crossing == len(regions) - 1
