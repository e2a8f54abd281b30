"""Evaluate switching lines off to create more, smaller tree-partition regions."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .balance import BalanceRule, check_island_free
from .exceptions import ValidationError, ValidationKind, WouldDisconnect
from .flow import solve_dc
from .localize import cross_region_edges, influence_graph
from .lodf import lodf_matrix
from .network import Network, component_labels
from .partition import cell_decomposition, find_bridges, irreducible_tree_partition
from .validation import DEFAULT_TOL, check_injections


@dataclass
class PartitionSummary:
    n_regions: int
    region_sizes: list
    bridges: list
    n_cells: int
    cut_vertices: list

    @classmethod
    def of(cls, tp, cd) -> "PartitionSummary":
        return cls(tp.k, [len(r) for r in tp.regions], sorted(tp.bridges), len(cd.cells),
                   sorted(cd.cut_vertices))


@dataclass
class SwitchEvaluation:
    """Before/after comparison for one switching action.

    ``flow_changes`` is ``(P' - P) / |P|`` in the line's own orientation;
    ``congestion_changes`` is ``(|P'| - |P|) / |P|`` and drives the
    increased/decreased fractions and the CDF. Both are defined for lines
    alive in both topologies with ``|P| > tol``; the rest are listed in
    ``undefined_normalization``.
    """

    switched_off: list
    partition_before: PartitionSummary
    partition_after: PartitionSummary
    influence_density_before: int
    influence_density_after: int
    cross_region_edges_after: int
    flow_before: dict
    flow_after: dict
    flow_changes: dict
    congestion_changes: dict
    undefined_normalization: list
    fraction_increased: float
    fraction_decreased: float
    fraction_unchanged: float
    cdf_points: list
    island_free_before: bool
    island_free_after: bool
    total_abs_flow_before: float
    total_abs_flow_after: float
    threshold: float
    graphs: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "graphs"}
        out["partition_before"] = self.partition_before.__dict__
        out["partition_after"] = self.partition_after.__dict__
        for key in ("flow_before", "flow_after", "flow_changes", "congestion_changes"):
            out[key] = {str(k): v for k, v in out[key].items()}
        return out

    def csv_rows(self):
        yield ("line_id", "flow_before", "flow_after", "flow_change", "congestion_change")
        for lid, before in self.flow_before.items():
            after = self.flow_after.get(lid)
            yield (lid, before, "" if after is None else after,
                   self.flow_changes.get(lid, ""), self.congestion_changes.get(lid, ""))


def _cdf(values: list[float]) -> list[tuple[float, float]]:
    if not values:
        return []
    vals = np.sort(np.asarray(values))
    top = math.ceil(vals[-1] * 100 - 1e-9) / 100
    grid = np.round(np.arange(0.0, top + 0.005, 0.01), 2)
    frac = np.searchsorted(vals, grid + 1e-12, side="right") / len(vals)
    return [(float(x), float(f)) for x, f in zip(grid, frac)]


def _influence(net: Network, vec, rule, threshold, tol):
    tp = irreducible_tree_partition(net)
    cd = cell_decomposition(net, tp)
    island_free, _ = check_island_free(net, vec, tol=tol, bridges=tp.bridges)
    use_rule = rule if (rule is not None and island_free) else None
    K = lodf_matrix(net, vec, use_rule, tol=tol, bridges=tp.bridges, on_bridge_error="skip")
    return tp, cd, island_free, K, influence_graph(K, threshold, net)


def evaluate_switch(net: Network, p=None, off=(), rule: BalanceRule | None = None,
                    threshold: float = 0.005, *, tol: float = DEFAULT_TOL) -> SwitchEvaluation:
    """Compare flows, partitions and influence graphs before and after ``off``.

    Bridge columns enter the influence graphs only when ``rule`` is given
    and the injection is island-free on that topology.
    """
    vec = check_injections(net, p, balanced=True, tol=tol)
    off = sorted(set(off))
    try:
        after = net.without_lines(off)
    except ValidationError as exc:
        if exc.kind == ValidationKind.DISCONNECTED:
            raise WouldDisconnect(f"switching off {off} disconnects the network") from exc
        raise

    f0 = solve_dc(net, vec, tol=tol).branch_flow
    f1 = solve_dc(after, vec, tol=tol).branch_flow
    tp0, cd0, if0, K0, g0 = _influence(net, vec, rule, threshold, tol)
    tp1, cd1, if1, K1, g1 = _influence(after, vec, rule, threshold, tol)

    changes, congestion, undefined = {}, {}, []
    for lid, p0 in f0.items():
        if lid not in f1:
            continue
        if abs(p0) <= tol:
            undefined.append(lid)
            continue
        changes[lid] = (f1[lid] - p0) / abs(p0)
        congestion[lid] = (abs(f1[lid]) - abs(p0)) / abs(p0)
    vals = list(congestion.values())
    inc = sum(1 for v in vals if v > tol)
    dec = sum(1 for v in vals if v < -tol)
    total = len(vals) or 1
    return SwitchEvaluation(
        switched_off=off,
        partition_before=PartitionSummary.of(tp0, cd0),
        partition_after=PartitionSummary.of(tp1, cd1),
        influence_density_before=g0.n_edges,
        influence_density_after=g1.n_edges,
        cross_region_edges_after=len(cross_region_edges(g1, tp1, after)),
        flow_before=f0,
        flow_after=f1,
        flow_changes=changes,
        congestion_changes=congestion,
        undefined_normalization=undefined,
        fraction_increased=inc / total if vals else 0.0,
        fraction_decreased=dec / total if vals else 0.0,
        fraction_unchanged=(len(vals) - inc - dec) / total if vals else 1.0,
        cdf_points=_cdf([v for v in vals if v > tol]),
        island_free_before=if0,
        island_free_after=if1,
        total_abs_flow_before=float(sum(abs(v) for v in f0.values())),
        total_abs_flow_after=float(sum(abs(v) for v in f1.values())),
        threshold=threshold,
        graphs={"before": g0, "after": g1, "tp_after": tp1, "cd_after": cd1, "net_after": after},
    )


# -- search for bridging cuts -----------------------------------------------


@dataclass(frozen=True)
class BridgingCut:
    lines: tuple
    region_sizes: tuple
    balance: float

    @property
    def n_regions(self) -> int:
        return len(self.region_sizes)


def cycle_space_labels(net: Network, rng: np.random.Generator, bits: int = 128) -> list[int]:
    """Random cycle-space labels per line.

    A line set is an edge cut (or disjoint union of cuts) iff its labels
    XOR to zero, with one-sided error probability about ``2**-bits`` per
    test: a real cut always XORs to zero. Bridges get label 0.
    """
    n = net.n
    adj = net.adjacency
    parent_edge = [-1] * n
    order = []
    seen = [False] * n
    seen[0] = True
    q = deque([0])
    while q:
        v = q.popleft()
        order.append(v)
        for w, k in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent_edge[w] = k
                q.append(w)
    tree = set(k for k in parent_edge if k >= 0)
    labels = [0] * net.m
    acc = [0] * n
    for k in range(net.m):
        if k in tree:
            continue
        r = int.from_bytes(rng.bytes(bits // 8), "little")
        labels[k] = r
        acc[int(net.src_idx[k])] ^= r
        acc[int(net.dst_idx[k])] ^= r
    for v in reversed(order[1:]):
        k = parent_edge[v]
        labels[k] = acc[v]
        u = int(net.src_idx[k]) if int(net.dst_idx[k]) == v else int(net.dst_idx[k])
        acc[u] ^= acc[v]
    return labels


def _connected(net: Network, keep: np.ndarray) -> tuple[int, np.ndarray]:
    return component_labels(net.n, net.src_idx[keep], net.dst_idx[keep])


def _confirm(net: Network, S, candidates) -> tuple[int, ...] | None:
    """Region sizes after removing line indices ``S``, or None if disconnected.

    ``candidates`` must contain every line that may have become a bridge;
    each one is checked by an explicit connectivity test, so false
    positives from the label screen are discarded here.
    """
    keep = np.ones(net.m, dtype=bool)
    keep[list(S)] = False
    ncomp, _ = _connected(net, keep)
    if ncomp != 1:
        return None
    bridges = []
    for g in candidates:
        keep[g] = False
        if _connected(net, keep)[0] > 1:
            bridges.append(g)
        keep[g] = True
    keep[bridges] = False
    ncomp, labels = _connected(net, keep)
    return tuple(sorted(np.bincount(labels, minlength=ncomp).tolist(), reverse=True))


def enumerate_bridging_cuts(net: Network, k_max: int = 3, *, minimal: bool = True,
                            seed: int = 0, limit: int | None = None) -> list[BridgingCut]:
    """Line sets of size <= ``k_max`` whose removal keeps the network
    connected and increases the number of tree-partition regions.

    With ``minimal=True`` (default) a set is reported only if none of its
    proper subsets already qualifies; ``minimal=False`` lists every
    qualifying set, which grows quickly on networks with many 2-line cuts.

    Candidates are screened with cycle-space labels: removing ``S`` turns
    ``g`` into a bridge only if ``label(g)`` lies in the span of the labels
    of ``S``. The screen never misses a real bridge; a spurious match has
    probability about ``2**-128`` per test. Every reported set is confirmed
    by explicit connectivity tests.
    Sorted by balance (second-largest over largest region, descending).
    """
    if not 1 <= k_max <= 3:
        raise ValueError("k_max must be between 1 and 3")
    rng = np.random.default_rng(seed)
    labels = cycle_space_labels(net, rng)
    by_label: dict[int, list[int]] = {}
    for k, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(k)
    old_bridges = set(by_label.get(0, ()))
    base_k = len(old_bridges) + 1
    live = [k for k in range(net.m) if labels[k] != 0]
    found: dict[frozenset, BridgingCut] = {}

    def consider(S: tuple[int, ...], span: list[int]):
        if minimal and any(frozenset(sub) in found
                           for r in range(1, len(S)) for sub in combinations(S, r)):
            return
        cands = {g for c in span if c for g in by_label.get(c, ()) if g not in S}
        if not cands and 0 not in span:
            return
        sizes = _confirm(net, S, cands | old_bridges)
        if sizes is None or len(sizes) <= base_k:
            return
        balance = sizes[1] / sizes[0] if len(sizes) > 1 else 0.0
        ids = tuple(sorted(int(net.line_ids[k]) for k in S))
        found[frozenset(S)] = BridgingCut(ids, sizes, balance)

    for a in live:
        consider((a,), [labels[a]])
    if k_max >= 2:
        for a, b in combinations(live, 2):
            la, lb = labels[a], labels[b]
            consider((a, b), [la, lb, la ^ lb])
    if k_max >= 3:
        for a_pos, a in enumerate(live):
            if minimal and frozenset((a,)) in found:
                continue
            la = labels[a]
            for b_pos in range(a_pos + 1, len(live)):
                b = live[b_pos]
                if minimal and (frozenset((b,)) in found or frozenset((a, b)) in found):
                    continue
                lb = labels[b]
                lab = la ^ lb
                for c in live[b_pos + 1:]:
                    lc = labels[c]
                    x = lab ^ lc
                    # a minimal triple can only create bridges labelled x
                    if minimal and x not in by_label:
                        continue
                    consider((a, b, c), [la, lb, lc, lab, la ^ lc, lb ^ lc, x])

    out = sorted(found.values(), key=lambda cut: (-cut.balance, cut.lines))
    return out if limit is None else out[:limit]
