"""Which outages can affect which lines, and the influence graph among lines."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UnknownLine
from .lodf import ColumnKind, LodfMatrix
from .partition import CellDecomposition, TreePartition
from .validation import DEFAULT_TOL


class PairClass(str, enum.Enum):
    SAME_CELL = "SameCell"
    SAME_REGION_DIFF_CELL = "SameRegionDiffCell"
    DIFF_REGION = "DiffRegion"
    SOURCE_IS_BRIDGE = "SourceIsBridge"
    TARGET_ONLY_BRIDGE = "TargetOnlyBridge"
    DIAGONAL = "Diagonal"

    @property
    def predicted_zero(self) -> bool:
        return self in _ZERO

    @property
    def predicted_nonzero(self) -> bool:
        return self in (PairClass.SAME_CELL, PairClass.SOURCE_IS_BRIDGE)


_ZERO = frozenset({PairClass.SAME_REGION_DIFF_CELL, PairClass.DIFF_REGION,
                   PairClass.TARGET_ONLY_BRIDGE})


def classify_pair(tp: TreePartition, cd: CellDecomposition, e: int, ehat: int) -> PairClass:
    """Place the ordered pair (tripped ``e``, monitored ``ehat``) in its class.

    A tripped bridge reaches every line; a tripped non-bridge reaches only
    lines of its own cell (generically, i.e. for perturbed susceptances).
    """
    for line in (e, ehat):
        if line not in tp.bridges and line not in cd.cell_of:
            raise UnknownLine(f"unknown line {line}")
    if e == ehat:
        return PairClass.DIAGONAL
    if e in tp.bridges:
        return PairClass.SOURCE_IS_BRIDGE
    if ehat in tp.bridges:
        return PairClass.TARGET_ONLY_BRIDGE
    ce, cf = cd.cell_of[e], cd.cell_of[ehat]
    if ce == cf:
        return PairClass.SAME_CELL
    if cd.cell_region[ce] == cd.cell_region[cf]:
        return PairClass.SAME_REGION_DIFF_CELL
    return PairClass.DIFF_REGION


@dataclass(frozen=True)
class InfluenceGraph:
    """Undirected graph over lines; an edge means one outage moves the other line."""

    nodes: tuple
    edges: frozenset
    threshold: float
    includes_bridge_columns: bool = False
    labels: dict = field(default_factory=dict, compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "includes_bridge_columns": self.includes_bridge_columns,
            "nodes": [{"id": k, "label": self.labels.get(k, str(k))} for k in self.nodes],
            "edges": sorted([a, b] for a, b in self.edges),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_dot(self, name: str = "influence") -> str:
        lines = [f"graph {name} {{", f'  // threshold {self.threshold:g}']
        for k in self.nodes:
            lines.append(f'  {k} [label="{self.labels.get(k, k)}"];')
        for a, b in sorted(self.edges):
            lines.append(f"  {a} -- {b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def influence_graph(K: LodfMatrix, threshold: float = 0.005, net=None) -> InfluenceGraph:
    """Connect two lines when either factor between them reaches ``threshold``.

    Undefined entries (diagonal, bridge columns without context) never
    create edges. Pass ``net`` to label nodes ``"from-to"``.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    a = np.abs(np.nan_to_num(K.entries, nan=0.0))
    sym = np.maximum(a, a.T)
    iu, ju = np.nonzero(np.triu(sym >= threshold, k=1))
    ids = [int(k) for k in K.line_ids]
    edges = frozenset((min(ids[i], ids[j]), max(ids[i], ids[j])) for i, j in zip(iu, ju))
    labels = {}
    if net is not None:
        labels = {ln.id: f"{ln.source}-{ln.target}" for ln in net.lines}
    with_bridges = any(k == ColumnKind.BRIDGE_EXTENDED for k in K.kinds)
    return InfluenceGraph(tuple(ids), edges, float(threshold), with_bridges, labels)


def cross_region_edges(graph: InfluenceGraph, tp: TreePartition, net) -> list[tuple[int, int]]:
    """Influence edges joining non-bridge lines of different regions."""
    out = []
    for a, b in graph.edges:
        ra, rb = tp.region_of_line(net, a), tp.region_of_line(net, b)
        if ra is not None and rb is not None and ra != rb:
            out.append((a, b))
    return sorted(out)


@dataclass
class SparsityReport:
    """Per-class counts of ordered pairs and of entries at or above ``tol``."""

    pairs: dict
    nonzero: dict
    violations: list
    tol: float

    @property
    def consistent(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "pairs": {k.value: v for k, v in self.pairs.items()},
            "nonzero": {k.value: v for k, v in self.nonzero.items()},
            "violations": self.violations,
        }


def sparsity_report(K: LodfMatrix, tp: TreePartition, cd: CellDecomposition,
                    tol: float = DEFAULT_TOL) -> SparsityReport:
    """Check the block structure of ``K`` against the partition and cells.

    Only defined entries are counted. A violation is a pair predicted to be
    exactly zero whose factor reaches ``tol``.
    """
    pairs = {c: 0 for c in PairClass}
    nonzero = {c: 0 for c in PairClass}
    violations = []
    ids = [int(k) for k in K.line_ids]
    for j, e in enumerate(ids):
        col = K.entries[:, j]
        for i, f in enumerate(ids):
            cls = classify_pair(tp, cd, e, f)
            v = col[i]
            if np.isnan(v):
                continue
            pairs[cls] += 1
            if abs(v) >= tol:
                nonzero[cls] += 1
                if cls.predicted_zero:
                    violations.append((e, f, float(v)))
    return SparsityReport(pairs, nonzero, violations, tol)
