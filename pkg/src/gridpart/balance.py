"""Linear power balance rules, island-free injections and participating grids."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .exceptions import NoGenerators, NoParticipatingBusInComponent, ParseError
from .network import Network
from .partition import CellDecomposition, TreePartition, find_bridges
from .validation import DEFAULT_TOL


@dataclass(frozen=True)
class BalanceRule:
    """Participating buses and their positive weights (summing to one)."""

    weights: Mapping[int, float]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        w = {int(k): float(v) for k, v in self.weights.items()}
        if not w:
            raise ValueError("a balance rule needs at least one participant")
        if any(not v > 0 for v in w.values()):
            raise ValueError("balance weights must be positive")
        total = sum(w.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"balance weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @property
    def participants(self) -> frozenset:
        return frozenset(self.weights)

    @classmethod
    def normalized(cls, weights: Mapping[int, float], name: str = "custom") -> "BalanceRule":
        total = float(sum(weights.values()))
        if not total > 0:
            raise ValueError("weights must have a positive sum")
        return cls({k: v / total for k, v in weights.items()}, name=name)

    @classmethod
    def uniform(cls, buses: Iterable[int], name: str = "uniform") -> "BalanceRule":
        buses = sorted(set(buses))
        if not buses:
            raise ValueError("no participating buses")
        return cls({b: 1.0 / len(buses) for b in buses}, name=name)


def uniform_generator_rule(net: Network) -> BalanceRule:
    """Imbalance shared equally by all generator buses."""
    gens = net.generators
    if not gens:
        raise NoGenerators("network has no generator buses")
    return BalanceRule.uniform(gens, name="uniform-gen")


def load_weights(path) -> BalanceRule:
    """Read a ``bus_id,alpha`` CSV (header optional) and normalise the weights."""
    weights: dict[int, float] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                weights[int(row[0])] = float(row[1])
            except (ValueError, IndexError):
                if not weights:  # header line
                    continue
                raise ParseError(f"bad weights row {row!r}") from None
    return BalanceRule.normalized(weights, name=f"weights:{path}")


def apply_rule(rule: BalanceRule, component: Iterable[int], M: float) -> dict[int, float]:
    """Split an imbalance ``M`` over the rule's participants inside ``component``.

    Weights are renormalised over the participants present, so the
    adjustments always add up to ``M``.
    """
    inside = sorted(set(component) & rule.participants)
    if not inside:
        raise NoParticipatingBusInComponent(
            f"no participating bus among {len(set(component))} buses"
        )
    total = sum(rule.weights[j] for j in inside)
    adj = {j: rule.weights[j] / total * M for j in inside}
    # push the rounding residue onto the largest share
    j_max = max(inside, key=lambda j: rule.weights[j])
    adj[j_max] += M - sum(adj.values())
    return adj


def check_island_free(net: Network, p=None, *, tol: float = DEFAULT_TOL,
                      bridges=None) -> tuple[bool, list[int]]:
    """Whether every bridge carries non-zero flow; also lists the violators."""
    from .flow import solve_dc

    bridges = find_bridges(net) if bridges is None else bridges
    sol = solve_dc(net, p, tol=tol)
    bad = sorted(e for e in bridges if abs(sol.branch_flow[e]) < tol)
    return (not bad, bad)


@dataclass(frozen=True)
class ParticipationReport:
    participating: bool
    failing_cells: tuple[tuple[int, int], ...]


def check_participating(net: Network, tp: TreePartition, cd: CellDecomposition,
                        rule: BalanceRule) -> ParticipationReport:
    """Every cell must hold a participating bus that is not a cut vertex.

    ``failing_cells`` lists ``(region index, cell index)`` pairs.
    """
    failing = []
    for c, region in enumerate(cd.cell_region):
        buses = cd.cell_buses(net, c)
        ok = any(j in rule.participants and j not in cd.cut_vertices for j in buses)
        if not ok:
            failing.append((region, c))
    return ParticipationReport(not failing, tuple(failing))
