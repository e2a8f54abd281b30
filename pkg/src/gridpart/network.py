"""Network data model, validation, native JSON I/O and dangling-bridge collapse."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import ParseError, UnknownLine, ValidationError, ValidationKind


@dataclass(frozen=True)
class Bus:
    id: int
    injection: float = 0.0
    is_generator: bool = False

    def __post_init__(self):
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "injection", float(self.injection))
        object.__setattr__(self, "is_generator", bool(self.is_generator))


@dataclass(frozen=True)
class Line:
    id: int
    source: int
    target: int
    susceptance: float = 1.0

    def __post_init__(self):
        for name in ("id", "source", "target"):
            object.__setattr__(self, name, int(getattr(self, name)))
        object.__setattr__(self, "susceptance", float(self.susceptance))

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.source, self.target)


@dataclass(frozen=True)
class Network:
    """Connected, simple, oriented transmission network.

    Instances are validated on construction and never mutated afterwards;
    derived index arrays are cached on first use.

    Parameters
    ----------
    buses : sequence of Bus
    lines : sequence of Line
        Orientation of each line is ``source -> target``.
    slack : int, optional
        Reference bus. Defaults to the lowest bus id.
    base_mva : float
        Informational only; injections are already per-unit.
    """

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    slack: int | None = None
    base_mva: float = 100.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.buses:
            raise ValidationError(ValidationKind.EMPTY, "network has no buses")
        if self.slack is None:
            object.__setattr__(self, "slack", min(b.id for b in self.buses))
        self._validate()

    def _validate(self):
        seen = set()
        for b in self.buses:
            if b.id in seen:
                raise ValidationError(ValidationKind.DUPLICATE_BUS_ID, f"bus {b.id}")
            seen.add(b.id)
        if self.slack not in seen:
            raise ValidationError(ValidationKind.NO_SLACK_BUS, f"slack {self.slack} is not a bus")
        line_ids = set()
        pairs = set()
        for ln in self.lines:
            if ln.id in line_ids:
                raise ValidationError(ValidationKind.DUPLICATE_LINE_ID, f"line {ln.id}")
            line_ids.add(ln.id)
            if ln.source not in seen or ln.target not in seen:
                raise ValidationError(ValidationKind.UNKNOWN_BUS, f"line {ln.id} {ln.endpoints}")
            if ln.source == ln.target:
                raise ValidationError(ValidationKind.SELF_LOOP, f"line {ln.id} at bus {ln.source}")
            key = frozenset(ln.endpoints)
            if key in pairs:
                raise ValidationError(ValidationKind.PARALLEL_LINE, f"line {ln.id} {ln.endpoints}")
            pairs.add(key)
            if not ln.susceptance > 0:
                raise ValidationError(
                    ValidationKind.NON_POSITIVE_SUSCEPTANCE, f"line {ln.id} has B={ln.susceptance}"
                )
        if self.n > 1:
            ncomp, _ = component_labels(self.n, self.src_idx, self.dst_idx)
            if ncomp != 1:
                raise ValidationError(ValidationKind.DISCONNECTED, f"{ncomp} components")

    # -- sizes and index maps ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def m(self) -> int:
        return len(self.lines)

    @cached_property
    def bus_ids(self) -> np.ndarray:
        return np.array([b.id for b in self.buses], dtype=int)

    @cached_property
    def line_ids(self) -> np.ndarray:
        return np.array([ln.id for ln in self.lines], dtype=int)

    @cached_property
    def bus_index(self) -> dict[int, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    @cached_property
    def line_index(self) -> dict[int, int]:
        return {ln.id: k for k, ln in enumerate(self.lines)}

    @cached_property
    def src_idx(self) -> np.ndarray:
        return np.array([self.bus_index[ln.source] for ln in self.lines], dtype=int)

    @cached_property
    def dst_idx(self) -> np.ndarray:
        return np.array([self.bus_index[ln.target] for ln in self.lines], dtype=int)

    @cached_property
    def susceptances(self) -> np.ndarray:
        return np.array([ln.susceptance for ln in self.lines], dtype=float)

    @cached_property
    def injections(self) -> np.ndarray:
        return np.array([b.injection for b in self.buses], dtype=float)

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per bus index, list of ``(neighbour index, line index)``."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for k, (i, j) in enumerate(zip(self.src_idx, self.dst_idx)):
            adj[i].append((int(j), k))
            adj[j].append((int(i), k))
        return adj

    @property
    def generators(self) -> list[int]:
        return [b.id for b in self.buses if b.is_generator]

    def bus(self, bus_id: int) -> Bus:
        return self.buses[self.bus_index[bus_id]]

    def line(self, line_id: int) -> Line:
        return self.lines[self.line_index[line_id]]

    def degree(self) -> dict[int, int]:
        return {b.id: len(self.adjacency[k]) for k, b in enumerate(self.buses)}

    # -- derived networks ----------------------------------------------------

    def without_lines(self, line_ids: Iterable[int]) -> "Network":
        drop = set(line_ids)
        unknown = drop - set(self.line_index)
        if unknown:
            raise UnknownLine(f"unknown lines {sorted(unknown)}")
        return replace(self, lines=tuple(ln for ln in self.lines if ln.id not in drop))

    def with_injections(self, p) -> "Network":
        from .validation import check_injections

        vec = check_injections(self, p, balanced=False)
        buses = tuple(replace(b, injection=float(v)) for b, v in zip(self.buses, vec))
        return replace(self, buses=buses)

    def with_susceptances(self, b: Iterable[float]) -> "Network":
        lines = tuple(replace(ln, susceptance=float(x)) for ln, x in zip(self.lines, b))
        return replace(self, lines=lines)

    def with_slack(self, slack: int) -> "Network":
        return replace(self, slack=slack)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Network{label} n={self.n} m={self.m} slack={self.slack}>"


def component_labels(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[int, np.ndarray]:
    """Connected components of an undirected graph given by index arrays."""
    if n == 0:
        return 0, np.zeros(0, dtype=int)
    g = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    return connected_components(g, directed=False)


def incidence(net: Network) -> np.ndarray:
    """Signed ``n x m`` vertex-edge incidence matrix (+1 at source, -1 at target)."""
    c = np.zeros((net.n, net.m))
    cols = np.arange(net.m)
    c[net.src_idx, cols] = 1.0
    c[net.dst_idx, cols] = -1.0
    return c


# -- native JSON -------------------------------------------------------------


def network_from_dict(data: Mapping, name: str = "") -> Network:
    try:
        buses = [
            Bus(int(b["id"]), float(b.get("p", 0.0)), bool(b.get("gen", False)))
            for b in data["buses"]
        ]
        lines = [
            Line(int(ln["id"]), int(ln["from"]), int(ln["to"]), float(ln["b"]))
            for ln in data["lines"]
        ]
        slack = data.get("slack")
        base = float(data.get("baseMVA", 100.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed network document: {exc!r}") from exc
    return Network(buses, lines, None if slack is None else int(slack), base, name=name)


def network_to_dict(net: Network) -> dict:
    return {
        "baseMVA": net.base_mva,
        "slack": net.slack,
        "buses": [{"id": b.id, "p": b.injection, "gen": b.is_generator} for b in net.buses],
        "lines": [
            {"id": ln.id, "from": ln.source, "to": ln.target, "b": ln.susceptance}
            for ln in net.lines
        ],
    }


def load_native(path) -> Network:
    """Read a network from the native JSON format."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return network_from_dict(data, name=path.stem)


def save_native(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2))


def load_injections(path) -> dict[int, float]:
    """Read a ``bus_id,p`` CSV (per-unit, header optional) into a mapping."""
    out: dict[int, float] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                out[int(row[0])] = float(row[1])
            except (ValueError, IndexError):
                if not out:  # header line
                    continue
                raise ParseError(f"bad injection row {row!r}") from None
    return out


def load_network(path, **kwargs) -> Network:
    """Dispatch on file extension: ``.m`` is Matpower, anything else native JSON."""
    path = Path(path)
    if path.suffix.lower() == ".m":
        from .matpower import load_matpower

        return load_matpower(path, **kwargs)
    return load_native(path)


# -- dangling bridges --------------------------------------------------------


@dataclass
class CollapseReport:
    absorbed_into: dict[int, int]
    removed_lines: list[int]
    n_before: int
    n_after: int

    def to_dict(self) -> dict:
        return {
            "absorbed_into": {str(k): v for k, v in sorted(self.absorbed_into.items())},
            "removed_lines": self.removed_lines,
            "n_before": self.n_before,
            "n_after": self.n_after,
        }


def collapse_dangling_bridges(net: Network) -> tuple[Network, CollapseReport]:
    """Repeatedly fold degree-1 buses into their only neighbour.

    The neighbour absorbs the removed bus's injection (and generator flag),
    so the total injection is conserved. ``absorbed_into`` maps every removed
    bus to the bus that finally holds its injection. If the slack is removed,
    its absorber becomes the new slack.
    """
    inj = {b.id: b.injection for b in net.buses}
    gen = {b.id: b.is_generator for b in net.buses}
    nbrs: dict[int, dict[int, int]] = defaultdict(dict)
    for ln in net.lines:
        nbrs[ln.source][ln.target] = ln.id
        nbrs[ln.target][ln.source] = ln.id
    alive = {b.id for b in net.buses}
    parent: dict[int, int] = {}
    removed_lines: list[int] = []

    queue = sorted(b for b in alive if len(nbrs[b]) == 1)
    while queue and len(alive) > 1:
        v = queue.pop(0)
        if v not in alive or len(nbrs[v]) != 1:
            continue
        (u, lid), = nbrs[v].items()
        inj[u] += inj[v]
        gen[u] = gen[u] or gen[v]
        del nbrs[u][v]
        del nbrs[v]
        alive.discard(v)
        parent[v] = u
        removed_lines.append(lid)
        if len(nbrs[u]) == 1:
            queue.append(u)

    def root(v):
        while v in parent:
            v = parent[v]
        return v

    absorbed = {v: root(v) for v in parent}
    buses = [Bus(b.id, inj[b.id], gen[b.id]) for b in net.buses if b.id in alive]
    dropped = set(removed_lines)
    lines = [ln for ln in net.lines if ln.id not in dropped]
    slack = net.slack if net.slack in alive else root(net.slack)
    out = Network(buses, lines, slack, net.base_mva, name=net.name)
    return out, CollapseReport(absorbed, removed_lines, net.n, out.n)
