"""Reader for the subset of the Matpower case format used by the DC model.

Only ``mpc.baseMVA``, ``mpc.bus``, ``mpc.gen`` and ``mpc.branch`` are read;
every other field and column is ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ValidationError, ValidationKind
from .network import Bus, Line, Network

# Matpower column indices (0-based)
BUS_I, BUS_TYPE, PD = 0, 1, 2
GEN_BUS, PG = 0, 1
F_BUS, T_BUS, BR_X, BR_STATUS = 0, 1, 3, 10
REF = 3

_SCALAR = re.compile(r"mpc\.baseMVA\s*=\s*([-+0-9.eE]+)\s*;")


def _matrix_block(text: str, name: str) -> np.ndarray:
    m = re.search(rf"mpc\.{name}\s*=\s*\[(.*?)\]\s*;", text, re.S)
    if m is None:
        raise ParseError(f"missing mpc.{name} block")
    rows = []
    for raw in m.group(1).splitlines():
        raw = raw.split("%", 1)[0]
        for chunk in raw.split(";"):
            tokens = chunk.replace(",", " ").split()
            if tokens:
                try:
                    rows.append([float(t) for t in tokens])
                except ValueError as exc:
                    raise ParseError(f"mpc.{name}: bad number in {chunk.strip()!r}") from exc
    if not rows:
        return np.zeros((0, 0))
    width = max(len(r) for r in rows)
    if any(len(r) != width for r in rows):
        raise ParseError(f"mpc.{name}: ragged rows")
    return np.array(rows)


@dataclass
class IngestReport:
    """What happened while turning the case into a simple DC network."""

    branch_rows: int = 0
    dropped_out_of_service: list[int] = field(default_factory=list)
    merged: dict[int, list[int]] = field(default_factory=dict)
    line_rows: dict[int, list[int]] = field(default_factory=dict)
    mismatch_pu: float = 0.0
    balanced_at: int | None = None

    def to_dict(self) -> dict:
        return {
            "branch_rows": self.branch_rows,
            "dropped_out_of_service": self.dropped_out_of_service,
            "merged": {str(k): v for k, v in self.merged.items()},
            "mismatch_pu": self.mismatch_pu,
            "balanced_at": self.balanced_at,
        }


def load_matpower(path, *, balance: str | None = "slack", return_report: bool = False):
    """Read a Matpower ``.m`` case as a DC network.

    Parameters
    ----------
    path : path-like
    balance : {"slack", None}
        Matpower dispatches carry AC losses, so ``sum(Pg) - sum(Pd)`` is not
        zero. With ``"slack"`` the mismatch is removed from the reference bus
        injection, which is the usual DC power flow convention. ``None``
        keeps the raw ``Pg - Pd``.
    return_report : bool
        Also return an :class:`IngestReport`.

    Notes
    -----
    Susceptance is ``1/x``; out-of-service branches are dropped and parallel
    branches merged by summing susceptances. Line ids are assigned 1..m in
    order of first appearance in the branch table, and
    ``report.line_rows`` maps each line id to its 1-based branch rows.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    m = _SCALAR.search(text)
    if m is None:
        raise ParseError("missing mpc.baseMVA")
    base = float(m.group(1))
    bus = _matrix_block(text, "bus")
    branch = _matrix_block(text, "branch")
    try:
        gen = _matrix_block(text, "gen")
    except ParseError:
        gen = np.zeros((0, 2))
    if bus.shape[0] == 0 or bus.shape[1] <= PD:
        raise ParseError("mpc.bus needs BUS_I, BUS_TYPE and PD columns")
    if branch.shape[0] and branch.shape[1] <= BR_X:
        raise ParseError("mpc.branch needs F_BUS, T_BUS and BR_X columns")

    report = IngestReport(branch_rows=int(branch.shape[0]))
    ids = bus[:, BUS_I].astype(int)
    refs = ids[bus[:, BUS_TYPE] == REF]
    if len(refs) == 0:
        raise ValidationError(ValidationKind.NO_SLACK_BUS, "no type-3 bus")
    slack = int(refs[0])

    pg: dict[int, float] = {int(i): 0.0 for i in ids}
    is_gen: set[int] = set()
    for row in gen:
        g = int(row[GEN_BUS])
        if g not in pg:
            raise ParseError(f"generator at unknown bus {g}")
        pg[g] += row[PG]
        is_gen.add(g)
    p = {int(i): (pg[int(i)] - pd) / base for i, pd in zip(ids, bus[:, PD])}

    merged_b: dict[frozenset, float] = {}
    orient: dict[frozenset, tuple[int, int]] = {}
    rows_of: dict[frozenset, list[int]] = {}
    for k, row in enumerate(branch, start=1):
        if branch.shape[1] > BR_STATUS and row[BR_STATUS] == 0:
            report.dropped_out_of_service.append(k)
            continue
        f, t, x = int(row[F_BUS]), int(row[T_BUS]), row[BR_X]
        if x == 0:
            raise ValidationError(ValidationKind.ZERO_REACTANCE, f"branch row {k} ({f}, {t})")
        key = frozenset((f, t))
        if key not in orient:
            orient[key] = (f, t)
            merged_b[key] = 0.0
            rows_of[key] = []
        merged_b[key] += 1.0 / x
        rows_of[key].append(k)

    lines = []
    for lid, key in enumerate(orient, start=1):
        f, t = orient[key]
        lines.append(Line(lid, f, t, merged_b[key]))
        report.line_rows[lid] = rows_of[key]
        if len(rows_of[key]) > 1:
            report.merged[lid] = rows_of[key]

    mismatch = float(sum(p.values()))
    report.mismatch_pu = mismatch
    if balance == "slack":
        p[slack] -= mismatch
        report.balanced_at = slack
    elif balance is not None:
        raise ValueError(f"unknown balance mode {balance!r}")

    buses = [Bus(int(i), p[int(i)], int(i) in is_gen) for i in ids]
    net = Network(buses, lines, slack, base, name=path.stem)
    return (net, report) if return_report else net


def case118_path() -> Path:
    """Path of the bundled IEEE 118-bus case (Matpower distribution)."""
    return Path(str(resources.files("gridpart") / "data" / "case118.m"))
