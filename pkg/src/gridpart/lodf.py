"""Line outage distribution factors.

``K[e, f]`` is the change of flow on line ``f`` per unit of pre-outage flow
on the tripped line ``e``. For non-bridges it depends only on topology and
susceptances. When ``e`` is a bridge the network splits in two islands and
the factor also depends on the injections and the balance rule that
re-balances each island.

Matrices are stored as ``entries[f_idx, e_idx]`` (row = monitored line,
column = tripped line), with NaN on the diagonal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import _exact
from .balance import BalanceRule, apply_rule
from .exceptions import (
    BridgeColumn,
    GridpartError,
    IslandedAtBridge,
    NearSingularDenominator,
    NotABridge,
)
from .flow import _component_flows, _solve_angles, laplacian
from .network import Network, component_labels, incidence
from .partition import find_bridges
from .validation import DEFAULT_TOL, check_injections, check_line


class ColumnKind(str, enum.Enum):
    NON_BRIDGE = "NonBridge"
    BRIDGE_EXTENDED = "BridgeExtended"
    BRIDGE_UNDEFINED = "BridgeUndefined"


@dataclass
class LodfMatrix:
    """Dense factor matrix with per-column provenance.

    Attributes
    ----------
    line_ids : ndarray
        Line id of every row and column.
    entries : ndarray
        ``entries[f, e]`` is the factor from tripped line ``e`` to line ``f``.
        The diagonal and undefined bridge columns hold NaN.
    kinds : list of ColumnKind
    context : dict
        For bridge columns: the injection snapshot and rule name they were
        computed under, or the reason they are undefined.
    """

    line_ids: np.ndarray
    entries: np.ndarray
    kinds: list
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {int(k): i for i, k in enumerate(self.line_ids)}

    def factor(self, e: int, ehat: int) -> float | None:
        """``K[e, ehat]``, or None on the diagonal or in an undefined column."""
        v = self.entries[self._index[ehat], self._index[e]]
        return None if np.isnan(v) else float(v)

    def column(self, e: int) -> dict:
        j = self._index[e]
        return {int(k): float(v) for k, v in zip(self.line_ids, self.entries[:, j])
                if not np.isnan(v)}

    def kind(self, e: int) -> ColumnKind:
        return self.kinds[self._index[e]]

    @property
    def defined_columns(self) -> np.ndarray:
        return np.array([k != ColumnKind.BRIDGE_UNDEFINED for k in self.kinds])

    def kinds_dict(self) -> dict:
        return {str(int(k)): kind.value for k, kind in zip(self.line_ids, self.kinds)}


# -- matrix route ------------------------------------------------------------


def lifted_inverse(net: Network, slack: int | None = None) -> np.ndarray:
    """Inverse of the slack-reduced Laplacian, padded with a zero row/column.

    This is the generalised inverse ``X`` with ``L X L = L``; any slack gives
    the same factors.
    """
    slack = net.slack if slack is None else slack
    s = net.bus_index[slack]
    keep = np.arange(net.n) != s
    lap = laplacian(net.n, net.src_idx, net.dst_idx, net.susceptances)
    x = np.zeros((net.n, net.n))
    if net.n > 1:
        red = lap[np.ix_(keep, keep)]
        x[np.ix_(keep, keep)] = scipy.linalg.cho_solve(
            scipy.linalg.cho_factor(red), np.eye(net.n - 1)
        )
    return x


def transfer_matrix(net: Network, slack: int | None = None) -> np.ndarray:
    """``H = B C^T X C``: flow on row line per unit injected along column line."""
    x = lifted_inverse(net, slack)
    y = x @ incidence(net)
    return net.susceptances[:, None] * (y[net.src_idx] - y[net.dst_idx])


def _nonbridge_columns(h: np.ndarray, cols, tol: float) -> np.ndarray:
    d = 1.0 - np.diag(h)[cols]
    if np.any(np.abs(d) < tol):
        bad = np.asarray(cols)[np.abs(d) < tol]
        raise NearSingularDenominator(f"1 - H[e,e] below {tol} for columns {bad.tolist()}")
    return h[:, cols] / d


def lodf_nonbridge(net: Network, e: int, *, slack: int | None = None, exact: bool = False,
                   tol: float = DEFAULT_TOL, bridges=None) -> dict:
    """Factors from tripping non-bridge line ``e`` to every other line.

    With ``exact=True`` the same formula is evaluated in rational arithmetic
    (susceptances rationalised on a 1e-9 grid) and Fractions are returned.
    """
    j = check_line(net, e)
    bridges = find_bridges(net) if bridges is None else bridges
    if e in bridges:
        raise BridgeColumn(f"line {e} is a bridge; use extended_lodf")
    if exact:
        return _lodf_nonbridge_exact(net, j, slack)
    h = transfer_matrix(net, slack)
    col = _nonbridge_columns(h, [j], tol)[:, 0]
    return {int(k): float(v) for i, (k, v) in enumerate(zip(net.line_ids, col)) if i != j}


def _lodf_nonbridge_exact(net: Network, j: int, slack: int | None) -> dict:
    slack = net.slack if slack is None else slack
    s = net.bus_index[slack]
    b = [_exact.to_fraction(ln.susceptance) for ln in net.lines]
    edges = list(zip(net.src_idx.tolist(), net.dst_idx.tolist()))
    lap = _exact.laplacian(net.n, edges, b)
    keep = [i for i in range(net.n) if i != s]
    red = [[lap[r][c] for c in keep] for r in keep]
    rhs_full = [Fraction(0)] * net.n
    rhs_full[edges[j][0]] += 1
    rhs_full[edges[j][1]] -= 1
    sol = _exact.solve(red, [rhs_full[r] for r in keep])
    x = [Fraction(0)] * net.n
    for r, v in zip(keep, sol):
        x[r] = v
    denom = 1 - b[j] * (x[edges[j][0]] - x[edges[j][1]])
    if denom == 0:
        raise BridgeColumn("zero denominator: line is a bridge")
    return {
        int(net.line_ids[k]): b[k] * (x[u] - x[v]) / denom
        for k, (u, v) in enumerate(edges) if k != j
    }


# -- extended factors for bridges --------------------------------------------


def extended_lodf(net: Network, p, rule: BalanceRule, e: int, *, tol: float = DEFAULT_TOL,
                  bridges=None, return_adjustments: bool = False):
    """Factors from tripping bridge ``e`` when ``rule`` re-balances both islands.

    Each island's imbalance ``M`` (positive when it lost inflow) is covered by
    the rule's participants inside that island, with weights renormalised
    over them. The factor is ``(P'_f - P_f) / P_e``.

    Returns
    -------
    dict
        Line id -> factor, without ``e`` itself. With
        ``return_adjustments=True`` also the bus -> injection change map.
    """
    j = check_line(net, e)
    bridges = find_bridges(net) if bridges is None else bridges
    if e not in bridges:
        raise NotABridge(f"line {e} is not a bridge")
    vec = check_injections(net, p, balanced=True, tol=tol)
    base = _base_flows(net, vec)
    col, adjustments = _extended_column(net, vec, base, rule, j, tol)
    out = {int(k): float(v) for i, (k, v) in enumerate(zip(net.line_ids, col)) if i != j}
    return (out, adjustments) if return_adjustments else out


def _base_flows(net: Network, vec: np.ndarray) -> np.ndarray:
    theta = _solve_angles(net.n, net.src_idx, net.dst_idx, net.susceptances, vec,
                          net.bus_index[net.slack])
    return net.susceptances * (theta[net.src_idx] - theta[net.dst_idx])


def _extended_column(net, vec, base, rule, j, tol):
    pe = base[j]
    if abs(pe) < tol:
        raise IslandedAtBridge(
            f"bridge {int(net.line_ids[j])} carries no flow; the injection is not island-free"
        )
    alive = np.ones(net.m, dtype=bool)
    alive[j] = False
    ncomp, labels = component_labels(net.n, net.src_idx[alive], net.dst_idx[alive])
    new = vec.copy()
    adjustments: dict[int, float] = {}
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        shortage = -float(vec[members].sum())
        for bus, delta in apply_rule(rule, net.bus_ids[members].tolist(), shortage).items():
            new[net.bus_index[bus]] += delta
            adjustments[bus] = adjustments.get(bus, 0.0) + delta
    _, _, flow = _component_flows(net, alive, new, tol)
    col = (flow - base) / pe
    col[j] = np.nan
    return col, adjustments


# -- whole matrix ------------------------------------------------------------


def lodf_matrix(net: Network, p=None, rule: BalanceRule | None = None, *,
                tol: float = DEFAULT_TOL, bridges=None,
                on_bridge_error: str = "raise") -> LodfMatrix:
    """All columns: matrix route for non-bridges, extended route for bridges.

    Bridge columns need a ``rule`` (``p`` defaults to the network's own
    injections); without one they are marked ``BridgeUndefined``.
    ``on_bridge_error="skip"`` turns per-column failures (islanded bridge,
    no participant) into undefined columns instead of raising.
    """
    if on_bridge_error not in ("raise", "skip"):
        raise ValueError("on_bridge_error must be 'raise' or 'skip'")
    bridges = find_bridges(net) if bridges is None else frozenset(bridges)
    m = net.m
    entries = np.full((m, m), np.nan)
    kinds = [ColumnKind.NON_BRIDGE] * m
    context: dict = {}
    bridge_cols = [i for i, k in enumerate(net.line_ids) if int(k) in bridges]
    plain = [i for i in range(m) if int(net.line_ids[i]) not in bridges]
    if plain:
        h = transfer_matrix(net)
        entries[:, plain] = _nonbridge_columns(h, plain, tol)
    if bridge_cols:
        if rule is None:
            for i in bridge_cols:
                kinds[i] = ColumnKind.BRIDGE_UNDEFINED
            context["bridges"] = {"status": "no injection/rule context"}
        else:
            vec = check_injections(net, p, balanced=True, tol=tol)
            base = _base_flows(net, vec)
            context["bridges"] = {"rule": rule.name, "injection": vec.tolist()}
            for i in bridge_cols:
                try:
                    entries[:, i], _ = _extended_column(net, vec, base, rule, i, tol)
                    kinds[i] = ColumnKind.BRIDGE_EXTENDED
                except GridpartError as exc:
                    if on_bridge_error == "raise":
                        raise
                    kinds[i] = ColumnKind.BRIDGE_UNDEFINED
                    context.setdefault("undefined", {})[int(net.line_ids[i])] = str(exc)
    np.fill_diagonal(entries, np.nan)
    return LodfMatrix(net.line_ids.copy(), entries, kinds, context)
