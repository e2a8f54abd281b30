"""DC power flow: ``p = C P`` and ``P = B C^T theta`` with a zero-angle slack."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .exceptions import ImbalancedComponent, SingularSystem
from .network import Network, component_labels
from .validation import DEFAULT_TOL, check_injections


@dataclass(frozen=True)
class FlowSolution:
    """Phase angles (radians, slack at 0) and branch flows (per-unit)."""

    theta: dict
    branch_flow: dict
    slack: int

    @property
    def buses(self) -> frozenset:
        return frozenset(self.theta)

    def flows(self, line_ids) -> np.ndarray:
        return np.array([self.branch_flow[k] for k in line_ids])


def laplacian(n: int, src: np.ndarray, dst: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Weighted Laplacian ``C B C^T`` as a dense matrix."""
    lap = np.zeros((n, n))
    np.add.at(lap, (src, src), b)
    np.add.at(lap, (dst, dst), b)
    np.add.at(lap, (src, dst), -b)
    np.add.at(lap, (dst, src), -b)
    return lap


def _solve_angles(n, src, dst, b, p, slack_idx, backend="dense") -> np.ndarray:
    keep = np.arange(n) != slack_idx
    theta = np.zeros(n)
    if n == 1:
        return theta
    if backend == "dense":
        red = laplacian(n, src, dst, b)[np.ix_(keep, keep)]
        try:
            theta[keep] = scipy.linalg.cho_solve(scipy.linalg.cho_factor(red), p[keep])
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
    elif backend == "sparse":
        lap = scipy.sparse.coo_matrix(
            (np.concatenate([b, b, -b, -b]),
             (np.concatenate([src, dst, src, dst]), np.concatenate([src, dst, dst, src]))),
            shape=(n, n),
        ).tocsr()
        red = lap[keep][:, keep].tocsc()
        sol = scipy.sparse.linalg.spsolve(red, p[keep])
        if not np.all(np.isfinite(sol)):
            raise SingularSystem("sparse solve returned non-finite angles")
        theta[keep] = sol
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return theta


def solve_dc(net: Network, p=None, *, slack: int | None = None, tol: float = DEFAULT_TOL,
             backend: str = "dense") -> FlowSolution:
    """Unique DC power flow with the slack angle pinned to zero.

    Parameters
    ----------
    net : Network
    p : injections, optional
        Mapping bus -> value or vector aligned with ``net.buses``; defaults to
        the network's own injections. Must sum to zero within ``tol``.
    slack : int, optional
        Overrides ``net.slack``. Flows do not depend on it, angles shift.
    backend : {"dense", "sparse"}
    """
    vec = check_injections(net, p, balanced=True, tol=tol)
    slack = net.slack if slack is None else slack
    theta = _solve_angles(net.n, net.src_idx, net.dst_idx, net.susceptances, vec,
                          net.bus_index[slack], backend)
    flow = net.susceptances * (theta[net.src_idx] - theta[net.dst_idx])
    return FlowSolution(
        dict(zip(net.bus_ids.tolist(), theta.tolist())),
        dict(zip(net.line_ids.tolist(), flow.tolist())),
        slack,
    )


def branch_flows(net: Network, p=None, *, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Flows as a vector aligned with ``net.lines``."""
    sol = solve_dc(net, p, tol=tol)
    return sol.flows(net.line_ids)


def _component_flows(net: Network, alive: np.ndarray, vec: np.ndarray, tol: float):
    """Per-component solves over the lines flagged in ``alive`` (boolean mask).

    Returns ``(labels, theta, flow)`` with ``flow`` NaN on dead lines.
    """
    src, dst, b = net.src_idx[alive], net.dst_idx[alive], net.susceptances[alive]
    ncomp, labels = component_labels(net.n, src, dst)
    theta = np.zeros(net.n)
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        mismatch = vec[members].sum()
        if abs(mismatch) > tol:
            raise ImbalancedComponent(c, float(mismatch))
        if len(members) == 1:
            continue
        local = -np.ones(net.n, dtype=int)
        local[members] = np.arange(len(members))
        inside = labels[src] == c
        # island slack: lowest bus id, not lowest index
        slack_local = int(np.argmin(net.bus_ids[members]))
        theta[members] = _solve_angles(
            len(members), local[src[inside]], local[dst[inside]], b[inside],
            vec[members], slack_local,
        )
    flow = np.full(net.m, np.nan)
    flow[alive] = b * (theta[src] - theta[dst])
    return labels, theta, flow


def solve_dc_component(net: Network, alive_lines: Iterable[int], injections=None, *,
                       tol: float = DEFAULT_TOL) -> list[FlowSolution]:
    """Independent DC solves on each island of ``(N, alive_lines)``.

    Each island uses its lowest bus id as slack and must be balanced on its
    own, otherwise :class:`ImbalancedComponent` names the offending island
    (components are numbered by the order of their lowest bus index).
    """
    alive_set = set(alive_lines)
    alive = np.array([lid in alive_set for lid in net.line_ids.tolist()], dtype=bool)
    vec = check_injections(net, injections, balanced=False)
    labels, theta, flow = _component_flows(net, alive, vec, tol)
    out = []
    for c in range(labels.max() + 1):
        members = np.flatnonzero(labels == c)
        ids = net.bus_ids[members]
        lines = [k for k in np.flatnonzero(alive) if labels[net.src_idx[k]] == c]
        out.append(FlowSolution(
            dict(zip(ids.tolist(), theta[members].tolist())),
            {int(net.line_ids[k]): float(flow[k]) for k in lines},
            int(ids.min()),
        ))
    return out
