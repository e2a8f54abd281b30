"""Shared brute-force oracles. None of them reuse the package's algorithms."""

from __future__ import annotations

from collections import deque

import numpy as np
import pytest

from gridpart import cases


def connected_components(nodes, edges):
    """Plain BFS components over ``edges`` given as (u, v) pairs."""
    adj = {v: [] for v in nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, comps = set(), []
    for s in sorted(nodes):
        if s in seen:
            continue
        comp, q = {s}, deque([s])
        seen.add(s)
        while q:
            v = q.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    q.append(w)
        comps.append(frozenset(comp))
    return comps


def brute_bridges(net):
    """Lines whose removal disconnects the network, by exhaustive removal."""
    nodes = [b.id for b in net.buses]
    out = set()
    for ln in net.lines:
        rest = [l2.endpoints for l2 in net.lines if l2.id != ln.id]
        if len(connected_components(nodes, rest)) > 1:
            out.add(ln.id)
    return out


def brute_articulation(nodes, edges):
    """Vertices whose removal increases the number of components."""
    base = len(connected_components(nodes, edges))
    out = set()
    for v in nodes:
        rest_nodes = [u for u in nodes if u != v]
        rest = [(a, b) for a, b in edges if v not in (a, b)]
        if len(connected_components(rest_nodes, rest)) > base:
            out.add(v)
    return out


def resolve(net, p, removed=()):
    """Flows by a least-squares solve of the stacked DC equations on
    ``net`` minus ``removed``; one island only."""
    keep = [ln for ln in net.lines if ln.id not in set(removed)]
    idx = {b.id: k for k, b in enumerate(net.buses)}
    n, m = net.n, len(keep)
    # unknowns: theta (n) then flows (m); equations: Ohm, conservation, theta_0 = 0
    a = np.zeros((m + n + 1, n + m))
    rhs = np.zeros(m + n + 1)
    for k, ln in enumerate(keep):
        a[k, n + k] = 1.0
        a[k, idx[ln.source]] = -ln.susceptance
        a[k, idx[ln.target]] = ln.susceptance
        a[m + idx[ln.source], n + k] += 1.0
        a[m + idx[ln.target], n + k] -= 1.0
    rhs[m:m + n] = p
    a[m + n, 0] = 1.0
    sol = np.linalg.lstsq(a, rhs, rcond=None)[0]
    return {ln.id: sol[n + k] for k, ln in enumerate(keep)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return cases.triangle()


@pytest.fixture
def butterfly():
    return cases.butterfly()


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
