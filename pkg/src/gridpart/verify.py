"""Cross-check the matrix route against the forest enumeration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cases
from .forest_oracle import MAX_BUSES, MAX_LINES, ForestOracle
from .lodf import lodf_nonbridge
from .network import Network
from .partition import find_bridges


@dataclass
class OracleCheck:
    name: str
    pairs: int
    max_discrepancy: float
    exact_mismatches: int

    def passed(self, tol: float = 1e-9) -> bool:
        return self.exact_mismatches == 0 and self.max_discrepancy < tol


def check_network(net: Network, *, exact: bool = True) -> OracleCheck:
    """Compare every non-bridge pair of ``net`` by both routes.

    The float route is compared within tolerance; with ``exact=True`` the
    rational matrix route must equal the enumeration exactly.
    """
    oracle = ForestOracle(net)
    bridges = find_bridges(net)
    pairs = mismatches = 0
    worst = 0.0
    for e in net.line_ids.tolist():
        if e in bridges:
            continue
        approx = lodf_nonbridge(net, e, bridges=bridges)
        rational = lodf_nonbridge(net, e, bridges=bridges, exact=True) if exact else None
        for f, value in approx.items():
            truth = oracle.lodf(e, f)
            pairs += 1
            worst = max(worst, abs(float(truth) - value))
            if rational is not None and rational[f] != truth:
                mismatches += 1
    return OracleCheck(net.name, pairs, worst, mismatches)


def random_suite(count: int, *, max_n: int = 6, min_n: int = 3, seed: int = 0):
    """Yield ``count`` random connected networks with rational susceptances."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(min_n, max_n + 1))
        top = min(n * (n - 1) // 2, MAX_LINES)
        m = int(rng.integers(n - 1, top + 1))
        yield cases.random_connected(n, m, rng, rational=True)


def fits_oracle(net: Network) -> bool:
    return net.n <= MAX_BUSES and net.m <= MAX_LINES
