"""Input validation helpers used by the functional API and the estimators."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .exceptions import ImbalancedInjection, UnknownLine

DEFAULT_TOL = 1e-9


def check_network(net):
    from .network import Network

    if not isinstance(net, Network):
        raise TypeError(f"expected a Network, got {type(net).__name__}")
    return net


def check_injections(net, p=None, *, balanced: bool = True, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return injections as a float vector aligned with ``net.buses``.

    ``p`` may be None (use the network's own injections), a mapping from bus
    id to injection (missing buses get 0), or an array of length ``n``.
    """
    if p is None:
        vec = net.injections.copy()
    elif isinstance(p, Mapping):
        vec = np.zeros(net.n)
        for bus_id, value in p.items():
            try:
                vec[net.bus_index[int(bus_id)]] = float(value)
            except KeyError:
                raise KeyError(f"unknown bus {bus_id}") from None
    else:
        vec = np.asarray(p, dtype=float).reshape(-1)
        if vec.shape != (net.n,):
            raise ValueError(f"injection vector has shape {vec.shape}, expected ({net.n},)")
        vec = vec.copy()
    if not np.all(np.isfinite(vec)):
        raise ValueError("injections must be finite")
    if balanced and abs(vec.sum()) > tol:
        raise ImbalancedInjection(f"injections sum to {vec.sum():.3e}")
    return vec


def check_line(net, line_id: int) -> int:
    """Map a line id to its column index, raising UnknownLine."""
    try:
        return net.line_index[int(line_id)]
    except KeyError:
        raise UnknownLine(f"unknown line {line_id}") from None
