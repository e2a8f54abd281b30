"""Random susceptance perturbations used to break symmetric cancellations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .network import Network

DISTRIBUTIONS = ("uniform", "truncated_gaussian", "truncated_laplace")


@dataclass(frozen=True)
class PerturbationSpec:
    """Relative perturbation ``B_e * (1 + scale * u_e)`` with i.i.d. ``u_e``.

    ``u`` is uniform on [-1, 1], or a standard Gaussian / Laplace variable
    truncated to [-3, 3]. The support is further clipped to
    ``[-0.5/scale, 0.5/scale]`` so perturbed susceptances stay above half
    their nominal value. All three laws have a density.
    """

    scale: float = 1e-3
    distribution: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if self.scale < 0:
            raise ValueError("scale must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "PerturbationSpec":
        """Parse ``eps=1e-3,dist=uniform,seed=42`` (any subset, any order)."""
        kwargs = {}
        for part in filter(None, (t.strip() for t in text.split(","))):
            key, _, value = part.partition("=")
            key = key.strip()
            if key in ("eps", "scale"):
                kwargs["scale"] = float(value)
            elif key in ("dist", "distribution"):
                kwargs["distribution"] = {"gaussian": "truncated_gaussian",
                                          "laplace": "truncated_laplace"}.get(value, value)
            elif key == "seed":
                kwargs["seed"] = int(value)
            else:
                raise ValueError(f"unknown perturbation key {key!r}")
        return cls(**kwargs)

    def sample(self, size: int) -> np.ndarray:
        """Draw ``size`` relative factors ``1 + scale * u``."""
        rng = np.random.default_rng(self.seed)
        if self.scale == 0:
            return np.ones(size)
        if self.distribution == "uniform":
            t = min(1.0, 0.5 / self.scale)
            u = rng.uniform(-t, t, size)
        else:
            t = min(3.0, 0.5 / self.scale)
            law = stats.norm if self.distribution == "truncated_gaussian" else stats.laplace
            lo, hi = law.cdf(-t), law.cdf(t)
            u = law.ppf(rng.uniform(lo, hi, size))
        return 1.0 + self.scale * u


def perturb(net: Network, spec: PerturbationSpec) -> Network:
    """Same topology, susceptances multiplied by independent random factors."""
    if spec.scale == 0:
        return net
    return net.with_susceptances(net.susceptances * spec.sample(net.m))
