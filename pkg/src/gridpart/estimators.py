"""Estimator-style wrappers around the functional API.

A fitted estimator holds one network's analysis. ``X`` arguments are
arrays: injection vectors (one row per scenario, columns in bus order) for
:class:`DCFlowSolver`, and ``(tripped, monitored)`` line-id pairs for the
pair-wise ``predict`` methods.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .balance import BalanceRule, uniform_generator_rule
from .exceptions import ImbalancedInjection
from .localize import classify_pair, influence_graph, sparsity_report
from .lodf import lifted_inverse, lodf_matrix
from .network import collapse_dangling_bridges, incidence
from .partition import cell_decomposition, irreducible_tree_partition
from .perturb import PerturbationSpec, perturb
from .switching import enumerate_bridging_cuts, evaluate_switch
from .validation import DEFAULT_TOL, check_injections, check_network


def _prepare(net, collapse: bool, perturbation):
    net = check_network(net)
    if collapse:
        net, _ = collapse_dangling_bridges(net)
    if perturbation is not None:
        spec = perturbation if isinstance(perturbation, PerturbationSpec) \
            else PerturbationSpec.parse(perturbation)
        net = perturb(net, spec)
    return net


def _resolve_rule(rule, net):
    if rule is None or isinstance(rule, BalanceRule):
        return rule
    if rule == "uniform-gen":
        return uniform_generator_rule(net)
    raise ValueError(f"unknown rule {rule!r}")


def _pairs(X) -> np.ndarray:
    return check_array(X, dtype=np.int64, ensure_min_features=2).reshape(-1, 2)


class TreePartitioner(BaseEstimator):
    """Irreducible tree partition and cell decomposition of a network.

    ``predict`` maps ``(tripped, monitored)`` line pairs to their
    :class:`~gridpart.localize.PairClass` value.
    """

    def __init__(self, collapse_dangling: bool = False):
        self.collapse_dangling = collapse_dangling

    def fit(self, net, y=None):
        self.network_ = _prepare(net, self.collapse_dangling, None)
        self.partition_ = irreducible_tree_partition(self.network_)
        self.cells_ = cell_decomposition(self.network_, self.partition_)
        self.n_regions_ = self.partition_.k
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "partition_")
        return np.array([classify_pair(self.partition_, self.cells_, int(e), int(f)).value
                         for e, f in _pairs(X)], dtype=object)


class DCFlowSolver(TransformerMixin, BaseEstimator):
    """Maps injection vectors to branch flows on a fixed network.

    Fitting factorises the reduced Laplacian once; ``transform`` is then a
    matrix product per batch. Each row of ``X`` must sum to zero.
    """

    def __init__(self, tol: float = DEFAULT_TOL, perturbation=None):
        self.tol = tol
        self.perturbation = perturbation

    def fit(self, net, y=None):
        self.network_ = _prepare(net, False, self.perturbation)
        x = lifted_inverse(self.network_)
        b = self.network_.susceptances
        self.ptdf_ = b[:, None] * (incidence(self.network_).T @ x)
        self.line_ids_ = self.network_.line_ids.copy()
        self.n_features_in_ = self.network_.n
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "ptdf_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} buses, got {X.shape[1]}")
        bad = np.flatnonzero(np.abs(X.sum(axis=1)) > self.tol)
        if bad.size:
            raise ImbalancedInjection(f"rows {bad.tolist()} do not sum to zero")
        return X @ self.ptdf_.T


class LodfAnalyzer(BaseEstimator):
    """Outage factor matrix, influence graph and sparsity report.

    ``rule`` is None, ``"uniform-gen"`` or a :class:`BalanceRule`; without a
    rule bridge columns stay undefined. ``predict`` returns the factor for
    each ``(tripped, monitored)`` pair, NaN where undefined.
    """

    def __init__(self, threshold: float = 0.005, rule=None, tol: float = DEFAULT_TOL,
                 perturbation=None, collapse_dangling: bool = False):
        self.threshold = threshold
        self.rule = rule
        self.tol = tol
        self.perturbation = perturbation
        self.collapse_dangling = collapse_dangling

    def fit(self, net, injections=None):
        self.network_ = _prepare(net, self.collapse_dangling, self.perturbation)
        vec = check_injections(self.network_, injections, tol=self.tol)
        self.partition_ = irreducible_tree_partition(self.network_)
        self.cells_ = cell_decomposition(self.network_, self.partition_)
        self.rule_ = _resolve_rule(self.rule, self.network_)
        self.lodf_ = lodf_matrix(self.network_, vec, self.rule_, tol=self.tol,
                                 bridges=self.partition_.bridges, on_bridge_error="skip")
        self.influence_graph_ = influence_graph(self.lodf_, self.threshold, self.network_)
        self.sparsity_ = sparsity_report(self.lodf_, self.partition_, self.cells_, self.tol)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "lodf_")
        out = [self.lodf_.factor(int(e), int(f)) for e, f in _pairs(X)]
        return np.array([np.nan if v is None else v for v in out])


class SwitchingEvaluator(BaseEstimator):
    """Before/after evaluation of switching ``off`` lines.

    With ``off`` empty, ``fit`` searches bridging cuts of up to ``k_max``
    lines and evaluates the best-balanced one.
    """

    def __init__(self, off=(), threshold: float = 0.005, rule="uniform-gen", k_max: int = 3,
                 tol: float = DEFAULT_TOL, collapse_dangling: bool = False):
        self.off = off
        self.threshold = threshold
        self.rule = rule
        self.k_max = k_max
        self.tol = tol
        self.collapse_dangling = collapse_dangling

    def fit(self, net, injections=None):
        self.network_ = _prepare(net, self.collapse_dangling, None)
        off = tuple(self.off)
        self.candidates_ = []
        if not off:
            self.candidates_ = enumerate_bridging_cuts(self.network_, self.k_max)
            if self.candidates_:
                off = self.candidates_[0].lines
        self.evaluation_ = evaluate_switch(self.network_, injections, off,
                                           _resolve_rule(self.rule, self.network_),
                                           self.threshold, tol=self.tol)
        return self
