import json

import numpy as np
import pytest

from gridpart import cases
from gridpart.balance import BalanceRule
from gridpart.exceptions import UnknownLine
from gridpart.localize import (
    InfluenceGraph,
    PairClass,
    classify_pair,
    cross_region_edges,
    influence_graph,
    sparsity_report,
)
from gridpart.lodf import ColumnKind, LodfMatrix, lodf_matrix
from gridpart.partition import cell_decomposition, irreducible_tree_partition


def decomp(net):
    tp = irreducible_tree_partition(net)
    return tp, cell_decomposition(net, tp)


def test_classify_examples(butterfly):
    tp, cd = decomp(butterfly)
    assert classify_pair(tp, cd, 1, 4) == PairClass.SAME_REGION_DIFF_CELL
    assert classify_pair(tp, cd, 1, 2) == PairClass.SAME_CELL
    assert classify_pair(tp, cd, 3, 3) == PairClass.DIAGONAL
    net = cases.two_triangles()
    tp, cd = decomp(net)
    assert classify_pair(tp, cd, 4, 1) == PairClass.SOURCE_IS_BRIDGE
    assert classify_pair(tp, cd, 1, 4) == PairClass.TARGET_ONLY_BRIDGE
    assert classify_pair(tp, cd, 1, 5) == PairClass.DIFF_REGION
    with pytest.raises(UnknownLine):
        classify_pair(tp, cd, 1, 99)
    assert PairClass.DIFF_REGION.predicted_zero
    assert PairClass.SOURCE_IS_BRIDGE.predicted_nonzero


def test_zero_matrix_no_edges():
    ids = np.arange(1, 5)
    K = LodfMatrix(ids, np.zeros((4, 4)), [ColumnKind.NON_BRIDGE] * 4)
    g = influence_graph(K, 0.005)
    assert g.n_edges == 0 and g.nodes == (1, 2, 3, 4)
    with pytest.raises(ValueError):
        influence_graph(K, 0.0)


def test_influence_uses_max_of_directions():
    e = np.array([[np.nan, 0.001], [0.2, np.nan]])
    K = LodfMatrix(np.array([1, 2]), e, [ColumnKind.NON_BRIDGE] * 2)
    assert influence_graph(K, 0.1).edges == {(1, 2)}


def test_threshold_monotone(rng):
    net = cases.random_connected(10, 18, rng)
    K = lodf_matrix(net)
    prev = None
    for t in (0.5, 0.1, 0.01, 0.001):
        edges = influence_graph(K, t).edges
        if prev is not None:
            assert prev <= edges
        prev = edges


def test_exports():
    net = cases.two_triangles(p={1: 1.0, 6: -1.0}, gens=[1])
    K = lodf_matrix(net, None, BalanceRule.uniform([1, 5]))
    g = influence_graph(K, 0.005, net)
    assert g.includes_bridge_columns
    doc = json.loads(g.to_json())
    assert doc["threshold"] == 0.005
    assert {"id": 4, "label": "3-4"} in doc["nodes"]
    dot = g.to_dot()
    assert dot.startswith("graph influence {") and '4 [label="3-4"];' in dot
    assert all(f"{a} -- {b};" in dot for a, b in g.edges)
    assert not influence_graph(lodf_matrix(net), 0.005).includes_bridge_columns


def test_cross_region_edges_two_triangles():
    net = cases.two_triangles()
    tp, _ = decomp(net)
    g = InfluenceGraph((1, 2, 5), frozenset({(1, 2), (1, 5)}), 0.1)
    assert cross_region_edges(g, tp, net) == [(1, 5)]


def test_sparsity_two_regions():
    net = cases.two_triangles()
    tp, cd = decomp(net)
    rep = sparsity_report(lodf_matrix(net), tp, cd)
    assert rep.consistent
    assert rep.pairs[PairClass.DIFF_REGION] == 18
    assert rep.nonzero[PairClass.DIFF_REGION] == 0
    assert rep.nonzero[PairClass.SAME_CELL] == 12


def test_sparsity_butterfly(butterfly):
    tp, cd = decomp(butterfly)
    rep = sparsity_report(lodf_matrix(butterfly), tp, cd)
    assert rep.consistent and rep.pairs[PairClass.SAME_REGION_DIFF_CELL] == 18
    assert rep.to_dict()["nonzero"]["SameRegionDiffCell"] == 0


def test_single_cell_dense():
    net = cases.complete(4)
    tp, cd = decomp(net)
    rep = sparsity_report(lodf_matrix(net), tp, cd)
    assert rep.pairs[PairClass.SAME_CELL] == 30
