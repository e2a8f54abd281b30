import json

import numpy as np
import pytest

from gridpart import cases
from gridpart.exceptions import ParseError, UnknownLine, ValidationError, ValidationKind
from gridpart.network import (
    Bus,
    Line,
    Network,
    collapse_dangling_bridges,
    incidence,
    load_injections,
    load_native,
    load_network,
    network_to_dict,
    save_native,
)


def ring4_doc():
    return {
        "baseMVA": 100,
        "slack": 1,
        "buses": [{"id": i, "p": p, "gen": p > 0} for i, p in zip((1, 2, 3, 4), (1, 0, -1, 0))],
        "lines": [{"id": k, "from": u, "to": v, "b": 1.0}
                  for k, (u, v) in enumerate([(1, 2), (2, 3), (3, 4), (4, 1)], start=1)],
    }


def write(tmp_path, doc, name="net.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_load_native_ring(tmp_path):
    net = load_native(write(tmp_path, ring4_doc()))
    assert (net.n, net.m) == (4, 4)
    assert net.slack == 1
    assert list(net.injections) == [1, 0, -1, 0]
    assert net.generators == [1]


def test_round_trip(tmp_path):
    net = load_native(write(tmp_path, ring4_doc()))
    out = tmp_path / "copy.json"
    save_native(net, out)
    again = load_network(out)
    assert network_to_dict(again) == network_to_dict(net)


@pytest.mark.parametrize("mutate, kind", [
    (lambda d: d["lines"].append({"id": 9, "from": 2, "to": 2, "b": 1}), ValidationKind.SELF_LOOP),
    (lambda d: d["lines"].append({"id": 9, "from": 2, "to": 1, "b": 1}), ValidationKind.PARALLEL_LINE),
    (lambda d: d["lines"][0].update(b=0.0), ValidationKind.NON_POSITIVE_SUSCEPTANCE),
    (lambda d: d["lines"][0].update(b=-1.0), ValidationKind.NON_POSITIVE_SUSCEPTANCE),
    (lambda d: d["buses"].append({"id": 9, "p": 0}), ValidationKind.DISCONNECTED),
    (lambda d: d["buses"].append({"id": 1, "p": 0}), ValidationKind.DUPLICATE_BUS_ID),
    (lambda d: d["lines"].append({"id": 1, "from": 1, "to": 3, "b": 1}), ValidationKind.DUPLICATE_LINE_ID),
    (lambda d: d["lines"].append({"id": 9, "from": 1, "to": 7, "b": 1}), ValidationKind.UNKNOWN_BUS),
])
def test_validation_kinds(tmp_path, mutate, kind):
    doc = ring4_doc()
    mutate(doc)
    with pytest.raises(ValidationError) as info:
        load_native(write(tmp_path, doc))
    assert info.value.kind == kind


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_native(bad)
    with pytest.raises(ParseError):
        load_native(write(tmp_path, {"buses": []}))


def test_default_slack_is_lowest_bus():
    net = Network([Bus(5), Bus(3), Bus(8)], [Line(1, 5, 3), Line(2, 3, 8)])
    assert net.slack == 3


def test_incidence_single_line():
    net = cases.from_edges([(1, 2)])
    assert incidence(net)[:, 0].tolist() == [1.0, -1.0]


def test_incidence_columns_and_rank(rng):
    tri = cases.triangle()
    assert np.all(incidence(tri).sum(axis=0) == 0)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        net = cases.random_connected(n, int(rng.integers(n - 1, 2 * n)), rng)
        c = incidence(net)
        assert np.all(c.sum(axis=0) == 0)
        assert np.all((c == 1).sum(axis=0) == 1) and np.all((c == -1).sum(axis=0) == 1)
        assert np.linalg.matrix_rank(c) == n - 1


def test_without_lines_unknown():
    with pytest.raises(UnknownLine):
        cases.triangle().without_lines([7])


def test_collapse_path_to_single_bus():
    net = cases.path(3, p=[1.0, 0.0, -1.0])
    out, rep = collapse_dangling_bridges(net)
    assert out.n == 1 and out.m == 0
    assert out.buses[0].injection == 0.0
    assert rep.absorbed_into[1] == out.buses[0].id and rep.absorbed_into[3] == out.buses[0].id


def test_collapse_ring_with_pendant():
    net = cases.from_edges([(1, 2), (2, 3), (3, 4), (4, 1), (4, 5)], p={5: 0.3, 1: -0.3})
    out, rep = collapse_dangling_bridges(net)
    assert sorted(out.bus_ids) == [1, 2, 3, 4]
    assert out.bus(4).injection == pytest.approx(0.3)
    assert rep.absorbed_into == {5: 4}
    assert rep.removed_lines == [5]


def test_collapse_conserves_injection_and_moves_slack(rng):
    for _ in range(30):
        n = int(rng.integers(3, 15))
        net = cases.random_connected(n, int(rng.integers(n - 1, n + 4)), rng)
        p = rng.normal(size=n)
        net = net.with_injections(p)
        out, rep = collapse_dangling_bridges(net)
        assert out.injections.sum() == pytest.approx(p.sum())
        assert out.n == 1 or min(out.degree().values()) >= 2
        assert out.slack in set(out.bus_ids)


def test_load_injections(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("bus_id,p\n1,0.5\n3,-0.5\n")
    assert load_injections(path) == {1: 0.5, 3: -0.5}
    path.write_text("1,0.5\nx,y\n")
    with pytest.raises(ParseError):
        load_injections(path)
