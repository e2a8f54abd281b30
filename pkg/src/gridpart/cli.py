"""Command-line interface: ``gridpart <command> <network file> [options]``.

Network files are native JSON or Matpower ``.m``. Primary output goes to
stdout unless ``--output`` is given; secondary files (LODF column kinds,
switching flow changes) are written next to ``--output`` or to the paths
passed explicitly.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from .balance import load_weights, uniform_generator_rule
from .exceptions import GridpartError
from .flow import solve_dc
from .localize import influence_graph
from .lodf import lodf_matrix
from .network import collapse_dangling_bridges, load_injections, load_network
from .partition import cell_decomposition, irreducible_tree_partition
from .perturb import PerturbationSpec, perturb
from .switching import enumerate_bridging_cuts, evaluate_switch
from . import verify as _verify
from .validation import DEFAULT_TOL, check_injections


# -- shared helpers ----------------------------------------------------------


def _common(parser: argparse.ArgumentParser, *, injection: bool = False, rule: bool = False):
    parser.add_argument("network", help="network file (.json native or .m Matpower)")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="zero tolerance (per unit)")
    parser.add_argument("--perturb", metavar="SPEC", default=None,
                        help="perturb susceptances, e.g. eps=1e-3,dist=uniform,seed=42")
    parser.add_argument("--collapse-dangling", action="store_true",
                        help="fold degree-1 buses into their neighbours first")
    parser.add_argument("-o", "--output", default=None, help="write primary output here")
    if injection:
        parser.add_argument("--injection", default=None, metavar="CSV",
                            help="bus_id,p file overriding the network's injections")
    if rule:
        parser.add_argument("--rule", default=None,
                            help="balance rule for bridge outages: uniform-gen or weights:<csv>")


def _load(args):
    net = load_network(args.network)
    if getattr(args, "injection", None):
        net = net.with_injections(load_injections(args.injection))
    if args.collapse_dangling:
        net, _ = collapse_dangling_bridges(net)
    if args.perturb:
        net = perturb(net, PerturbationSpec.parse(args.perturb))
    return net


def _rule(spec, net):
    if spec is None:
        return None
    if spec == "uniform-gen":
        return uniform_generator_rule(net)
    if spec.startswith("weights:"):
        return load_weights(spec.split(":", 1)[1])
    raise argparse.ArgumentTypeError(f"unknown rule {spec!r}")


def _open_out(path):
    return open(path, "w", newline="") if path else _Stdout()


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _sibling(path, suffix):
    return str(Path(path).with_suffix(suffix)) if path else None


def _line_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated line ids, got {text!r}") \
            from None


# -- commands ----------------------------------------------------------------


def cmd_partition(args) -> int:
    net = _load(args)
    tp = irreducible_tree_partition(net)
    cd = cell_decomposition(net, tp)
    doc = {
        "regions": [sorted(r) for r in tp.regions],
        "bridges": sorted(tp.bridges),
        "cells": [sorted(c) for c in cd.cells],
        "cut_vertices": sorted(cd.cut_vertices),
    }
    with _open_out(args.output) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_flow(args) -> int:
    net = _load(args)
    sol = solve_dc(net, tol=args.tol, backend=args.backend)
    with _open_out(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["line_id", "from", "to", "susceptance", "flow"])
        for ln in net.lines:
            w.writerow([ln.id, ln.source, ln.target, repr(ln.susceptance),
                        repr(float(sol.branch_flow[ln.id]))])
    return 0


def cmd_lodf(args) -> int:
    net = _load(args)
    K = lodf_matrix(net, None, _rule(args.rule, net), tol=args.tol, on_bridge_error="skip")
    ids = [int(k) for k in K.line_ids]
    with _open_out(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["line_id"] + ids)
        for i, f in enumerate(ids):
            row = []
            for j in range(len(ids)):
                v = K.entries[i, j]
                if v != v:  # NaN: diagonal or undefined column
                    row.append("")
                elif args.threshold is not None and abs(v) < args.threshold:
                    row.append("0")
                else:
                    row.append(repr(float(v)))
            w.writerow([f] + row)
    kinds_path = args.kinds or _sibling(args.output, ".kinds.json")
    if kinds_path:
        doc = {"kinds": K.kinds_dict(), "context": _jsonable(K.context)}
        Path(kinds_path).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def cmd_verify(args) -> int:
    nets = []
    if args.network != "-":
        net = _load(args)
        if _verify.fits_oracle(net):
            nets.append(net)
        else:
            print(f"SKIP {net.name}: n={net.n}, m={net.m} exceeds the enumeration limits")
    nets.extend(_verify.random_suite(args.count, max_n=args.max_n, seed=args.seed))
    ok = True
    worst = 0.0
    start = time.perf_counter()
    for net in nets:
        res = _verify.check_network(net)
        worst = max(worst, res.max_discrepancy)
        if not res.passed(args.tol):
            ok = False
            print(f"FAIL {res.name}: pairs={res.pairs} max discrepancy={res.max_discrepancy:.3e} "
                  f"exact mismatches={res.exact_mismatches}")
    status = "PASS" if ok else "FAIL"
    print(f"{status} {len(nets)} networks, max discrepancy {worst:.3e} "
          f"({time.perf_counter() - start:.1f} s)")
    return 0 if ok else 1


def cmd_influence(args) -> int:
    net = _load(args)
    vec = check_injections(net, None, tol=args.tol)
    K = lodf_matrix(net, vec, _rule(args.rule, net), tol=args.tol, on_bridge_error="skip")
    g = influence_graph(K, args.threshold, net)
    if args.dot:
        Path(args.dot).write_text(g.to_dot())
    if args.json:
        Path(args.json).write_text(g.to_json(indent=2) + "\n")
    with _open_out(args.output) as fh:
        if not (args.dot or args.json) or args.output:
            fh.write(g.to_dot())
        else:
            fh.write(f"lines={len(g.nodes)} edges={g.n_edges} threshold={g.threshold:g} "
                     f"bridge_columns={'yes' if g.includes_bridge_columns else 'no'}\n")
    return 0


def _default_rule(spec, net):
    if spec is not None:
        return _rule(spec, net)
    return uniform_generator_rule(net) if net.generators else None


def cmd_switch(args) -> int:
    net = _load(args)
    ev = evaluate_switch(net, None, args.off, _default_rule(args.rule, net), args.threshold,
                         tol=args.tol)
    with _open_out(args.output) as fh:
        json.dump(_jsonable(ev.to_dict()), fh, indent=2)
        fh.write("\n")
    csv_path = args.csv or _sibling(args.output, ".flows.csv")
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(ev.csv_rows())
    return 0


def cmd_switch_search(args) -> int:
    net = _load(args)
    cuts = enumerate_bridging_cuts(net, args.k, minimal=not args.all, seed=args.seed,
                                   limit=args.limit)
    with _open_out(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "lines", "n_regions", "region_sizes", "balance"])
        for rank, cut in enumerate(cuts, start=1):
            w.writerow([rank, " ".join(map(str, cut.lines)), cut.n_regions,
                        " ".join(map(str, cut.region_sizes)), f"{cut.balance:.4f}"])
    return 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridpart", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="tree partition, bridges, cells and cut vertices (JSON)")
    _common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("flow", help="DC branch flows (CSV)")
    _common(p, injection=True)
    p.add_argument("--backend", choices=("dense", "sparse"), default="dense")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("lodf", help="outage factor matrix (CSV, row = monitored line)")
    _common(p, injection=True, rule=True)
    p.add_argument("--threshold", type=float, default=None,
                   help="write entries below this magnitude as 0")
    p.add_argument("--kinds", default=None, help="path of the JSON column-kind sidecar")
    p.set_defaults(func=cmd_lodf)

    p = sub.add_parser("verify", help="compare the matrix route with the forest enumeration")
    _common(p)
    p.add_argument("--max-n", type=int, default=6, help="largest random network size")
    p.add_argument("--count", type=int, default=50, help="number of random networks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("influence", help="influence graph among lines (DOT / JSON)")
    _common(p, injection=True, rule=True)
    p.add_argument("--threshold", type=float, default=0.005)
    p.add_argument("--dot", default=None, help="write DOT here")
    p.add_argument("--json", default=None, help="write JSON here")
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("switch", help="evaluate switching a set of lines off (JSON + CSV)")
    _common(p, injection=True, rule=True)
    p.add_argument("--off", type=_line_list, required=True, help="comma-separated line ids")
    p.add_argument("--threshold", type=float, default=0.005)
    p.add_argument("--csv", default=None, help="path of the per-line flow change CSV")
    p.set_defaults(func=cmd_switch)

    p = sub.add_parser("switch-search", help="list line sets whose removal adds regions")
    _common(p)
    p.add_argument("--k", type=int, default=3, choices=(1, 2, 3), help="largest set size")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--all", action="store_true", help="include non-minimal sets")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_switch_search)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed the pipe (e.g. ``| head``); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (GridpartError, OSError, ValueError) as exc:
        print(f"gridpart: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
