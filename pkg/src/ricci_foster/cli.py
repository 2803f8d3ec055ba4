"""
Command-line front end.

Exit codes: 0 success, 1 invalid input or options, 2 checks ran and some
failed, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from .analysis import einstein_check, einstein_solve, verify_all
from .curvature import curvature_report
from .errors import GraphError, InvalidConfig, NoConvergence, NumericalFailure, RicciFosterError
from .flow import UNTIL_COLLAPSE, FlowConfig, flow
from .graph import subdivide
from .io import atomic_write, dumps_graph, format_float, graph_from_dict, parse_edgelist
from .resistance import resistance_profile

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with "checks failed".
    def error(self, message):
        raise UsageError(message)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _detect_format(path, text, fmt):
    if fmt != "auto":
        return fmt
    if path.endswith(".json") or text.lstrip().startswith(("{", "[")):
        return "json"
    return "edgelist"


def load_graphs(path: str, fmt: str = "auto") -> list:
    """One graph, or several from a corpus file (a JSON list or ``{"graphs": [...]}``)."""
    text = _read_text(path)
    if _detect_format(path, text, fmt) == "edgelist":
        return [parse_edgelist(text)]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from None
    if isinstance(data, dict) and "graphs" in data:
        data = data["graphs"]
    if isinstance(data, list):
        return [graph_from_dict(item) for item in data]
    return [graph_from_dict(data)]


def load_graph(path: str, fmt: str = "auto"):
    graphs = load_graphs(path, fmt)
    if len(graphs) != 1:
        raise GraphError(f"expected one graph in {path}, found {len(graphs)}")
    return graphs[0]


def _emit(text: str, out: str | None):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    for row in rows:
        buf.write(",".join(format_float(x) if isinstance(x, float) else str(x) for x in row))
        buf.write("\n")
    return buf.getvalue()


def cmd_curvature(args) -> int:
    g = load_graph(args.graph, args.input_format)
    rep = curvature_report(g)
    if args.format == "json":
        _emit(json.dumps(rep.as_dict(), indent=2) + "\n", args.out)
        return EXIT_OK
    rows = [("edge_id", "u", "v", "length", "curvature", "foster")]
    rows += [(e.id, e.u, e.v, float(e.length), float(k), float(f))
             for e, k, f in zip(g.edges, rep.curvature, rep.foster)]
    rows += [(), ("vertex", "scalar_curvature")]
    rows += [(v, float(p)) for v, p in rep.scalar.items()]
    rows += [(), ("total_curvature", "total_foster", "vertices", "edges"),
             (rep.total, float(rep.foster.sum()), g.n_vertices, g.n_edges)]
    _emit(_csv(rows), args.out)
    return EXIT_OK


def cmd_resistance(args) -> int:
    g = load_graph(args.graph, args.input_format)
    prof = resistance_profile(g)
    pairs = [(x, y, prof.omega(x, y)) for i, x in enumerate(g.vertices) for y in g.vertices[i + 1:]]
    if args.format == "json":
        _emit(json.dumps([{"x": x, "y": y, "omega": w} for x, y, w in pairs], indent=2) + "\n", args.out)
    else:
        _emit(_csv([("x", "y", "omega")] + pairs), args.out)
    return EXIT_OK


def _trace_csv(trace) -> str:
    rows = [("t", "edge_id", "length", "curvature")]
    for smp in trace.samples:
        for eid, length, k in sorted(zip(smp.edge_ids, smp.lengths, smp.curvatures)):
            rows.append((float(smp.t), eid, float(length), float(k)))
    return _csv(rows)


def cmd_flow(args) -> int:
    t_end = args.t_end
    if t_end != UNTIL_COLLAPSE:
        try:
            t_end = float(t_end)
        except ValueError:
            raise InvalidConfig(f"--t-end must be a number or {UNTIL_COLLAPSE!r}, got {t_end!r}") from None
    cfg = FlowConfig(t_end=t_end, dt=args.dt, sample_stride=args.sample_stride,
                     collapse_epsilon=args.epsilon, surgery_enabled=args.surgery)
    g = load_graph(args.graph, args.input_format)
    trace = flow(g, cfg)
    if args.out:
        atomic_write(args.out, _trace_csv(trace))
    if args.events:
        atomic_write(args.events, json.dumps([ev.as_dict() for ev in trace.events], indent=2) + "\n")
    sys.stdout.write(json.dumps(trace.summary(), indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    graphs = load_graphs(args.graph, args.input_format)
    seed = int(os.environ.get("RFC_SEED", args.seed))
    reports = [verify_all(g, tol=args.tol, seed=seed + k) for k, g in enumerate(graphs)]
    passed = all(r.passed for r in reports)
    if len(reports) == 1:
        payload = reports[0].to_dict()
    else:
        payload = {"passed": passed, "graphs": [r.to_dict() for r in reports]}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK if passed else EXIT_CHECK


def cmd_subdivide(args) -> int:
    g = load_graph(args.graph, args.input_format)
    _emit(dumps_graph(subdivide(g, args.edge, args.split)) + "\n", args.out)
    return EXIT_OK


def cmd_einstein(args) -> int:
    g = load_graph(args.graph, args.input_format)
    if not args.solve:
        cert = einstein_check(g, args.tol)
        _emit(json.dumps(cert.to_dict(), indent=2) + "\n", args.out)
        return EXIT_OK if cert.is_einstein else EXIT_CHECK
    try:
        lengths, cert = einstein_solve(g, max_iter=args.max_iter, tol=args.tol, theta=args.theta)
        code = EXIT_OK
    except NoConvergence as exc:
        lengths, cert, code = exc.lengths, exc.certificate, EXIT_CHECK
    payload = cert.to_dict()
    payload["lengths"] = lengths
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ricci-foster", description="Resistance curvature and Ricci flow on weighted graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("graph", help="graph file, or '-' for standard input")
        sp.add_argument("--input-format", choices=["auto", "json", "edgelist"], default="auto")
        sp.add_argument("-o", "--out", help="write the main output here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("curvature", cmd_curvature, "edge, Foster and vertex curvatures")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp = add("resistance", cmd_resistance, "all-pairs effective resistance")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = sub.add_parser("flow", help="integrate the Ricci-Foster flow")
    sp.add_argument("graph")
    sp.add_argument("--input-format", choices=["auto", "json", "edgelist"], default="auto")
    sp.add_argument("--t-end", default=UNTIL_COLLAPSE, help=f"stop time or '{UNTIL_COLLAPSE}'")
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--sample-stride", type=int, default=10)
    sp.add_argument("--epsilon", type=float, default=1e-9, help="collapse threshold")
    sp.add_argument("--surgery", action="store_true", help="contract collapsed edges and continue")
    sp.add_argument("--out", help="trace CSV path")
    sp.add_argument("--events", help="surgery events JSON path")
    sp.set_defaults(func=cmd_flow)

    sp = add("verify", cmd_verify, "run every invariant check (exit 2 if any fails)")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized checks (RFC_SEED overrides)")

    sp = add("subdivide", cmd_subdivide, "split one edge at a new vertex")
    sp.add_argument("--edge", required=True)
    sp.add_argument("--split", type=float, default=0.5)

    sp = add("einstein", cmd_einstein, "Einstein certificate (exit 2 if not Einstein)")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--solve", action="store_true", help="search for Einstein lengths")
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--theta", type=float, default=0.5)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        # Overflow surfaces as NumericalFailure below; numpy's warnings add nothing.
        with np.errstate(all="ignore"):
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RicciFosterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
