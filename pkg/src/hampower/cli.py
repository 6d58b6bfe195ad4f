"""Command-line front end: ``hampower <subcommand> [flags]``.

Exit codes: 0 on success, 1 on a domain error (one JSON line on stderr),
2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from fractions import Fraction

from . import __version__
from ._backend import BACKEND
from .decomposition import decompose_cycle, decompose_path, verify_decomposition
from .densities import (
    DensityError,
    RandomModel,
    braid_m_closed_form,
    density_profile,
    janson_upper_bound,
)
from .experiments import (
    BUILD_ID,
    ExperimentError,
    c_prime,
    c_prime_from_q,
    clique_concentration,
    find_p_half,
    fit_threshold_exponent,
    load_config,
    lower_bound_audit,
    path_edge_audit,
    success_curve,
)
from .gadgets import (
    LowerBoundSpec,
    ParameterError,
    ProblemParams,
    b_minus,
    braid,
    lower_bound_gadget,
    multi_braid,
)
from .graph import GraphError, LabeledGadget, Label, dumps_edge_list, power_cycle, power_path, read_edge_list
from .search import SearchBudget, SearchError, contains_power_ham_cycle

DOMAIN_ERRORS = (GraphError, ParameterError, DensityError, SearchError, ExperimentError, OSError)


def _emit(obj, mode: str, out) -> None:
    """Print ``obj`` (a dict or a list of flat dicts) in the chosen mode."""
    if mode == "json":
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    elif mode == "csv":
        rows = obj if isinstance(obj, list) else [_flatten(obj)]
        if not rows:
            return
        w = csv.DictWriter(out, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    else:
        rows = obj if isinstance(obj, list) else [obj]
        for i, r in enumerate(rows):
            if i:
                out.write("\n")
            for key, val in _flatten(r).items():
                out.write(f"{key}: {val}\n")


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            flat[key] = json.dumps(v)
        else:
            flat[key] = v
    return flat


def _number(text: str) -> float:
    """Float flag that also takes fractions such as ``-2/3``."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _params(args) -> ProblemParams:
    return ProblemParams.from_flags(args.k, args.l, args.r, args.m)


def _read_graph(path: str):
    with open(path) as fh:
        return read_edge_list(fh)


def _gadget_json(g: LabeledGadget) -> dict:
    return {
        "n": g.n,
        "e": g.graph.edge_count,
        "edges": [list(e) for e in g.graph.edges()],
        "labels": [[lab.role, lab.segment, lab.position] for lab in g.labels],
    }


def _dump_gadget(g: LabeledGadget, prefix: str) -> None:
    with open(prefix + ".edges", "w") as fh:
        fh.write(dumps_edge_list(g.graph))
    with open(prefix + ".labels", "w") as fh:
        fh.write(g.dumps_labels())


def cmd_gadget(args, out) -> None:
    kind = args.kind
    if kind == "braid":
        g = braid(args.l, args.r, args.t)
    elif kind == "multi-braid":
        g = multi_braid(args.s, args.l, args.r, args.t)
    elif kind == "b-minus":
        g = b_minus(_params(args))
    elif kind == "lower-bound":
        if args.n is None:
            raise ParameterError("lower-bound needs --n")
        g = lower_bound_gadget(LowerBoundSpec(args.n, args.k, Fraction(args.eps), args.m))
    else:
        if args.n is None or args.m is None:
            raise ParameterError(f"{kind} needs --n and --m")
        base = power_path(args.n, args.m) if kind == "power-path" else power_cycle(args.n, args.m)
        g = LabeledGadget(base, tuple(Label("vertex", 0, v) for v in range(args.n)))
    if args.dump:
        _dump_gadget(g, args.dump)
    _emit(_gadget_json(g) if args.output != "csv" else [{"u": u, "v": v} for u, v in g.graph.edges()], args.output, out)


def cmd_decompose(args, out) -> None:
    params = _params(args)
    d = decompose_cycle(params, args.t) if args.cycle else decompose_path(params, args.t)
    rep = verify_decomposition(d)
    if args.dump:
        _dump_gadget(d.base, args.dump + ".base")
        _dump_gadget(d.braids, args.dump + ".braids")
    res = {"k": params.k, "l": params.l, "r": params.r, "m": params.m, "t": args.t, "cycle": args.cycle, "n": d.n}
    res.update(rep.to_json())
    _emit(res, args.output, out)


def cmd_density(args, out) -> None:
    if args.graph:
        g = _read_graph(args.graph)
        closed = None
    else:
        try:
            l, r, t = (int(x) for x in args.braid.split(","))
        except ValueError:
            raise ParameterError(f"--braid wants l,r,t; got {args.braid!r}") from None
        g = multi_braid(args.copies, l, r, t).graph
        closed = braid_m_closed_form(l, r, t) if args.copies == 1 else None
    if args.p is not None:
        model = RandomModel(args.n, args.p)
    elif args.C is not None and args.exponent is not None:
        model = RandomModel.scaled(args.n, args.C, args.exponent)
    else:
        raise ParameterError("give --p, or --C together with --exponent")
    res = density_profile(g, model).to_json()
    res["n"] = model.n
    res["p"] = model.p
    if args.braid:
        res["m_closed_form"] = str(closed) if closed is not None else None
    if args.tau is not None:
        res["janson_bound"] = janson_upper_bound(args.tau, g, model)
    _emit(res, args.output, out)


def cmd_search(args, out) -> None:
    g = _read_graph(args.graph)
    out_ = contains_power_ham_cycle(g, args.m, SearchBudget(args.max_nodes, args.max_ms), use_lp=not args.no_lp)
    res = out_.to_json(with_time=not args.no_time)
    res["n"] = g.n
    res["m"] = args.m
    res["backend"] = BACKEND
    _emit(res, args.output, out)


def cmd_experiment(args, out) -> None:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    jsonl = open(args.jsonl, "w") if args.jsonl else None
    try:
        if args.mode == "curve":
            sink = jsonl if jsonl is not None else (out if args.output == "json" else None)
            points = success_curve(cfg, workers=args.workers, sink=sink, with_time=args.timing)
            rows = [pt.to_row() for pt in points]
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    _emit(rows, "csv", fh)
            if args.output != "json" or jsonl is not None:
                _emit(rows, args.output, out)
        else:
            results = []
            for n in cfg.n_values:
                results.append(find_p_half(cfg, n, workers=args.workers, sink=jsonl))
            res = {"config_hash": cfg.config_hash(), "points": [r.to_json() for r in results]}
            if len(results) >= 3:
                slope, err = fit_threshold_exponent([(r.n, r.p_half) for r in results])
                res["slope"] = slope
                res["stderr"] = err
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    _emit([pt.to_row() for r in results for pt in r.probes], "csv", fh)
            _emit(res, args.output, out)
    finally:
        if jsonl is not None:
            jsonl.close()


def cmd_audit(args, out) -> None:
    if args.kind == "lower-bound":
        if args.n is None:
            raise ParameterError("lower-bound audit needs --n")
        params = _params(args)
        spec = LowerBoundSpec(args.n, params.k, Fraction(args.eps), params.m)
        rep = lower_bound_audit(spec, params, RandomModel(args.n, args.p), args.seed)
        _emit(rep.to_json(), args.output, out)
    elif args.kind == "path-edges":
        if args.m is None or args.q is None:
            raise ParameterError("path-edges audit needs --m and --q")
        _emit(path_edge_audit(args.m, args.q).to_json(), args.output, out)
    elif args.kind == "c-prime":
        eps = Fraction(args.eps)
        q, excess = c_prime_from_q(eps)
        _emit({"eps": str(eps), "c_prime": str(c_prime(eps)), "q": q, "excess_at_q": str(excess)}, args.output, out)
    else:
        if args.n is None:
            raise ParameterError("concentration audit needs --n")
        rep = clique_concentration(args.n, args.C, args.exponent, args.trials, args.seed)
        _emit(rep.to_json(), args.output, out)


def _param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--m", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=["json", "csv", "human"], default="json")

    parser = argparse.ArgumentParser(prog="hampower", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{BUILD_ID} ({BACKEND} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gadget", parents=[common], help="build a named graph family")
    p.add_argument(
        "--kind",
        choices=["braid", "multi-braid", "b-minus", "lower-bound", "power-path", "power-cycle"],
        default="braid",
    )
    _param_flags(p)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--s", type=int, default=1, help="copies for multi-braid")
    p.add_argument("--n", type=int)
    p.add_argument("--eps", default="1/16")
    p.add_argument("--dump", metavar="PREFIX", help="write PREFIX.edges and PREFIX.labels")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("decompose", parents=[common], help="build and verify the braid decomposition")
    _param_flags(p)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--cycle", action="store_true")
    p.add_argument("--dump", metavar="PREFIX")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("density", parents=[common], help="Psi/Phi/d/m profile of a graph")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--braid", metavar="L,R,T")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--exponent", type=_number)
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("search", parents=[common], help="exact search for C_n^m")
    p.add_argument("--graph", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--max-nodes", type=int, default=2_000_000)
    p.add_argument("--max-ms", type=int, default=60_000)
    p.add_argument("--no-lp", action="store_true", help="skip the window-packing LP certificate")
    p.add_argument("--no-time", action="store_true", help="omit elapsed time (byte-stable output)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("experiment", parents=[common], help="Monte-Carlo curve or threshold bisection")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=["curve", "threshold"], default="curve")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, help="override the config's master seed")
    p.add_argument("--jsonl", help="write trial records here")
    p.add_argument("--csv", help="write the summary CSV here")
    p.add_argument("--timing", action="store_true", help="include elapsed_ms in records")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("audit", parents=[common], help="counting certificates and edge-count checks")
    p.add_argument("--kind", choices=["lower-bound", "path-edges", "c-prime", "concentration"], default="lower-bound")
    _param_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--eps", default="1/16")
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--q", type=int)
    p.add_argument("--C", type=float, default=0.5)
    p.add_argument("--exponent", type=_number, default=-2 / 3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except DOMAIN_ERRORS as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
