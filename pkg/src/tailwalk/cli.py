"""``tailwalk`` command-line interface.

Exit codes: 0 success, 1 numerical or truncation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import NumericalError, TailwalkError, TruncationError
from .graph import OracleSpec, RootedGraph, TailedSystem, attach_tail, make_complete, parse_graph, without_tail
from .jost import point_spectrum, spectrum_to_dict
from .propagate import LEAKAGE_TOL, default_grid, fidelity_curve, peak
from .reduction import reduce
from .svg import render_fidelity_svg, render_spectrum_svg


class UsageError(ValueError):
    pass


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def write_output(text: str, path: str | None) -> None:
    """Write to ``path`` atomically (temp file + rename), or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _n_list(text: str) -> list[int]:
    try:
        return [_positive_int(tok) for tok in text.split(",") if tok.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad --n-list: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--t-steps", type=_positive_int, default=512, help="time grid points (default 512)")
    common.add_argument("--tail-length", type=_positive_int, help="override the initial tail truncation")
    common.add_argument("--leakage-tol", type=_positive_float, default=LEAKAGE_TOL, help="boundary leakage tolerance")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--n", type=_positive_int, help="clique order")
    system.add_argument("--graph", help="graph file instead of a clique (edge-list format)")
    system.add_argument("--gamma", default="n", help="oracle weight: 'n', 'n+c', 'n-c' or a number")

    parser = argparse.ArgumentParser(prog="tailwalk", description="Quantum-walk search on graphs with a semi-infinite tail.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", parents=[common, system], help="one search run on K_n")
    p.add_argument("--placement", choices=ex.PLACEMENTS, default="clique-vertex")
    p.add_argument("--t-max", type=_positive_float, help="end of the time grid (default 2*pi/(2 sqrt n))")
    p.add_argument("--format", choices=("json", "csv", "svg"), default="json")

    p = sub.add_parser("oblivious", parents=[common, system], help="compare the three placements")
    p.add_argument("--format", choices=("json",), default="json")

    for name, helptext in (("spectrum", "bound states and Jost polynomials"), ("reduce", "Jacobi reduction")):
        p = sub.add_parser(name, parents=[common, system], help=helptext)
        p.add_argument("--placement", choices=("clique-vertex", "root"), default="clique-vertex")
        p.add_argument("--oracle-vertex", type=_positive_int, help="oracle vertex for --graph input (default 1)")
        p.add_argument("--no-oracle", action="store_true", help="reduce the unmarked operator")
        p.add_argument("--format", choices=("json", "svg") if name == "spectrum" else ("json",), default="json")

    p = sub.add_parser("lowerbound", parents=[common, system], help="M(t) diagnostics on the tailed cone")
    p.add_argument("--w", type=_positive_int, default=1, help="oracle vertex of the base graph")
    p.add_argument("--format", choices=("json", "csv", "svg"), default="json")

    p = sub.add_parser("sweep", parents=[common], help="search runs over a list of n")
    p.add_argument("--n-list", type=_n_list, required=True, help="comma-separated increasing orders")
    p.add_argument("--gamma", default="n")
    p.add_argument("--placement", choices=ex.PLACEMENTS, default="clique-vertex")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("evolve", parents=[common, system], help="fidelity curve on a custom time grid")
    p.add_argument("--placement", choices=ex.PLACEMENTS, default="clique-vertex")
    p.add_argument("--oracle-vertex", type=_positive_int, help="oracle/target vertex for --graph input (default 1)")
    p.add_argument("--no-tail", action="store_true", help="ignore the tail for --graph input")
    p.add_argument("--t-max", type=_positive_float, required=True)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    return parser


def _gamma(args, n: int) -> float:
    try:
        return ex.parse_gamma_rule(args.gamma)(n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require_n(args) -> int:
    if args.n is None:
        raise UsageError(f"{args.command}: --n is required")
    return args.n


def _custom_system(args, tail: bool = True) -> tuple[TailedSystem, OracleSpec | None]:
    """System and oracle for the spectrum/reduce/evolve commands."""
    if args.graph is not None and args.n is not None:
        raise UsageError("give either --n or --graph, not both")
    if args.graph is not None:
        rooted = parse_graph(Path(args.graph).read_text(encoding="utf-8"))
        w = args.oracle_vertex or 1
    else:
        n = _require_n(args)
        if args.oracle_vertex is not None:
            raise UsageError("--oracle-vertex only applies to --graph input")
        rooted = RootedGraph(make_complete(n))
        w = n if args.placement == "root" else 1
        tail = tail and args.placement != "no-tail"
    sys_ = attach_tail(rooted) if tail else without_tail(rooted)
    if getattr(args, "no_oracle", False):
        return sys_, None
    oracle = OracleSpec(w, _gamma(args, rooted.n))
    oracle.check(rooted.n)
    return sys_, oracle


def cmd_search(args) -> str:
    n = _require_n(args)
    if args.graph:
        raise UsageError("search runs on cliques; use 'evolve --graph' for other graphs")
    report, curve = ex.run_search(
        n, _gamma(args, n), args.placement, args.t_steps, args.t_max, args.tail_length, args.leakage_tol
    )
    if args.format == "csv":
        return curve.to_csv()
    if args.format == "svg":
        return render_fidelity_svg(curve.times, curve.values, report.t_star, report.predicted_t,
                                   title=f"search n={n} {args.placement}")
    return dump_json(report.to_dict())


def cmd_oblivious(args) -> str:
    n = _require_n(args)
    return dump_json(ex.run_oblivious(n, _gamma(args, n), args.t_steps))


def cmd_spectrum(args) -> str:
    sys_, oracle = _custom_system(args)
    dec = reduce(sys_, oracle)
    states = point_spectrum(dec.jacobi)
    if args.format == "svg":
        values = [s.lam for s in states] + dec.complement_values.tolist()
        return render_spectrum_svg(values, title=f"point spectrum, n={sys_.n}")
    out = {"experiment": "spectrum", "n": sys_.n, "gamma": None if oracle is None else oracle.gamma,
           "w": None if oracle is None else oracle.w}
    out.update(spectrum_to_dict(dec.jacobi, states))
    out["complement_eigenvalues"] = dec.complement_values.tolist()
    return dump_json(out)


def cmd_reduce(args) -> str:
    sys_, oracle = _custom_system(args)
    out = {"experiment": "reduce", "gamma": None if oracle is None else oracle.gamma,
           "w": None if oracle is None else oracle.w}
    out.update(reduce(sys_, oracle).to_dict())
    return dump_json(out)


def cmd_lowerbound(args) -> str:
    if args.graph is not None and args.n is not None:
        raise UsageError("give either --n or --graph, not both")
    if args.graph is not None:
        g = parse_graph(Path(args.graph).read_text(encoding="utf-8")).graph
    else:
        n = _require_n(args)
        if n < 3:
            raise UsageError("lowerbound --n counts the cone vertex; need n >= 3")
        g = make_complete(n - 1)
    report = ex.run_lower_bound(g, _gamma(args, g.n + 1), args.w, args.t_steps)
    if args.format == "csv":
        return report.to_csv()
    if args.format == "svg":
        return render_fidelity_svg(report.times, report.M, report.t0, title=f"M(t), cone over n={g.n}")
    return dump_json(report.to_dict())


def cmd_sweep(args) -> str:
    try:
        table = ex.sweep(args.n_list, args.gamma, args.placement, args.t_steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return table.to_csv() if args.format == "csv" else dump_json(table.to_dict())


def cmd_evolve(args) -> str:
    sys_, oracle = _custom_system(args, tail=not args.no_tail)
    grid = np.linspace(0.0, args.t_max, args.t_steps)
    curve = fidelity_curve(sys_, oracle, oracle.w, grid, tail_length=args.tail_length, leakage_tol=args.leakage_tol)
    pk = peak(curve)
    if args.format == "csv":
        return curve.to_csv()
    if args.format == "svg":
        return render_fidelity_svg(curve.times, curve.values, pk.t_star, title=f"evolve n={sys_.n}")
    return dump_json({
        "experiment": "evolve",
        "n": sys_.n,
        "gamma": oracle.gamma,
        "w": oracle.w,
        "tail_length": curve.tail_length,
        "t_star": pk.t_star,
        "F_star": pk.F_star,
        "times": curve.times,
        "fidelity": curve.values,
        "leakage": curve.leakage,
    })


COMMANDS = {
    "search": cmd_search,
    "oblivious": cmd_oblivious,
    "spectrum": cmd_spectrum,
    "reduce": cmd_reduce,
    "lowerbound": cmd_lowerbound,
    "sweep": cmd_sweep,
    "evolve": cmd_evolve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
        write_output(text, args.output)
    except (NumericalError, TruncationError) as exc:
        print(f"tailwalk: {exc.stage} failed: {exc}", file=sys.stderr)
        return 1
    except (TailwalkError, ValueError, OSError) as exc:
        stage = getattr(exc, "stage", "input")
        print(f"tailwalk: usage error ({stage}): {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
