"""Command-line front end.

Subcommands ``efficiency``, ``communicability``, ``rank`` and ``perturb``
print one report on stdout, as an aligned table or as JSON.  Exit codes:
0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
import warnings
from typing import Any, Sequence

from . import __version__
from .communicability import communicability_report
from .core import MultiplexTensor, build_supra, load_multiplex, validate_gamma
from .errors import DataError, NumericalError
from .ranking import (
    apply_perturbation,
    compare_measures,
    efficiency_table,
    parse_targets,
    rank_edges_efficiency,
    rank_edges_popularity,
)

log = logging.getLogger("multiplexcomm")

SCHEMA = "multiplexcomm.report/1"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def fmt(x: float) -> str:
    """Fixed 8-significant-digit rendering shared by table and JSON output."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.8g}"


def _num(x: float):
    if x is None or not math.isfinite(x):
        return None
    return float(fmt(x))


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _kmax(text: str):
    return "full" if text == "full" else _positive_int(text)


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, metavar="PATH", help="edge-list file")
    common.add_argument("--format", choices=["single", "multiplex"], default="multiplex",
                        help="input grammar (default: multiplex)")
    common.add_argument("--undirected", action="store_true", help="treat every line as an undirected edge")
    common.add_argument("--gamma", type=_positive_float, default=1.0, help="inter-layer coupling (default: 1)")
    common.add_argument("--kmax", type=_kmax, default="full", metavar="{INT,full}",
                        help="edge budget for path lengths (default: full)")
    common.add_argument("--output", choices=["table", "json"], default="table")
    common.add_argument("--tol", type=_positive_float, default=None,
                        help="relative tolerance of the Krylov exponential (default: 1e-8)")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    common.add_argument("--top", type=_positive_int, default=1, help="recommendations to report (default: 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="timings and diagnostics on stderr")

    parser = argparse.ArgumentParser(prog="multiplexcomm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("efficiency", parents=[common], help="global K-efficiency table with chosen edges")
    sub.add_parser("communicability", parents=[common], help="total and Perron communicability")
    rank = sub.add_parser("rank", parents=[common], help="rank edges to strengthen")
    rank.add_argument("--approach", choices=["efficiency", "popularity"], required=True)
    rank.add_argument("--k", type=_kmax, default=None, metavar="{INT,full}",
                      help="edge budget for the efficiency approach (default: --kmax)")
    rank.add_argument("--unweighted", action="store_true",
                      help="popularity: rank by Wilkinson entries without the weight factor")
    pert = sub.add_parser("perturb", parents=[common], help="compare measures before/after strengthening edges")
    pert.add_argument("--edge", action="append", default=[], metavar="LAYER:SRC:DST",
                      help="edge to strengthen, by file labels (repeatable)")
    mode = pert.add_mutually_exclusive_group()
    mode.add_argument("--add", type=float, default=None, help="amount added to each weight (default: 1)")
    mode.add_argument("--scale", type=_positive_float, default=None, help="factor applied to each weight")
    return parser


# ---------------------------------------------------------------------------
# report assembly


def _dataset(args, t: MultiplexTensor) -> dict[str, Any]:
    return {
        "input": args.input,
        "n_vertices": t.n_vertices,
        "n_layers": t.n_layers,
        "n_entries": t.n_entries,
        "directed": t.directed,
        "gamma": _num(args.gamma),
    }


def _rec(r, t) -> dict[str, Any]:
    d = r.labelled(t)
    d["score"] = _num(d["score"])
    return d


def cmd_efficiency(args, t: MultiplexTensor) -> dict[str, Any]:
    tab = efficiency_table(t, args.gamma, args.kmax, args.top, args.threads)
    rows = [
        {
            "k": r.k,
            "efficiency": _num(r.efficiency),
            "rho": _num(r.rho),
            "picks": [_rec(x, t) for x in r.recommendations],
        }
        for r in reversed(tab.rows)
    ]
    return {
        "stable_k": tab.stable_k,
        "final_k": tab.final_k,
        "efficiency": _num(tab.efficiency),
        "rows": rows,
        "violations": tab.violations,
    }


def cmd_communicability(args, t: MultiplexTensor) -> dict[str, Any]:
    rep = communicability_report(build_supra(t, args.gamma), tol=args.tol)
    return {
        "size": rep.size,
        "tc": _num(rep.tc),
        "pc": _num(rep.pc),
        "pc_struct": _num(rep.pc_struct),
        "rho": _num(rep.rho),
        "exp0_rho": _num(math.exp(rep.log_exp0_rho) if rep.log_exp0_rho < 709 else math.inf),
        "kappa": _num(rep.kappa),
        "kappa_struct": _num(rep.kappa_struct),
        "bound_lo": _num(rep.bound_lo),
        "bound_hi": _num(rep.bound_hi),
        "bound_hi_struct": _num(rep.bound_hi_struct),
        "approx_ratio": _num(rep.approx_ratio),
        "gap_ratio": _num(rep.gap_ratio),
        "log_tc": _num(rep.log_tc),
        "log_pc": _num(rep.log_pc),
        "log_pc_struct": _num(rep.log_pc_struct),
        "violations": rep.violations,
    }


def cmd_rank(args, t: MultiplexTensor) -> dict[str, Any]:
    if args.approach == "efficiency":
        k = args.k if args.k is not None else args.kmax
        recs = rank_edges_efficiency(t, args.gamma, k, args.top, args.threads)
    else:
        recs = rank_edges_popularity(t, args.gamma, args.top, weighted=not args.unweighted)
    return {"approach": args.approach, "recommendations": [_rec(r, t) for r in recs]}


def cmd_perturb_compare(args, t: MultiplexTensor) -> dict[str, Any]:
    targets = parse_targets(t, args.edge)
    if targets:
        if args.scale is not None:
            after = apply_perturbation(t, targets, scale=args.scale)
        else:
            after = apply_perturbation(t, targets, add=1.0 if args.add is None else args.add)
    else:
        after = t
    cmp = compare_measures(t, after, args.gamma, args.kmax, args.threads)

    def side(m):
        return {
            "efficiency": _num(m.efficiency),
            "tc": _num(m.tc),
            "log_tc": _num(m.log_tc),
            "rho_supra": _num(m.rho_supra),
            "rho_efficiency": _num(m.rho_efficiency),
            "stable_k": m.stable_k,
        }

    return {
        "edges": list(args.edge),
        "mode": "scale" if args.scale is not None else "add",
        "amount": _num(args.scale if args.scale is not None else (1.0 if args.add is None else args.add)),
        "before": side(cmp.before),
        "after": side(cmp.after),
        "delta": {k: _num(v) for k, v in cmp.delta.items()},
        "warnings": cmp.warnings,
    }


COMMANDS = {
    "efficiency": cmd_efficiency,
    "communicability": cmd_communicability,
    "rank": cmd_rank,
    "perturb": cmd_perturb_compare,
}


# ---------------------------------------------------------------------------
# rendering


def _cell(v) -> str:
    if isinstance(v, float):
        return fmt(v)
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, list):
        return ",".join(_cell(x) for x in v) or "-"
    return str(v)


def _pick(p: dict) -> str:
    arrow = "<->" if p["undirected"] else "->"
    return f"({p['source']}{arrow}{p['target']}) layers {','.join(p['layers'])} score {fmt(p['score'])}"


def render_table(report: dict[str, Any]) -> str:
    out: list[str] = []
    ds = report["dataset"]
    out.append(f"# {report['command']}: {ds['input']}")
    out.append(
        f"N={ds['n_vertices']} L={ds['n_layers']} entries={ds['n_entries']} "
        f"directed={_cell(ds['directed'])} gamma={_cell(ds['gamma'])}"
    )
    body = report["result"]
    cmd = report["command"]
    if cmd == "efficiency":
        out.append(f"stable K = {body['stable_k']}, final K = {body['final_k']}, e = {_cell(body['efficiency'])}")
        out.append(f"{'K':>4} | {'e^K':>14} | {'rho_K':>14} | chosen (h,k)")
        for r in body["rows"]:
            picks = "; ".join(_pick(p) for p in r["picks"])
            out.append(f"{r['k']:>4} | {_cell(r['efficiency']):>14} | {_cell(r['rho']):>14} | {picks}")
        if body["violations"]:
            out.append("violations: " + ", ".join(body["violations"]))
    elif cmd == "communicability":
        width = max(len(k) for k in body)
        for k, v in body.items():
            out.append(f"{k:<{width}}  {_cell(v)}")
    elif cmd == "rank":
        out.append(f"approach: {body['approach']}")
        for p in body["recommendations"]:
            k = f" K={p['k']}" if p["k"] is not None else ""
            out.append(f"{p['rank']:>3}. {_pick(p)}{k}")
    elif cmd == "perturb":
        out.append(f"edges: {_cell(body['edges'])} ({body['mode']} {_cell(body['amount'])})")
        keys = list(body["before"])
        out.append(f"{'measure':<16} {'before':>16} {'after':>16} {'delta':>16}")
        for k in keys:
            out.append(
                f"{k:<16} {_cell(body['before'][k]):>16} {_cell(body['after'][k]):>16} "
                f"{_cell(body['delta'].get(k)):>16}"
            )
        for w in body["warnings"]:
            out.append(f"warning: {w}")
    return "\n".join(out) + "\n"


def render(report: dict[str, Any], output: str) -> str:
    if output == "json":
        return json.dumps(report, indent=2, allow_nan=False) + "\n"
    return render_table(report)


def run(args) -> dict[str, Any]:
    validate_gamma(args.gamma)
    t0 = time.perf_counter()
    t = load_multiplex(args.input, args.format, directed=not args.undirected)
    log.info("loaded %s in %.3fs", args.input, time.perf_counter() - t0)
    t1 = time.perf_counter()
    result = COMMANDS[args.command](args, t)
    log.info("%s took %.3fs", args.command, time.perf_counter() - t1)
    return {"schema": SCHEMA, "command": args.command, "dataset": _dataset(args, t), "result": result}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    warnings.simplefilter("default")
    try:
        report = run(args)
    except FileNotFoundError as exc:
        print(f"multiplexcomm: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, OSError, UnicodeDecodeError) as exc:
        print(f"multiplexcomm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"multiplexcomm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(render(report, args.output))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
