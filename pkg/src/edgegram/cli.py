"""Command-line front end.

Verbs: gramian, metric, ecm, gradient-check, bounds, stability-interval,
search, stembud, exp-stembud6, exp-er, gen-er.  Systems are read either
from a JSON document {"n","m","A","B"} (--system sys.json) or from a
pair of headerless CSV matrices (--system A.csv --B B.csv).  Exit codes:
0 success, 1 usage error, 2 numerical precondition failure.
"""

from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    global_weight_bound,
    logdet_upper_bounds,
    stability_weight_interval,
    trace_bounds,
    trinv_lower_bounds,
)
from .ecm import compute_ecm, rank_edges, sparsity_pattern
from .ergen import ErConfig, generate_er_system
from .errors import EdgegramError, FileFormatError
from .experiments import run_er_experiment, run_stembud6_experiment
from .fileio import (
    read_stembud_spec_json,
    read_system,
    write_json,
    write_matrix_csv,
    write_records_csv,
    write_system_json,
)
from .gradient import fd_gradient_oracle, metric_gradient
from .netmodel import (
    LAMBDA_MIN,
    LOGDET,
    NEG_TRACE_INV,
    TRACE,
    Horizon,
    evaluate_metric,
    finite_gramian,
    infinite_gramian,
    stability_info,
)
from .search import ecm_guided_search, exhaustive_search, global_estimate
from .stembud import build_stembud, predicted_ecm_diagonals

USAGE_ERROR = 1
NUMERICAL_ERROR = 2

_METRICS = {
    "trace": TRACE,
    "logdet": LOGDET,
    "trinv": NEG_TRACE_INV,
    "lambda-min": LAMBDA_MIN,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; the CLI contract wants 1
    def error(self, message):
        self.print_usage(_sys.stderr)
        _sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _parse_horizon(text: str) -> Horizon:
    if text.lower() in ("inf", "infinite"):
        return Horizon.infinite()
    try:
        return Horizon.finite(int(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"horizon must be a positive integer or 'inf', got {text!r}")


def _parse_edge(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"edge must be 'i,j', got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_inputs(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _add_system_args(p):
    p.add_argument("--system", required=True, help="system JSON file, or adjacency CSV")
    p.add_argument("--B", dest="B_file", default=None, help="input-matrix CSV (with CSV --system)")


def _load_system(args):
    return read_system(args.system, args.B_file)


def _gramian_of(sys_, horizon):
    if horizon.is_finite:
        return finite_gramian(sys_, horizon)
    return infinite_gramian(sys_)


def _emit(payload, args, csv_writer=None):
    """Write payload per --format/--out, or pretty-print to stdout."""
    fmt = getattr(args, "format", "structured")
    out = getattr(args, "out", None)
    if out is None:
        print(_render(payload))
        return
    path = Path(out)
    if path.is_dir():
        path = path / ("result.csv" if fmt == "csv" else "result.json")
    if fmt == "csv":
        if csv_writer is None:
            raise EdgegramError("this command has no CSV rendering; use --format structured")
        csv_writer(path)
    else:
        write_json(path, payload)
    print(path)


def _render(payload, indent=0):
    pad = "  " * indent
    if isinstance(payload, dict):
        lines = []
        for key, value in payload.items():
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                lines.append(_render(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(value)}")
        return "\n".join(lines)
    if isinstance(payload, list):
        return "\n".join(f"{pad}- {_scalar(v) if not isinstance(v, (dict, list)) else chr(10) + _render(v, indent + 1)}" for v in payload)
    return f"{pad}{_scalar(payload)}"


def _scalar(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _cmd_gramian(args):
    sys_ = _load_system(args)
    g = _gramian_of(sys_, args.T)
    if args.out is not None and args.format == "csv":
        write_matrix_csv(args.out, g.W)
        print(args.out)
        return
    payload = {
        "horizon": str(g.horizon),
        "trace": g.trace(),
        "min_eig": g.min_eig,
        "W": g.W.tolist(),
    }
    _emit(payload, args)


def _cmd_metric(args):
    sys_ = _load_system(args)
    g = _gramian_of(sys_, args.T)
    value = evaluate_metric(g, _METRICS[args.metric])
    rho, stable = stability_info(sys_.A)
    _emit({"metric": args.metric, "T": str(args.T), "value": value, "rho": rho, "stable": stable}, args)


def _cmd_ecm(args):
    sys_ = _load_system(args)
    report = compute_ecm(sys_, args.T, _METRICS[args.metric], args.inputs)
    ranked = rank_edges(report, mode=args.rank_mode, sys=sys_)
    pattern = sparsity_pattern(report.total)
    payload = {
        "metric": args.metric,
        "T": str(args.T),
        "inputs": list(report.input_subset),
        "rank_mode": args.rank_mode,
        "ranked_edges": [
            {"from": e.from_node, "to": e.to_node, "value": e.value} for e in ranked[: args.top_k]
        ],
        "sub_diagonals": sorted(pattern.sub_diagonals),
        "super_diagonals": sorted(pattern.super_diagonals),
    }

    def csv_writer(path):
        write_records_csv(
            path,
            ("from", "to", "value"),
            [e.astuple() for e in ranked[: args.top_k]],
        )

    _emit(payload, args, csv_writer)


def _cmd_gradient_check(args):
    sys_ = _load_system(args)
    metric = _METRICS[args.metric]
    G = metric_gradient(sys_, args.T, metric).G
    F = fd_gradient_oracle(sys_, args.T, metric, args.step).G
    scale = float(np.abs(F).max()) or 1.0
    err = float(np.abs(G - F).max()) / scale
    _emit(
        {
            "metric": args.metric,
            "T": str(args.T),
            "fd_step": args.step,
            "max_rel_error": err,
            "max_abs_gradient": float(np.abs(G).max()),
        },
        args,
    )


def _cmd_bounds(args):
    sys_ = _load_system(args)
    tr = trace_bounds(sys_, args.edge, args.w)
    ti = trinv_lower_bounds(sys_, args.edge, args.w)
    ld = logdet_upper_bounds(sys_, args.edge, args.w, args.T.steps or sys_.n)
    payload = {
        "edge": list(args.edge),
        "w": args.w,
        "trace_upper": {
            "unmodified": tr.unmodified_bound,
            "modified": tr.modified_bound,
            "literature": tr.literature_bound,
        },
        "trace_inverse_lower": {"unmodified": ti.unmodified_bound, "modified": ti.modified_bound},
        "logdet_upper": {
            "unmodified": ld.unmodified_bound,
            "modified": ld.modified_bound,
            "sigma": ld.sigma,
            "tau": ld.tau,
        },
        "constants": {
            "alpha": tr.constants.alpha,
            "beta": tr.constants.beta,
            "gamma": tr.constants.gamma,
            "gamma_bar": tr.constants.gamma_bar,
            "tr_HX": tr.constants.trHX,
        },
    }
    _emit(payload, args)


def _cmd_stability_interval(args):
    sys_ = _load_system(args)
    interval = stability_weight_interval(sys_, args.edge)
    payload = {
        "edge": list(args.edge),
        "lower": interval.lower,
        "upper": interval.upper,
        "bounded": interval.bounded,
        "global_bound": global_weight_bound(sys_),
    }
    _emit(payload, args)


def _cmd_search(args):
    sys_ = _load_system(args)
    metric = _METRICS[args.metric]
    if args.top_k is None:
        report = exhaustive_search(sys_, args.T, metric, args.w)
    else:
        report = ecm_guided_search(sys_, args.T, metric, args.w, args.top_k)
    payload = {
        "metric": args.metric,
        "T": str(args.T),
        "w": args.w,
        "mode": "exhaustive" if args.top_k is None else f"ecm-top-{args.top_k}",
        "f_initial": report.f_initial,
        "f_best": report.f_best,
        "best_edge": list(report.best_edge) if report.best_edge else None,
        "f_ecm": report.f_ecm,
        "ecm_edge": list(report.ecm_edge) if report.ecm_edge else None,
        "candidates": len(report.table),
        "elapsed_seconds": report.elapsed_seconds,
    }
    if args.estimate:
        est = global_estimate(sys_, args.T, metric, args.w, k=args.top_k or 30)
        payload["f_global_estimate"] = est.f_g
        payload["h_global_bound"] = est.h_g
        payload["fit_method"] = est.fit.method

    def csv_writer(path):
        write_records_csv(
            path,
            ("edge_from", "edge_to", "f_value", "stable_flag"),
            [
                (row.from_node, row.to_node, "nan" if row.f_value is None else row.f_value, int(row.stable))
                for row in report.table
            ],
        )

    _emit(payload, args, csv_writer)


def _cmd_stembud(args):
    spec, inputs = read_stembud_spec_json(args.spec)
    sys_ = build_stembud(spec, inputs)
    pattern = predicted_ecm_diagonals(spec.n, spec.bud_length)
    if args.out:
        write_system_json(args.out, sys_)
    payload = {
        "n": spec.n,
        "y": spec.y,
        "bud_length": "inf" if spec.y == 0 else int(spec.bud_length),
        "predicted_sub_diagonals": sorted(pattern.N_sub),
        "predicted_super_diagonals": sorted(pattern.N_sup),
        "system_file": args.out or "(not written)",
    }
    print(_render(payload))


def _cmd_exp_stembud6(args):
    result = run_stembud6_experiment(args.out)
    print(f"wrote stem-bud tables to {args.out}")
    for row in result.modification.rows:
        print(
            f"y={row[0]} w={row[1]:.4f} trace f_I={row[2]:.3f} f_EC={row[3]:.3f} f_EX={row[4]:.3f} "
            f"logdet f_I={row[5]:.3f} f_EC={row[6]:.3f} f_EX={row[7]:.3f}"
        )


def _cmd_exp_er(args):
    cfg = ErConfig(
        n=args.n, m=args.m, edge_probability=args.p, count=args.count, seed=args.seed
    )
    result = run_er_experiment(cfg, weights=args.w or (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5), output_dir=args.out)
    print(f"wrote campaign tables to {args.out}")
    for metric, table in result.tables.items():
        print(f"[{metric}]")
        for row in table.rows:
            print("  " + " ".join(_scalar(v) for v in row))


def _cmd_gen_er(args):
    cfg = ErConfig(n=args.n, m=args.m, edge_probability=args.p, count=args.count, seed=args.seed)
    out = Path(args.out)
    if cfg.count == 1:
        sys_ = generate_er_system(cfg)
        target = out if out.suffix else out / "er_0000.json"
        target.parent.mkdir(parents=True, exist_ok=True)
        write_system_json(target, sys_)
        print(target)
        return
    out.mkdir(parents=True, exist_ok=True)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.count)
    for idx, stream in enumerate(streams):
        sys_ = generate_er_system(cfg, np.random.default_rng(stream))
        write_system_json(out / f"er_{idx:04d}.json", sys_)
    print(out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="edgegram", description=__doc__)
    parser.add_argument("--version", action="version", version=f"edgegram {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, horizon=True, metric=True, fmt=True):
        _add_system_args(p)
        if horizon:
            p.add_argument("--T", type=_parse_horizon, default=Horizon.infinite(), help="horizon: integer or 'inf'")
        if metric:
            p.add_argument("--metric", choices=sorted(_METRICS), default="trace")
        if fmt:
            p.add_argument("--format", choices=("csv", "structured"), default="structured")
            p.add_argument("--out", default=None, help="output file or directory")

    p = sub.add_parser("gramian", help="compute the controllability Gramian")
    common(p, metric=False)
    p.set_defaults(func=_cmd_gramian)

    p = sub.add_parser("metric", help="evaluate a Gramian performance metric")
    common(p)
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("ecm", help="edge centrality matrix and ranking")
    common(p)
    p.add_argument("--inputs", type=_parse_inputs, default=None, help="input subset, e.g. 1,3")
    p.add_argument("--top-k", type=int, default=10, help="ranked edges to report")
    p.add_argument("--rank-mode", choices=("signed", "absolute"), default="signed")
    p.set_defaults(func=_cmd_ecm)

    p = sub.add_parser("gradient-check", help="analytic vs finite-difference gradient")
    common(p, fmt=False)
    p.add_argument("--step", type=float, default=1e-6)
    p.set_defaults(func=_cmd_gradient_check, out=None)

    p = sub.add_parser("bounds", help="pre/post-modification metric bounds")
    common(p, metric=False)
    p.add_argument("--edge", type=_parse_edge, required=True, help="edge as i,j")
    p.add_argument("--w", type=float, required=True)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("stability-interval", help="stability-preserving weight interval")
    common(p, horizon=False, metric=False)
    p.add_argument("--edge", type=_parse_edge, required=True, help="edge as i,j")
    p.set_defaults(func=_cmd_stability_interval)

    p = sub.add_parser("search", help="single-edge modification search")
    common(p)
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--top-k", type=int, default=None, help="ECM-guided search over top k edges")
    p.add_argument("--estimate", action="store_true", help="add the curve-fit global estimate")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("stembud", help="build a stem-bud system from a spec file")
    p.add_argument("--spec", required=True, help="stem-bud spec JSON")
    p.add_argument("--out", default=None, help="write the system JSON here")
    p.set_defaults(func=_cmd_stembud)

    p = sub.add_parser("exp-stembud6", help="six-node stem-bud family experiment")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_exp_stembud6)

    p = sub.add_parser("exp-er", help="seeded random-network campaign")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--p", type=float, default=0.35)
    p.add_argument("--w", type=float, nargs="*", default=None, help="modification weights")
    p.set_defaults(func=_cmd_exp_er)

    p = sub.add_parser("gen-er", help="generate seeded random systems")
    p.add_argument("--out", required=True, help="output file (count=1) or directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--p", type=float, default=0.35)
    p.set_defaults(func=_cmd_gen_er)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        args.func(args)
    except FileFormatError as exc:
        print(f"edgegram: {exc}", file=_sys.stderr)
        return USAGE_ERROR
    except EdgegramError as exc:
        print(f"edgegram: {exc}", file=_sys.stderr)
        return NUMERICAL_ERROR
    except FileNotFoundError as exc:
        print(f"edgegram: {exc}", file=_sys.stderr)
        return USAGE_ERROR
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
