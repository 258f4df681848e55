"""Command-line entry point: ``segsr {simulate,bounds,rip,storage}``.

Results go to stdout as JSON. On failure a JSON error record
``{"error": <type>, "message": ..., "field": ...}`` is written to stderr and
the exit code is 2 for configuration problems, 1 otherwise.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigParse, SegSRError, TooLarge

log = logging.getLogger("segsr")

DEFAULT_RIP_SAMPLES = 200_000


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, help="override the master seed")
    common.add_argument("--trials", type=_positive, help="override the trial count")
    common.add_argument("--solver", choices=["omp", "omp-pks", "tompp"], help="run only this solver")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="segsr", description="Segment-sliding reconstruction of RD radar echoes")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run a Monte-Carlo sweep and write reports")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--no-plots", action="store_true", help="skip PNG rendering")
    p.add_argument("--cell", type=int, action="append", help="run only this cell index (repeatable)")

    p = sub.add_parser("bounds", parents=[common], help="randomized checks of the noise and error bounds")
    p.add_argument("--config", required=True, type=Path)

    p = sub.add_parser("rip", parents=[common], help="RIP constant of a stored matrix")
    p.add_argument("--matrix", required=True, type=Path, help=".npy array or a matrix written by dump_matrix")
    p.add_argument("--k", required=True, type=_positive)
    p.add_argument("--samples", type=_positive, default=DEFAULT_RIP_SAMPLES,
                   help="subsets to draw when exhaustive enumeration is too large")
    p.add_argument("--max-subsets", type=_positive, default=None)

    p = sub.add_parser("storage", parents=[common], help="storage and per-atom cost table")
    p.add_argument("--P", required=True, type=_positive)
    p.add_argument("--Mp", required=True, type=_positive)
    p.add_argument("--Np", required=True, type=_positive)
    p.add_argument("--S", required=True, type=_int_list)
    return ap


def _apply_overrides(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.solver is not None:
        changes["solvers"] = (args.solver,)
    return cfg.replace(**changes) if changes else cfg


def cmd_simulate(args) -> dict:
    from .experiment import FIGURES, emit_figure_data, load_config, run_experiment
    from .errors import MissingSeries

    cfg = _apply_overrides(load_config(args.config), args)
    report = run_experiment(cfg, args.out, cells=args.cell)
    figures = {}
    for f in FIGURES:
        try:
            figures[f] = str(emit_figure_data(report, f))
        except MissingSeries as exc:
            figures[f] = f"missing: {exc}"
    if not args.no_plots:
        from .plotting import render_all

        for f, res in render_all(report).items():
            if isinstance(res, Path):
                figures[f + "_png"] = str(res)
    return {"out": str(args.out), "rows": report.manifest["row_counts"], "figures": figures}


def cmd_bounds(args) -> dict:
    from .checks import SmallInstance, theorem1_suite, theorem4_suite
    from .experiment import load_config

    cfg = _apply_overrides(load_config(args.config), args)
    inst = SmallInstance(**cfg.bounds)
    params = cfg.params()
    r1 = theorem1_suite(cfg.trials, cfg.seed, inst, params)
    r4 = theorem4_suite(cfg.trials, cfg.seed, inst)
    return {"instance": inst.__dict__, "suites": [r1.as_dict(), r4.as_dict()], "ok": r1.ok and r4.ok}


def _load_any_matrix(path: Path) -> np.ndarray:
    from .sampler import load_matrix

    if path.suffix == ".npy":
        try:
            return np.load(path)
        except (OSError, ValueError) as exc:
            raise ConfigParse(f"cannot read matrix {path}: {exc}", "matrix") from exc
    try:
        loaded = load_matrix(path)
    except (OSError, ValueError) as exc:
        raise ConfigParse(f"cannot read matrix {path}: {exc}", "matrix") from exc
    m = loaded[0] if isinstance(loaded, tuple) else loaded
    return np.asarray(getattr(m, "A", m))


def cmd_rip(args) -> dict:
    from .analysis.rip import MAX_SUBSETS, rip_bruteforce, rip_sampled

    A = _load_any_matrix(args.matrix)
    if A.ndim != 2:
        raise ConfigParse(f"matrix must be 2-D, got shape {A.shape}", "matrix")
    if args.k > A.shape[1]:
        raise ConfigParse(f"k = {args.k} exceeds the {A.shape[1]} columns", "k")
    limit = args.max_subsets or MAX_SUBSETS
    try:
        est = rip_bruteforce(A, args.k, max_subsets=limit)
    except TooLarge:
        est = rip_sampled(A, args.k, args.samples, seed=args.seed)
    return {
        "shape": list(A.shape), "k": est.k, "delta": est.delta, "method": est.method,
        "lower_bound": est.is_lower_bound, "lam_min": est.lam_min, "lam_max": est.lam_max,
        "n_subsets": est.n_subsets, "total_subsets": math.comb(A.shape[1], args.k),
        "worst_subset": [int(i) for i in est.worst_subset],
        "delta_at_optimal_scale": est.delta_scaled,
    }


def cmd_storage(args) -> dict:
    from .analysis.accounting import resource_accounting

    rows = []
    full = None
    for S in args.S:
        r = resource_accounting(P=args.P, Mp=args.Mp, Np=args.Np, S=S)
        full = r
        rows.append({"S": S, "bytes_segsr": r.bytes_segsr, "segsr": r.segsr_human, "flops_segsr": r.flops_segsr})
    return {"P": args.P, "Mp": args.Mp, "Np": args.Np, "bytes_full": full.bytes_full,
            "full": full.full_human, "flops_full": full.flops_full, "segments": rows}


COMMANDS = {"simulate": cmd_simulate, "bounds": cmd_bounds, "rip": cmd_rip, "storage": cmd_storage}


def _error(exc: BaseException) -> dict:
    return {"error": type(exc).__name__, "message": str(exc), "field": getattr(exc, "field", None)}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        json.dump({"error": "UsageError", "message": "invalid command line", "field": None}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        result = COMMANDS[args.command](args)
    except ConfigParse as exc:
        json.dump(_error(exc), sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (SegSRError, OSError, ValueError) as exc:
        json.dump(_error(exc), sys.stderr)
        sys.stderr.write("\n")
        return 1
    json.dump(result, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
