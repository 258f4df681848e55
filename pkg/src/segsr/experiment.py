"""Monte-Carlo sweeps: configuration, seeded execution, CSV reports, figure tables.

Output files written by :func:`run_experiment`:

``trials.csv``
    One row per (cell, trial, solver, S, W). Columns: ``cell, p, isnr_db,
    trial, solver, S, W, sparsity, n_atoms, er, cdr, rsnr_num, rsnr_den,
    rsnr_db, isnr_realized_db, svnr_segment, svnr_signal, svnr_total,
    svnr_forward, svnr_backward, failed_segments, flag``. ``S``/``W`` are empty
    for the full-matrix OMP baseline; metric cells are empty and ``flag`` is
    ``zero_reference`` when the scene has no targets.
``blocks.csv``
    Per-block error norms of one segment: ``..., segment, s, err_norm``.
``virtual_noise.csv``
    Virtual noise of one segment for the first trials: ``..., segment, row,
    n_virt, forward, backward``.
``timings.csv``
    Wall-clock seconds per solve (kept apart so the other files are
    reproducible byte for byte).
``manifest.json``
    Config echo, seeds, cell table, library versions and row counts.
"""
from __future__ import annotations

import copy
import csv
import itertools
import json
import logging
import math
import platform
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis.metrics import (
    correct_discovery_rate,
    relative_error,
    rsnr_parts,
    svnr_parts,
    to_db,
)
from .errors import ConfigInvalid, ConfigParse, MissingSeries, SegSRError
from .pipeline import SEGMENT_SOLVERS, full_omp_baseline, segsr_run
from .radar import (
    NoiseSpec,
    add_noise,
    isnr_db,
    lfm_waveform,
    make_config,
    random_scene,
    scene_from_support,
    synthesize_nyquist,
)
from .sampler import build_measurement_matrix, make_chipping, rd_sample
from .segment import oracle_virtual_noise, segment_view
from .solvers import SolverParams

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SOLVERS = ("omp", "omp-pks", "tompp")

PROFILES = {
    "desk": {
        "radar": {"bandwidth_hz": 1e8, "pulse_width_s": 1e-6, "receive_time_s": 1e-5, "downsample_ratio": 5},
        "solver": {"zeta1_rel": 0.1},
    },
    "paper": {
        "radar": {"bandwidth_hz": 1e8, "pulse_width_s": 1e-5, "receive_time_s": 1e-4, "downsample_ratio": 5},
        "solver": {"zeta1_rel": 0.01},
    },
}

TRIAL_FIELDS = [
    "cell", "p", "isnr_db", "trial", "solver", "S", "W", "sparsity", "n_atoms",
    "er", "cdr", "rsnr_num", "rsnr_den", "rsnr_db", "isnr_realized_db",
    "svnr_segment", "svnr_signal", "svnr_total", "svnr_forward", "svnr_backward",
    "failed_segments", "flag",
]
KEY_FIELDS = ["cell", "p", "isnr_db", "trial", "solver", "S", "W"]
BLOCK_FIELDS = KEY_FIELDS + ["segment", "s", "err_norm"]
VNOISE_FIELDS = KEY_FIELDS + ["segment", "row", "n_virt", "forward", "backward"]
TIMING_FIELDS = KEY_FIELDS + ["seconds"]
DB_FIELDS = {"rsnr_db", "isnr_realized_db"}


class IoError(ConfigParse):
    """Report files could not be written."""


# -- configuration -----------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    profile: str = "desk"
    radar: dict = field(default_factory=dict)
    p: tuple = (0.01,)
    support: tuple | None = None
    amplitudes: object = 1.0
    isnr_db: tuple = (None,)
    n0: float | None = None
    solvers: tuple = SOLVERS
    solver_params: dict = field(default_factory=dict)
    S: tuple = (3,)
    W: tuple = (1,)
    trials: int = 10
    seed: int = 0
    workers: int = 1
    svnr_segment: int = 2
    block_segment: int = 2
    vnoise_trials: int = 1
    out_dir: str | None = None
    bounds: dict = field(default_factory=dict)

    def radar_params(self) -> dict:
        base = dict(PROFILES[self.profile]["radar"])
        base.update(self.radar)
        return base

    def params(self) -> SolverParams:
        kw = dict(PROFILES[self.profile]["solver"])
        kw.update(self.solver_params)
        return SolverParams(**kw)

    def base_config(self, S=None, W=None):
        r = self.radar_params()
        return make_config(
            r["bandwidth_hz"], r["pulse_width_s"], r["receive_time_s"], r["downsample_ratio"],
            self.S[0] if S is None else S, 1 if W is None else W,
        )

    def cells(self) -> list[tuple]:
        """``(cell_index, p, isnr_db)`` for every point of the scene/noise grid."""
        ps = [None] if self.support is not None else list(self.p)
        return [(i, p, s) for i, (p, s) in enumerate(itertools.product(ps, self.isnr_db))]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "profile": self.profile,
            "radar": dict(self.radar),
            "scene": ({"support": list(self.support), "amplitudes": self.amplitudes}
                      if self.support is not None else {"p": list(self.p)}),
            "noise": ({"n0": self.n0} if self.n0 is not None
                      else {"isnr_db": [("none" if v is None else v) for v in self.isnr_db]}),
            "solver": {"names": list(self.solvers), **self.solver_params},
            "sweep": {"S": list(self.S), "W": list(self.W)},
            "trials": self.trials,
            "seed": self.seed,
            "workers": self.workers,
            "record": {"svnr_segment": self.svnr_segment, "block_segment": self.block_segment,
                       "vnoise_trials": self.vnoise_trials},
            "output": {"dir": self.out_dir},
            "bounds": dict(self.bounds),
        }

    def replace(self, **kw) -> "ExperimentConfig":
        d = copy.copy(self.__dict__)
        d.update(kw)
        return ExperimentConfig(**d)


_SOLVER_KEYS = {"zeta1", "zeta2", "zeta1_rel", "zeta2_ratio", "max_atoms", "residual_tol", "correlation_tol"}
_TOP_KEYS = {"schema_version", "profile", "radar", "scene", "noise", "solver", "sweep", "trials", "seed",
             "workers", "record", "output", "bounds"}
_BOUNDS_KEYS = {"Np": int, "R": int, "P": int, "S": int, "W": int, "p": float, "max_support": int}


def _as_list(value, path):
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, (int, float, str)) or value is None:
        return [value]
    raise ConfigInvalid(f"expected a list, got {type(value).__name__}", path)


def _num(value, path, kind=float, lo=None, hi=None, lo_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(f"expected a number, got {value!r}", path)
    if kind is int and int(value) != value:
        raise ConfigInvalid(f"expected an integer, got {value!r}", path)
    v = kind(value)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigInvalid(f"value {v} below the allowed minimum {lo}", path)
    if hi is not None and v > hi:
        raise ConfigInvalid(f"value {v} above the allowed maximum {hi}", path)
    return v


def _isnr(value, path):
    if value is None or (isinstance(value, str) and value.lower() in ("none", "inf", "noiseless")):
        return None
    return _num(value, path)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a parsed config mapping. Errors carry the offending field path."""
    if not isinstance(data, dict):
        raise ConfigInvalid("top level must be a table/object", "")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigInvalid(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})", "schema_version")
    profile = data.get("profile", "desk")
    if profile not in PROFILES:
        raise ConfigInvalid(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}", "profile")
    kw: dict = {"profile": profile}

    radar = data.get("radar", {})
    allowed = {"bandwidth_hz", "pulse_width_s", "receive_time_s", "downsample_ratio"}
    for k, v in radar.items():
        if k not in allowed:
            raise ConfigInvalid(f"unknown radar parameter {k!r}", f"radar.{k}")
        _num(v, f"radar.{k}", lo=0, lo_open=True)
    kw["radar"] = dict(radar)

    scene = data.get("scene", {})
    if "support" in scene:
        kw["support"] = tuple(int(_num(v, "scene.support", int, lo=0)) for v in _as_list(scene["support"], "scene.support"))
        amps = scene.get("amplitudes", 1.0)
        kw["amplitudes"] = amps if isinstance(amps, (int, float)) else [float(a) for a in amps]
    else:
        ps = _as_list(scene.get("p", [0.01]), "scene.p")
        if not ps:
            raise ConfigInvalid("sweep axis is empty", "scene.p")
        kw["p"] = tuple(_num(v, "scene.p", lo=0, hi=1) for v in ps)

    noise = data.get("noise", {})
    if "n0" in noise:
        kw["n0"] = _num(noise["n0"], "noise.n0", lo=0)
    else:
        vals = _as_list(noise.get("isnr_db", ["none"]), "noise.isnr_db")
        if not vals:
            raise ConfigInvalid("sweep axis is empty", "noise.isnr_db")
        kw["isnr_db"] = tuple(_isnr(v, "noise.isnr_db") for v in vals)

    solver = dict(data.get("solver", {}))
    names = _as_list(solver.pop("names", list(SOLVERS)), "solver.names")
    if not names:
        raise ConfigInvalid("solver list is empty", "solver.names")
    for n in names:
        if n not in SOLVERS:
            raise ConfigInvalid(f"unknown solver {n!r}; choose from {list(SOLVERS)}", "solver.names")
    for k, v in solver.items():
        if k not in _SOLVER_KEYS:
            raise ConfigInvalid(f"unknown solver parameter {k!r}", f"solver.{k}")
        if v is not None:
            _num(v, f"solver.{k}", lo=0)
    kw["solvers"] = tuple(names)
    kw["solver_params"] = solver
    try:
        merged = dict(PROFILES[profile]["solver"])
        merged.update(solver)
        SolverParams(**merged)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc), "solver") from exc

    sweep = data.get("sweep", {})
    for axis in ("S", "W"):
        vals = _as_list(sweep.get(axis, [3] if axis == "S" else [1]), f"sweep.{axis}")
        if not vals:
            raise ConfigInvalid("sweep axis is empty", f"sweep.{axis}")
        kw[axis] = tuple(_num(v, f"sweep.{axis}", int, lo=1) for v in vals)

    kw["trials"] = _num(data.get("trials", 10), "trials", int, lo=1)
    kw["seed"] = _num(data.get("seed", 0), "seed", int, lo=0, hi=2**64 - 1)
    kw["workers"] = _num(data.get("workers", 1), "workers", int, lo=1)
    rec = data.get("record", {})
    for k in ("svnr_segment", "block_segment", "vnoise_trials"):
        if k in rec:
            kw[k] = _num(rec[k], f"record.{k}", int, lo=0)
    out = data.get("output", {})
    if out.get("dir") is not None:
        kw["out_dir"] = str(out["dir"])

    bounds = data.get("bounds", {})
    for k, v in bounds.items():
        if k not in _BOUNDS_KEYS:
            raise ConfigInvalid(f"unknown bounds parameter {k!r}", f"bounds.{k}")
        _num(v, f"bounds.{k}", _BOUNDS_KEYS[k], lo=0)
    kw["bounds"] = dict(bounds)

    cfg = ExperimentConfig(**kw)
    # every (S, W) pair must give a valid radar geometry
    for S, W in itertools.product(cfg.S, cfg.W):
        try:
            cfg.base_config(S, W)
        except SegSRError as exc:
            raise ConfigInvalid(str(exc), "sweep") from exc
    if cfg.support is not None:
        N = cfg.base_config().N
        if any(i >= N for i in cfg.support):
            raise ConfigInvalid(f"support index outside [0, {N})", "scene.support")
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read a JSON or TOML experiment definition."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParse(f"cannot read {path}: {exc}", "config") from exc
    if path.suffix.lower() == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigParse(f"invalid TOML: {exc}", "config") from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParse(f"invalid JSON at line {exc.lineno}: {exc.msg}", "config") from exc
    return config_from_dict(data)


# -- execution ---------------------------------------------------------------------------


def trial_streams(seed: int, cell: int, trial: int):
    """Independent generators for scene, chipping and noise of one trial."""
    ss = np.random.SeedSequence([int(seed), int(cell), int(trial)])
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def _fmt(name, value):
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if name in DB_FIELDS:
            return f"{value:.4f}"
        return repr(value)
    return str(value)


def _key(cell, p, isnr, trial, solver, S, W):
    return {"cell": cell, "p": p, "isnr_db": math.inf if isnr is None else isnr, "trial": trial,
            "solver": solver, "S": S, "W": W}


def run_trial(cfg: ExperimentConfig, cell: int, p, isnr, trial: int):
    """Simulate one realization and solve it with every solver / (S, W) pair.

    Returns ``(rows, blocks, vnoise, timings)`` lists of dicts.
    """
    rng_scene, rng_chips, rng_noise = trial_streams(cfg.seed, cell, trial)
    base = cfg.base_config()
    wf = lfm_waveform(base)
    if cfg.support is not None:
        scene = scene_from_support(base, cfg.support, cfg.amplitudes)
    else:
        scene = random_scene(base, p, rng_scene)
    sigma = scene.coefficients
    chips = make_chipping(base, rng_chips)
    A = build_measurement_matrix(base, wf, chips).A
    x = synthesize_nyquist(scene, wf, base)
    var = 0.0
    if cfg.n0 is not None:
        noise = NoiseSpec(n0=cfg.n0)
    elif isnr is not None:
        noise = NoiseSpec(isnr_db=isnr)
    else:
        noise = None
    if noise is not None:
        var = noise.variance(x, base)
        x_rx = add_noise(x, noise, base, rng_noise)
    else:
        x_rx = x
    y = rd_sample(x_rx, chips, base).y
    realized = isnr_db(x, var) if var > 0 else None
    zero = scene.sparsity == 0
    params = cfg.params()

    rows, blocks, vnoise, timings = [], [], [], []

    def metric_row(key, est, n_atoms, failed):
        row = dict(key)
        row.update(sparsity=scene.sparsity, n_atoms=n_atoms, isnr_realized_db=realized,
                   failed_segments=failed, flag="")
        if zero:
            row["flag"] = "zero_reference"
        else:
            num, den = rsnr_parts(sigma, est, wf, base)
            row.update(er=relative_error(sigma, est), cdr=correct_discovery_rate(sigma, est),
                       rsnr_num=num, rsnr_den=den, rsnr_db=to_db(num, den))
        return row

    if "omp" in cfg.solvers:
        tol = 1e-9 * float(np.linalg.norm(y)) if var == 0 else math.sqrt(base.M * base.R * var)
        omp_params = SolverParams(residual_tol=tol, max_atoms=params.max_atoms)
        res = full_omp_baseline(A, y, omp_params)
        key = _key(cell, p, isnr, trial, "omp", None, None)
        rows.append(metric_row(key, res.estimate, int(np.count_nonzero(res.estimate)), ""))
        timings.append({**key, "seconds": res.seconds})

    for S, W in itertools.product(cfg.S, cfg.W):
        rc = base.replace(segment_pulses=S, slide_pulses=W)
        for solver in (s for s in cfg.solvers if s in SEGMENT_SOLVERS):
            res = segsr_run(A, y, rc, solver, params)
            key = _key(cell, p, isnr, trial, solver, S, W)
            failed = ";".join(str(i) for i in res.failed_segments)
            row = metric_row(key, res.estimate, int(np.count_nonzero(res.estimate)), failed)
            l = cfg.svnr_segment
            if 2 <= l <= rc.L:
                view = segment_view(A, y, rc, l)
                vn = oracle_virtual_noise(view, sigma, res.forwarded[l - 2])
                sp = svnr_parts(view, sigma, vn)
                row.update(svnr_segment=l, svnr_signal=sp.signal, svnr_total=sp.total,
                           svnr_forward=sp.forward, svnr_backward=sp.backward)
                if trial < cfg.vnoise_trials:
                    for i in range(vn.n_virt.size):
                        vnoise.append({**key, "segment": l, "row": i, "n_virt": float(vn.n_virt[i]),
                                       "forward": float(vn.forward_part[i]),
                                       "backward": float(vn.backward_part[i])})
            lb = cfg.block_segment
            if 1 <= lb <= rc.L:
                view = segment_view(A, y, rc, lb)
                c0, c1 = view.coeff_range
                err = sigma[c0:c1] - res.segment_estimates[lb - 1]
                for s in range(S):
                    blocks.append({**key, "segment": lb, "s": s + 1,
                                   "err_norm": float(np.linalg.norm(err[s * rc.Np:(s + 1) * rc.Np]))})
            rows.append(row)
            timings.append({**key, "seconds": res.seconds})
    return rows, blocks, vnoise, timings


def _run_cell_chunk(args):
    cfg, cell, p, isnr, trials = args
    out = ([], [], [], [])
    for t in trials:
        for acc, part in zip(out, run_trial(cfg, cell, p, isnr, t)):
            acc.extend(part)
    return out


def _sort_key(row):
    S = row.get("S")
    W = row.get("W")
    extra = tuple(row.get(k, 0) for k in ("segment", "s", "row"))
    return (row["cell"], row["trial"], row["solver"], -1 if S is None else S, -1 if W is None else W) + extra


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    blocks: list
    vnoise: list
    timings: list
    manifest: dict = field(default_factory=dict)
    out_dir: Path | None = None

    def rows_for(self, **match):
        return [r for r in self.rows if all(r.get(k) == v for k, v in match.items())]


def run_experiment(config, out_dir=None, cells=None) -> ExperimentReport:
    """Execute the sweep and, if an output directory is known, write the report.

    ``config`` is an :class:`ExperimentConfig` or a path to a config file.
    ``cells`` restricts the run to the given cell indices.
    """
    if not isinstance(config, ExperimentConfig):
        config = load_config(config)
    out = out_dir if out_dir is not None else config.out_dir
    all_cells = config.cells()
    todo = [c for c in all_cells if cells is None or c[0] in set(cells)]
    jobs = [(config, c, p, s, range(config.trials)) for c, p, s in todo]
    results = []
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_cell_chunk, jobs))
    else:
        results = [_run_cell_chunk(j) for j in jobs]
    rows, blocks, vnoise, timings = ([], [], [], [])
    for r in results:
        for acc, part in zip((rows, blocks, vnoise, timings), r):
            acc.extend(part)
    for lst in (rows, blocks, vnoise, timings):
        lst.sort(key=_sort_key)
    report = ExperimentReport(config, rows, blocks, vnoise, timings)
    report.manifest = _manifest(config, todo, report)
    if out is not None:
        write_report(report, out)
    return report


def _versions():
    import scipy

    from . import __version__

    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "segsr": __version__}


def _manifest(config, cells, report):
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "seed": config.seed,
        "seeding": "numpy SeedSequence([seed, cell, trial]).spawn(3) -> scene, chipping, noise",
        "cells": [{"cell": c, "p": p, "isnr_db": "none" if s is None else s} for c, p, s in cells],
        "versions": _versions(),
        "row_counts": {"trials": len(report.rows), "blocks": len(report.blocks),
                       "virtual_noise": len(report.vnoise), "timings": len(report.timings)},
        "files": ["trials.csv", "blocks.csv", "virtual_noise.csv", "timings.csv"],
    }


def write_csv(path, fields, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(f, r.get(f)) for f in fields])


def write_report(report: ExperimentReport, out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "trials.csv", TRIAL_FIELDS, report.rows)
        write_csv(out / "blocks.csv", BLOCK_FIELDS, report.blocks)
        write_csv(out / "virtual_noise.csv", VNOISE_FIELDS, report.vnoise)
        write_csv(out / "timings.csv", TIMING_FIELDS, report.timings)
        (out / "manifest.json").write_text(json.dumps(report.manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write report to {out}: {exc}", "output.dir") from exc
    report.out_dir = out
    return out


# -- figure tables -----------------------------------------------------------------------


def _mean(xs):
    xs = [x for x in xs if x is not None and not (isinstance(x, float) and math.isnan(x))]
    return sum(xs) / len(xs) if xs else None


def _group(rows, keys):
    groups = defaultdict(list)
    for r in rows:
        groups[tuple(r.get(k) for k in keys)].append(r)
    return sorted(groups.items(), key=lambda kv: tuple((v is None, v if v is not None else 0) for v in kv[0]))


def figure_table(report: ExperimentReport, figure_id: str):
    """Tidy ``(fields, rows)`` for one figure; raises MissingSeries if unavailable."""
    seg_rows = [r for r in report.rows if r["solver"] in SEGMENT_SOLVERS]
    scored = [r for r in report.rows if r.get("er") is not None]
    if figure_id == "fig5a":
        if not report.vnoise:
            raise MissingSeries("fig5a needs recorded virtual noise (record.vnoise_trials >= 1)")
        first = report.vnoise[0]
        sel = [r for r in report.vnoise if all(r[k] == first[k] for k in KEY_FIELDS + ["segment"])]
        fields = KEY_FIELDS + ["segment", "row", "abs_n_virt", "abs_forward", "abs_backward"]
        out = [{**{k: r[k] for k in KEY_FIELDS + ["segment", "row"]}, "abs_n_virt": abs(r["n_virt"]),
                "abs_forward": abs(r["forward"]), "abs_backward": abs(r["backward"])} for r in sel]
        return fields, out
    if figure_id == "fig5b":
        src = [r for r in seg_rows if r.get("svnr_signal") is not None]
        if not src:
            raise MissingSeries("fig5b needs virtual-noise energies (record.svnr_segment within range)")
        keys = ["p", "isnr_db", "solver", "S", "W", "svnr_segment"]
        fields = keys + ["svnr_o_db", "svnr_a_db", "svnr_b_db", "n"]
        out = []
        for k, grp in _group(src, keys):
            sig = _mean([r["svnr_signal"] for r in grp])
            out.append({**dict(zip(keys, k)),
                        "svnr_o_db": to_db(sig, _mean([r["svnr_total"] for r in grp])),
                        "svnr_a_db": to_db(sig, _mean([r["svnr_forward"] for r in grp])),
                        "svnr_b_db": to_db(sig, _mean([r["svnr_backward"] for r in grp])),
                        "n": len(grp)})
        return fields, out
    if figure_id in ("fig6", "fig8"):
        src = [r for r in scored if r["solver"] in SEGMENT_SOLVERS]
        if not src:
            raise MissingSeries(f"{figure_id} needs scored segment-solver trials")
        keys = ["p", "isnr_db", "solver", "S", "W"]
        fields = keys + ["er", "cdr", "n"] if figure_id == "fig6" else keys + ["er", "n"]
        out = []
        for k, grp in _group(src, keys):
            row = {**dict(zip(keys, k)), "er": _mean([r["er"] for r in grp]), "n": len(grp)}
            if figure_id == "fig6":
                row["cdr"] = _mean([r["cdr"] for r in grp])
            out.append(row)
        return fields, out
    if figure_id == "fig7":
        if not report.blocks:
            raise MissingSeries("fig7 needs per-block errors (record.block_segment within range)")
        keys = ["p", "isnr_db", "solver", "S", "W", "segment", "s"]
        fields = keys + ["err_norm", "n"]
        out = [{**dict(zip(keys, k)), "err_norm": _mean([r["err_norm"] for r in grp]), "n": len(grp)}
               for k, grp in _group(report.blocks, keys)]
        return fields, out
    if figure_id == "fig9":
        if not report.timings:
            raise MissingSeries("fig9 needs timings")
        keys = ["p", "isnr_db", "solver", "S", "W"]
        fields = keys + ["seconds", "n"]
        out = [{**dict(zip(keys, k)), "seconds": _mean([r["seconds"] for r in grp]), "n": len(grp)}
               for k, grp in _group(report.timings, keys)]
        return fields, out
    if figure_id == "fig10":
        if not scored:
            raise MissingSeries("fig10 needs scored trials")
        keys = ["p", "isnr_db", "solver", "S", "W"]
        fields = keys + ["rsnr_db", "n"]
        out = [{**dict(zip(keys, k)),
                "rsnr_db": to_db(_mean([r["rsnr_num"] for r in grp]), _mean([r["rsnr_den"] for r in grp])),
                "n": len(grp)} for k, grp in _group(scored, keys)]
        return fields, out
    raise MissingSeries(f"unknown figure id {figure_id!r}; choose from {list(FIGURES)}")


FIGURES = ("fig5a", "fig5b", "fig6", "fig7", "fig8", "fig9", "fig10")


def emit_figure_data(report: ExperimentReport, figure_id: str, out_dir=None) -> Path:
    """Write ``<figure_id>.csv`` next to the report (or into ``out_dir``)."""
    fields, rows = figure_table(report, figure_id)
    out = Path(out_dir) if out_dir is not None else report.out_dir
    if out is None:
        raise ValueError("no output directory given")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{figure_id}.csv"
    fmt_fields = {"svnr_o_db", "svnr_a_db", "svnr_b_db", "rsnr_db"}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([f"{r[f]:.4f}" if f in fmt_fields and r[f] is not None else _fmt(f, r.get(f)) for f in fields])
    return path


def _parse(value: str):
    if value == "":
        return None
    try:
        f = float(value)
    except ValueError:
        return value
    if f.is_integer() and "." not in value and "e" not in value.lower() and "inf" not in value:
        return int(value)
    return f


def load_report(out_dir) -> ExperimentReport:
    """Read a report written by :func:`write_report` back into memory."""
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text())
    config = config_from_dict(manifest["config"])

    def read(name):
        path = out / name
        if not path.exists():
            return []
        with open(path, newline="") as fh:
            rows = []
            for r in csv.DictReader(fh):
                d = {k: _parse(v) for k, v in r.items()}
                if "solver" in d:
                    d["solver"] = r["solver"]
                if d.get("flag") is None and "flag" in d:
                    d["flag"] = ""
                rows.append(d)
            return rows

    rep = ExperimentReport(config, read("trials.csv"), read("blocks.csv"), read("virtual_noise.csv"),
                           read("timings.csv"), manifest, out)
    return rep
