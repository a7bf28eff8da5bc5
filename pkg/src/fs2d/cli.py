"""``fs2d`` command-line tool.

Subcommands::

    fs2d register A.fs2d B.fs2d [-o result.json] [--dump-surface surface.txt]
    fs2d peaks    A.fs2d B.fs2d [-o peaks.json]  [--dump-surface surface.txt]
    fs2d odometry SCAN_DIR --out-dir OUT
    fs2d synth    (SCENE.toml | --scenario NAME) --out-dir OUT [--frames N]
    fs2d eval     TRAJ.csv TRUTH.csv [-o report.json]

Exit status: 0 on success, 2 for bad input or configuration, 3 when
processing fails. Output files depend only on inputs, configuration and
seed; wall-clock timings go to standard output and never into files.
"""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import scenarios
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .dataset import (FormatError, export_trajectory, import_trajectory, load_ground_truth,
                      load_polar_scan, load_scan_directory, load_scene_spec, save_ground_truth,
                      save_matrix_text, save_polar_scan)
from .evaluation import EvalConfig, evaluate, trajectory_estimates, truth_motions
from .geometry import Trajectory
from .odometry import OdometryError, chain_motions, run_odometry_detailed
from .registration import GeometryMismatchError, register
from .rotation import NoStructureError
from .synth import synth_scene

EXIT_OK, EXIT_INPUT, EXIT_PROCESSING = 0, 2, 3

SCENARIOS = {
    "static": lambda seed, frames: scenarios.static_pair(seed),
    "rotation": lambda seed, frames: scenarios.rotation_pair(seed),
    "noisy": lambda seed, frames: scenarios.noisy_dynamic_pair(seed),
    "two-body": lambda seed, frames: scenarios.two_body_pair(seed),
    "structureless": lambda seed, frames: scenarios.structureless_pair(seed),
    "constant": lambda seed, frames: scenarios.constant_motion_sequence(seed, frames or 50),
}


class InputError(Exception):
    """Bad files or arguments (exit 2)."""


class ProcessingError(Exception):
    """Valid input that could not be processed (exit 3)."""


# -- configuration -----------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", type=Path, help="TOML run configuration")
    g.add_argument("--grid-size", type=int)
    g.add_argument("--cell-size", type=float, help="meters per cell (default 0.75)")
    g.add_argument("--bandwidth", type=int, help="spherical bandwidth B (default 128)")
    g.add_argument("--stride", type=int, help="scan stride for odometry (default 5)")
    g.add_argument("--tau", type=float, help="confidence threshold for outliers (default 1.5)")
    g.add_argument("--nms-k", type=int, help="maximum number of hypotheses")
    g.add_argument("--nms-radius", type=int, help="suppression radius in cells")
    g.add_argument("--rel-threshold", type=float, help="peak threshold relative to the maximum")
    g.add_argument("--subcell", action="store_true", default=None, help="fractional translation")
    g.add_argument("--jobs", type=int, help="worker threads for odometry")
    g.add_argument("--seed", type=int, help="seed for every stochastic step")


def run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    doc = {}
    grid = {k: v for k, v in (("grid_size", args.grid_size), ("cell_size", args.cell_size))
            if v is not None}
    if grid:
        doc["grid"] = grid
    nms = {k: v for k, v in (("k", args.nms_k), ("radius", args.nms_radius),
                             ("rel_threshold", args.rel_threshold)) if v is not None}
    if nms:
        doc["nms"] = nms
    for key in ("bandwidth", "stride", "tau", "subcell", "jobs", "seed"):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    return config_from_dict(doc, cfg)


# -- documents ---------------------------------------------------------------

def _motion_doc(m) -> dict:
    return {"dx": m.dx, "dy": m.dy, "theta": m.theta}


def _hypotheses_doc(res) -> list:
    return [{"rank": h.rank, "strength": h.strength, "shift_cells": list(h.shift),
             "motion": _motion_doc(h.motion)} for h in res.hypotheses]


def _write_doc(doc: dict, out) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_pair(args):
    a, b = load_polar_scan(args.scan_a), load_polar_scan(args.scan_b)
    if not a.same_geometry(b):
        raise InputError(f"{args.scan_a} and {args.scan_b} do not share azimuth/range geometry")
    return a, b


def _register_pair(args, cfg: RunConfig):
    a, b = _load_pair(args)
    t0 = time.perf_counter()
    try:
        res = register(a, b, cfg.registration())
    except NoStructureError as exc:
        raise ProcessingError(f"registration failed: {exc}") from None
    ms = 1e3 * (time.perf_counter() - t0)
    if args.dump_surface:
        save_matrix_text(res.surface, args.dump_surface,
                         "phase-correlation surface, row = row shift, col = column shift (cyclic)")
    return res, ms


# -- commands ----------------------------------------------------------------

def cmd_register(args, cfg: RunConfig) -> int:
    res, ms = _register_pair(args, cfg)
    doc = {
        "scan_a": str(args.scan_a), "scan_b": str(args.scan_b),
        "ego_motion": _motion_doc(res.ego_motion),
        "confidence": res.confidence, "is_outlier": res.is_outlier,
        "rotation_confidence": res.rotation_confidence,
        "hypotheses": _hypotheses_doc(res),
        "config": cfg.to_dict(),
    }
    _write_doc(doc, args.output)
    if args.output is not None:
        print(f"registered in {ms:.1f} ms -> {args.output}")
    return EXIT_OK


def cmd_peaks(args, cfg: RunConfig) -> int:
    res, ms = _register_pair(args, cfg)
    doc = {"scan_a": str(args.scan_a), "scan_b": str(args.scan_b),
           "confidence": res.confidence, "hypotheses": _hypotheses_doc(res)}
    _write_doc(doc, args.output)
    if args.output is not None:
        print(f"{len(res.hypotheses)} hypotheses in {ms:.1f} ms -> {args.output}")
    return EXIT_OK


def cmd_odometry(args, cfg: RunConfig) -> int:
    scan_dir = args.scan_dir or cfg.paths.input_dir
    out_dir = args.out_dir or cfg.paths.output_dir
    if not scan_dir or not out_dir:
        raise InputError("odometry needs a scan directory and --out-dir")
    scans = load_scan_directory(scan_dir)
    if len(scans) < cfg.stride + 1:
        raise InputError(f"{scan_dir}: {len(scans)} scans, need at least stride + 1 = {cfg.stride + 1}")
    t0 = time.perf_counter()
    try:
        run = run_odometry_detailed(scans, cfg.stride, cfg.registration(),
                                    hold_outliers=cfg.hold_outliers, jobs=cfg.jobs,
                                    mode=cfg.pair_mode)
    except OdometryError as exc:
        raise ProcessingError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_trajectory(run.trajectory, out / "trajectory.csv")
    summary = {
        "scan_count": len(scans), "stride": cfg.stride, "pair_mode": cfg.pair_mode,
        "pose_count": len(run.trajectory),
        "outlier_count": sum(r.is_outlier for r in run.results),
        "pairs": [{"scans": list(p), "confidence": r.confidence, "is_outlier": r.is_outlier,
                   "motion": _motion_doc(r.ego_motion)} for p, r in zip(run.pairs, run.results)],
        "config": cfg.to_dict(),
    }
    _write_doc(summary, out / "summary.json")
    # single-threaded wall time per pair; with --jobs > 1 this is throughput
    per_pair = 1e3 * elapsed / len(run.pairs)
    print(f"pairs {len(run.pairs)}  jobs {cfg.jobs}  mean {per_pair:.1f} ms/pair  "
          f"total {elapsed:.2f} s")
    print(f"wrote {out / 'trajectory.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _write_objects(seq, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["object", "timestamp", "x", "y", "heading"])
        for k, poses in enumerate(seq.object_poses):
            for p in poses:
                w.writerow([k, repr(p.timestamp), repr(p.x), repr(p.y), repr(p.heading)])


def _write_object_motions(movers, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["object", "dx", "dy", "theta"])
        for k, obj in enumerate(movers):
            w.writerow([k, repr(obj.motion.dx), repr(obj.motion.dy), repr(obj.motion.theta)])


def cmd_synth(args, cfg: RunConfig) -> int:
    out_dir = args.out_dir or cfg.paths.output_dir
    if not out_dir:
        raise InputError("synth needs --out-dir")
    if (args.scene is None) == (args.scenario is None):
        raise InputError("give exactly one of a scene file or --scenario")
    if args.frames is not None and args.frames < 1:
        raise InputError("--frames must be >= 1")
    movers = ()
    if args.scene is not None:
        spec, frames = load_scene_spec(args.scene)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        frames = args.frames or frames
        seq = synth_scene(spec, frames)
        movers = spec.moving_objects
        scans, truth = seq.scans, seq.truth.poses
    else:
        made = SCENARIOS[args.scenario](cfg.seed, args.frames)
        if isinstance(made, scenarios.PairTrial):
            if args.frames not in (None, 2):
                raise InputError(f"scenario {args.scenario!r} always has 2 frames")
            scans = [made.scan_a, made.scan_b]
            truth = chain_motions([made.motion], timestamps=[s.timestamp for s in scans]).poses
        else:
            seq = made
            scans, truth = seq.scans, seq.truth.poses
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(scans) - 1)))
    for k, scan in enumerate(scans):
        save_polar_scan(scan, out / f"scan_{k:0{width}d}.fs2d")
    save_ground_truth(truth, out / "truth.csv")
    if movers:
        _write_objects(seq, out / "objects.csv")
        _write_object_motions(movers, out / "object_motions.csv")
    print(f"wrote {len(scans)} scans and truth.csv to {out}")
    return EXIT_OK


def _load_poses(path) -> Trajectory:
    """A trajectory CSV, or a ground-truth CSV read as an unflagged trajectory."""
    try:
        return import_trajectory(path)
    except FormatError as first:
        try:
            return Trajectory(load_ground_truth(path))
        except FormatError:
            raise first from None


def cmd_eval(args, cfg: RunConfig) -> int:
    est = _load_poses(args.trajectory)
    truth = _load_poses(args.truth).poses
    if len(est) < 2:
        raise InputError(f"{args.trajectory}: need at least 2 poses")
    if len(truth) < 2:
        raise InputError(f"{args.truth}: need at least 2 poses")
    stamps = [p.timestamp for p in est.poses]
    period = statistics.median(b.timestamp - a.timestamp for a, b in zip(truth, truth[1:]))
    pairs = [(k, k + 1) for k in range(len(stamps) - 1)]
    try:
        motions = truth_motions(truth, stamps, pairs, period)
    except ValueError as exc:
        raise InputError(f"{args.truth} does not align with {args.trajectory}: {exc}") from None
    ecfg = EvalConfig(outlier_rule=args.outlier_rule, cell_size=cfg.grid.cell_size,
                      stride=cfg.stride, tau=cfg.tau)
    report = evaluate(trajectory_estimates(est), motions, ecfg)
    text = report.to_json()
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
        sys.stdout.write(report.to_table())
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fs2d", description="Fourier-spectrum radar registration and odometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (("register", cmd_register, "register one scan pair"),
                               ("peaks", cmd_peaks, "list ranked motion hypotheses for a pair")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scan_a", type=Path)
        p.add_argument("scan_b", type=Path)
        p.add_argument("-o", "--output", type=Path, help="result document (default: stdout)")
        p.add_argument("--dump-surface", type=Path, help="write the correlation surface as a text matrix")
        _common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("odometry", help="chain pairwise registrations over a scan directory")
    p.add_argument("scan_dir", nargs="?", type=Path)
    p.add_argument("--out-dir", type=Path)
    _common(p)
    p.set_defaults(func=cmd_odometry)

    p = sub.add_parser("synth", help="render synthetic scans with ground truth")
    p.add_argument("scene", nargs="?", type=Path, help="TOML scene description")
    p.add_argument("--scenario", choices=sorted(SCENARIOS))
    p.add_argument("--frames", type=int)
    p.add_argument("--out-dir", type=Path)
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score an estimated trajectory against ground truth")
    p.add_argument("trajectory", type=Path)
    p.add_argument("truth", type=Path)
    p.add_argument("-o", "--output", type=Path, help="report JSON (default: stdout)")
    p.add_argument("--outlier-rule", choices=("confidence", "error"), default="confidence")
    _common(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = run_config(args)
        return args.func(args, cfg)
    except (InputError, ConfigError, FormatError, GeometryMismatchError) as exc:
        print(f"fs2d {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        name = exc.filename if getattr(exc, "filename", None) else exc
        print(f"fs2d {args.command}: cannot read {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProcessingError as exc:
        print(f"fs2d {args.command}: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
