"""Command-line driver: ``orora {odometry,synth,eval,bench}``."""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from orora.config import ConfigError, load_scene, load_settings
from orora.core import DegenerateError, Pose2
from orora.io import (
    FormatError,
    read_correspondences,
    read_trajectory,
    write_correspondences,
    write_trajectory,
)
from orora.metrics import evaluate
from orora.pipeline import PRESETS, STAGES, estimate_frame, pose_error, run_sequence
from orora.synth import NOISE_MODELS, SceneSpec, generate_pair, generate_sequence

CORR_SUFFIX = ".corr"
GROUND_TRUTH = "groundtruth.traj"
CURVE_RATIOS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99)
ROTATION_TOL = math.radians(0.5)
TRANSLATION_TOL = 0.3


class CliError(Exception):
    """Expected failure with a message for the user."""


def _existing(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(f"{what} not found: {p}")
    return p


def cmd_odometry(args) -> int:
    input_dir = _existing(args.input, "input directory")
    if not input_dir.is_dir():
        raise CliError(f"input is not a directory: {input_dir}")
    if args.config is not None:
        _existing(args.config, "config file")
    settings = load_settings(args.config, args.preset)
    files = sorted(input_dir.glob(f"*{CORR_SUFFIX}"))
    if not files:
        raise CliError(f"no *{CORR_SUFFIX} files in {input_dir}")
    frames = [read_correspondences(f) for f in files]
    trajectory, results = run_sequence(frames, settings.odometry)
    write_trajectory(args.output, trajectory, results, timings=args.timings)
    degenerate = sum(r.degenerate for r in results)
    print(f"frames={len(results)} degenerate={degenerate} output={args.output}")
    return 0


def cmd_synth(args) -> int:
    if args.spec is not None:
        _existing(args.spec, "scene spec")
    if args.frames < 1:
        raise CliError(f"--frames must be at least 1, got {args.frames}")
    spec = load_scene(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sets, trajectory, _ = generate_sequence(spec, args.frames)
    width = max(6, len(str(args.frames)))
    for k, corr in enumerate(sets, start=1):
        write_correspondences(
            out / f"frame_{k:0{width}d}{CORR_SUFFIX}", corr, (str(k - 1), str(k))
        )
    write_trajectory(out / GROUND_TRUTH, trajectory)
    print(f"frames={args.frames} seed={spec.seed} out={out}")
    return 0


def cmd_eval(args) -> int:
    est = read_trajectory(_existing(args.est, "estimated trajectory"))
    gt = read_trajectory(_existing(args.gt, "ground-truth trajectory"))
    segments = load_settings(args.config).segment_lengths if args.config else None
    if args.segments:
        segments = tuple(float(s) for s in args.segments.split(","))
    try:
        err = evaluate(est, gt, segments) if segments else evaluate(est, gt)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(f"{'metric':<8} {'value':>12}  unit")
    print(f"{'t_rel':<8} {err.t_rel:>12.3f}  %")
    print(f"{'r_rel':<8} {err.r_rel:>12.3f}  deg/100m")
    print(f"{'segments':<8} {len(err.segments):>12d}")
    print(f"t_rel={err.t_rel:.3f} r_rel={err.r_rel:.3f}")
    print(f"t_rel_exact={err.t_rel:.9e}")
    print(f"r_rel_exact={err.r_rel:.9e}")
    print(f"segments={len(err.segments)}")
    return 0


def _bench_trials(pairs, trials, ratio, model, seed, cfg):
    """Run ``trials`` frames whose noise matches ``cfg.noise``.

    Returns per-stage microseconds, total milliseconds and the success count.
    """
    stages = {s: [] for s in STAGES}
    totals, successes = [], 0
    for k in range(trials):
        spec = SceneSpec(
            point_count=pairs, outlier_ratio=ratio, noise=cfg.noise,
            noise_model=model, seed=seed + k,
        )
        corr, truth, _ = generate_pair(spec)
        start = time.perf_counter()
        res = estimate_frame(corr, Pose2.identity(), cfg)
        totals.append((time.perf_counter() - start) * 1e3)
        for s in STAGES:
            stages[s].append(res.timings_us.get(s, 0))
        dt, dr = pose_error(res.pose, truth)
        successes += dt <= TRANSLATION_TOL and dr <= ROTATION_TOL
    return stages, np.array(totals), successes


def cmd_bench(args) -> int:
    if args.pairs < 2:
        raise CliError(f"--pairs must be at least 2, got {args.pairs}")
    if args.trials < 1:
        raise CliError(f"--trials must be at least 1, got {args.trials}")
    if not 0.0 <= args.outlier_ratio < 1.0:
        raise CliError(f"--outlier-ratio must lie in [0, 1), got {args.outlier_ratio}")
    cfg = load_settings(args.config, args.preset).odometry
    # the synthetic frames carry no Doppler bias
    cfg = replace(cfg, doppler=replace(cfg.doppler, enabled=False))
    limit = contextlib.nullcontext()
    if args.single_thread:
        from threadpoolctl import threadpool_limits

        limit = threadpool_limits(1)
    with limit:
        if args.curve:
            return _bench_curve(args, cfg)
        stages, totals, ok = _bench_trials(
            args.pairs, args.trials, args.outlier_ratio, args.noise_model, args.seed, cfg
        )
    print(
        f"pairs={args.pairs} trials={args.trials} outlier_ratio={args.outlier_ratio} "
        f"noise_model={args.noise_model}"
    )
    print(f"{'stage':<12} {'mean_us':>10} {'median_us':>10} {'max_us':>10}")
    for s in STAGES:
        v = np.array(stages[s])
        print(f"{s:<12} {v.mean():>10.0f} {np.median(v):>10.0f} {v.max():>10.0f}")
    print(
        f"{'total':<12} {totals.mean() * 1e3:>10.0f} {np.median(totals) * 1e3:>10.0f} "
        f"{totals.max() * 1e3:>10.0f}"
    )
    print(f"mean_ms={totals.mean():.3f}")
    print(f"success={ok}/{args.trials}")
    return 0


def _bench_curve(args, cfg) -> int:
    lines = ["outlier_ratio successes trials mean_ms"]
    print(lines[0])
    for ratio in CURVE_RATIOS:
        _, totals, ok = _bench_trials(args.pairs, args.trials, ratio, args.noise_model, args.seed, cfg)
        lines.append(f"{ratio:.2f} {ok} {args.trials} {totals.mean():.3f}")
        print(lines[-1], flush=True)
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orora", description="Outlier-robust radar odometry")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("odometry", help="estimate a trajectory from correspondence files")
    p.add_argument("--input", required=True, help=f"directory of *{CORR_SUFFIX} files")
    p.add_argument("--config", help="configuration file")
    p.add_argument("--output", required=True, help="trajectory file to write")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--timings", action="store_true", help="append per-stage microseconds")
    p.set_defaults(func=cmd_odometry)

    p = sub.add_parser("synth", help="write a synthetic sequence with ground truth")
    p.add_argument("--spec", help="scene file (scene.* keys)")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="relative trajectory error")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--config", help="configuration file (metrics.segment_lengths)")
    p.add_argument("--segments", help="comma-separated segment lengths in metres")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time estimate_frame on synthetic frames")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--outlier-ratio", type=float, default=0.9)
    p.add_argument("--noise-model", choices=NOISE_MODELS, default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="configuration file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--single-thread", action="store_true", help="limit native thread pools to one")
    p.add_argument("--curve", action="store_true", help="success rate over outlier ratios 0 to 0.99")
    p.add_argument("--out", help="with --curve, also write the table here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"orora: error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"orora: config error: {exc}", file=sys.stderr)
        return 3
    except FormatError as exc:
        print(f"orora: format error: {exc}", file=sys.stderr)
        return 4
    except (DegenerateError, ValueError, OSError) as exc:
        print(f"orora: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
