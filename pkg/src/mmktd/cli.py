"""Command-line entry point: ``mmktd {train,test,sweep,surface}``."""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys

from . import harness
from .errors import InvalidArgumentError, NumericDegeneracyError

EXIT_NUMERIC = 2
EXIT_USAGE = 64

_DEFAULT_GRIDS = {
    "pendulum": [(-math.pi / 2, math.pi / 2, 41), (-3.0, 3.0, 41)],
    "mountain_car": [(-1.2, 0.5, 41), (-0.07, 0.07, 41)],
}


def _config(args) -> harness.RunConfig:
    cfg = harness.load_config(args.config) if args.config else harness.RunConfig(env=args.env or "pendulum")
    changes = {}
    if args.env and args.env != cfg.env:
        # Reset per-environment defaults that were not set explicitly.
        changes.update(env=args.env, rbf_grid=None, lambda_mu=None, lambda_sigma=None)
    if args.agent and "," not in args.agent:
        changes["agent"] = args.agent
    if args.episodes and "," not in args.episodes:
        changes["train_episodes"] = int(args.episodes)
    if args.repeats is not None:
        changes["repeats"] = args.repeats
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        changes["n_jobs"] = args.jobs
    return harness.RunConfig(**{**cfg.to_dict(), **changes})


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _snapshot(args, cfg):
    if getattr(args, "snapshot", None):
        return harness.Snapshot.load(args.snapshot)
    return harness.train(cfg, harness.derive_seed(cfg.master_seed, 0))


def cmd_train(args) -> int:
    cfg = _config(args)
    seed = harness.derive_seed(cfg.master_seed, 0)
    diag_fh = None
    writer = None
    if args.diagnostics:
        diag_fh = open(args.diagnostics, "w", newline="")
        writer = csv.writer(diag_fh, lineterminator="\n")
        m = len(cfg.make_bank().r_candidates)
        writer.writerow(["step", "innovation", *[f"w{i}" for i in range(m)], "effective_r"])
    try:
        snap = harness.train(cfg, seed, diagnostics=writer)
    finally:
        if diag_fh is not None:
            diag_fh.close()
    if args.snapshot:
        snap.save(args.snapshot)
    fh = _open_out(args.out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["episode", "steps"])
    w.writerows(enumerate(snap.episode_steps))
    if fh is not sys.stdout:
        fh.close()
    return 0


def cmd_test(args) -> int:
    cfg = _config(args)
    snap = _snapshot(args, cfg)
    seed = harness.derive_seed(cfg.master_seed, 0)
    wins = harness.test(snap, cfg, seed)
    print(f"{cfg.env} {cfg.agent}: {wins}/{cfg.test_trials} successful test trials")
    if args.out:
        rows = harness.greedy_trajectory(snap, cfg, harness.derive_seed(seed, 1, 0))
        fh = _open_out(args.out)
        harness.write_trajectory_csv(rows, fh, snap.rbfs.state_dim)
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    episodes = [int(e) for e in (args.episodes or "10,20,30,40,50").split(",")]
    agents = (args.agent or "mmktd,mmktd_p,ktd").split(",")
    reports = harness.sweep(cfg, episodes, agents)
    fh = _open_out(args.out)
    harness.write_sweep_csv(reports, fh, timing=args.timing)
    if fh is not sys.stdout:
        fh.close()
    for rep in reports:
        flag = " (single repeat, CI undefined)" if rep.ci_degenerate else ""
        print(f"{rep.agent:8s} {rep.train_episodes:3d} episodes: "
              f"{rep.mean_success:.1f}/{rep.test_trials} +- {rep.ci95_halfwidth:.1f}{flag}",
              file=sys.stderr)
    return EXIT_NUMERIC if any(rep.failures for rep in reports) else 0


def _parse_grid(text):
    grid = []
    for part in text.split(";"):
        lo, hi, n = part.split(",")
        grid.append((float(lo), float(hi), int(n)))
    return grid


def cmd_surface(args) -> int:
    cfg = _config(args)
    snap = _snapshot(args, cfg)
    grid = _parse_grid(args.grid) if args.grid else _DEFAULT_GRIDS[cfg.env]
    fh = _open_out(args.out)
    harness.export_value_surface(snap, grid, fh)
    if fh is not sys.stdout:
        fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmktd", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run-config file ([run] section, JSON values)")
    common.add_argument("--env", choices=["pendulum", "mountain_car"])
    common.add_argument("--agent", help="ktd, mmktd or mmktd_p (comma list for sweep)")
    common.add_argument("--episodes", help="training episodes (comma list for sweep)")
    common.add_argument("--repeats", type=int)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output CSV path, '-' for stdout")
    common.add_argument("--diagnostics", help="per-step mode-weight CSV (train only)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train one agent")
    p.add_argument("--snapshot", help="write the trained snapshot (JSON) here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("test", parents=[common], help="greedy test of a snapshot")
    p.add_argument("--snapshot", help="snapshot to test; trains from the config if absent")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("sweep", parents=[common], help="repeated train/test over budgets")
    p.add_argument("--jobs", type=int, help="worker processes for repeats")
    p.add_argument("--timing", action="store_true", help="fill the wallclock_s column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("surface", parents=[common], help="export V(s) on a grid")
    p.add_argument("--snapshot")
    p.add_argument("--grid", help="'lo,hi,n;lo,hi,n'")
    p.set_defaults(func=cmd_surface)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericDegeneracyError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
