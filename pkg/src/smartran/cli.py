"""Command line entry point: ``smartran {run,sweep,eval,oracle}``.

Exit codes: 0 ok, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import MODES, ConfigError, load_config
from .netmodel import compute_rates, generate_topology, sample_channels

log = logging.getLogger("smartran")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI-style scenario file")
    common.add_argument("--profile", choices=("fast", "paper"), default="paper")
    common.add_argument("--seed", type=int)
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="smartran", description="Smart SDN-controlled PD-NOMA resource allocation")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="train and evaluate one mode at one user count")
    run.add_argument("--users", type=int, help="user count (default: num_users from the config)")
    sub.add_parser("sweep", parents=[common], help="train and evaluate every mode over the user sweep")
    ev = sub.add_parser("eval", parents=[common], help="greedy evaluation from saved checkpoints")
    ev.add_argument("--checkpoints", required=True, help="directory written by run or sweep")
    ev.add_argument("--users", type=int, help="evaluate a single user count")
    orc = sub.add_parser("oracle", parents=[common], help="brute-force optimum on a tiny frozen instance")
    orc.add_argument("--users", type=int, default=2)
    orc.add_argument("--subcarriers", type=int, default=2)
    orc.add_argument("--levels", type=int, default=5, help="power grid size, 0 to P_max")
    return p


def _cmd_run(args, cfg):
    from .harness import emit_results, run_sweep
    mode = args.mode or ("smart" if cfg.mode == "all" else cfg.mode)
    k = args.users if args.users is not None else cfg.num_users
    summary = run_sweep(cfg, modes=[mode], sweep=[k], checkpoint_dir=Path(args.out) / "checkpoints")
    _report(summary, emit_results(summary, args.out))


def _cmd_sweep(args, cfg):
    from .harness import emit_results, run_sweep
    summary = run_sweep(cfg, checkpoint_dir=Path(args.out) / "checkpoints")
    _report(summary, emit_results(summary, args.out))


def _cmd_eval(args, cfg):
    from .harness import emit_results, run_sweep
    sweep = [args.users] if args.users is not None else None
    summary = run_sweep(cfg, sweep=sweep, checkpoint_dir=args.checkpoints, from_checkpoints=True)
    _report(summary, emit_results(summary, args.out))


def _cmd_oracle(args, cfg):
    from .allocators import greedy_allocation
    from .oracle import brute_force_oracle
    tiny = cfg.replace(num_rrs=1, num_subcarriers=args.subcarriers)
    topo = generate_topology(tiny, tiny.seed, num_users=args.users)
    ch = sample_channels(topo, 0, tiny.seed)
    grid = np.linspace(0.0, topo.max_power, args.levels)
    alloc, rate = brute_force_oracle(topo, ch, grid)
    greedy = compute_rates(topo, ch, greedy_allocation(topo, ch)).total_rate
    print(f"oracle rate  {rate / 1e6:.3f} Mbit/s")
    print(f"greedy rate  {greedy / 1e6:.3f} Mbit/s")
    for n in range(topo.num_subcarriers):
        users = np.flatnonzero(alloc.assignment[0, n])
        powers = ", ".join(f"u{k}={alloc.power[0, n, k]:.3g} W" for k in users) or "idle"
        print(f"  subcarrier {n}: {powers}")


def _report(summary, paths):
    for p in summary.points:
        extra = f"  Cnt {p.freq_cnt:.2f} / Dst {p.freq_dst:.2f}" if p.mode == "smart" else ""
        print(f"K={p.k:<4d} {p.mode:<12s} rate {p.rate_bps / 1e6:9.2f} Mbit/s  TOC {p.toc / 1e6:9.3f}{extra}")
    print(f"wrote {len(paths)} files to {paths[0].parent}")


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "eval": _cmd_eval, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = {"seed": args.seed, "mode": args.mode}
        cfg = load_config(args.config, profile=args.profile, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:   # runtime failures map to exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
