"""
Command-line entry point.

    sasr train   --env mountain-car --steps 300000 --seeds 5
    sasr eval    runs/mountain-car/seed-0/checkpoint --episodes 100
    sasr ablate  retention --env sparse-chain --seeds 3
    sasr bench   --buffer-sizes 256,1024,4096 --batch-sizes 256,1024,4096 --rff-dims 1000
    sasr density runs/mountain-car/seed-0 --bins 20

Exit codes: 0 on success, 2 for usage and configuration errors, 1 when a run fails.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from sasr import __version__
from sasr.config import Config, RunConfig
from sasr.envs import ENVIRONMENTS
from sasr.exceptions import ConfigurationError, SasrError, ValidationError
from sasr.harness import (
    STUDIES,
    busiest_bin_variance,
    evaluate_checkpoint,
    reward_variance_trend,
    run_ablation,
    run_bench,
    run_density,
    run_seeds,
    space_table,
    write_ablation_csv,
    write_bench_csv,
    write_density_csv,
    write_eval_csv,
)
from sasr.harness.records import write_csv
from sasr.sasr_types import KernelKind

logger = logging.getLogger("sasr.cli")

EXIT_RUN_FAILURE = 1
EXIT_USAGE = 2
DESK_ENVS = ("sparse-chain", "mountain-car")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _run_flags() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    group = flags.add_argument_group("run settings (override --config and SASR_* variables)")
    group.add_argument("--config", type=Path, help="key = value config file")
    group.add_argument("--steps", type=int)
    seeds = group.add_mutually_exclusive_group()
    seeds.add_argument("--seeds", type=int, metavar="N", help="run seeds 0..N-1")
    seeds.add_argument("--seed-list", type=_int_list, metavar="S,S,...", help="run exactly these seeds")
    group.add_argument("--lambda", dest="lambda_", type=float, metavar="LAMBDA")
    group.add_argument("--phi", type=float, help="retention rate")
    group.add_argument("--rff-dim", type=int)
    group.add_argument("--bandwidth", type=float)
    group.add_argument("--bandwidth-end", type=float, help="decrease the bandwidth linearly to this value")
    group.add_argument("--kernel", choices=[k.value for k in KernelKind])
    group.add_argument("--no-beta-sampling", dest="beta_sampling", action="store_const", const=False)
    group.add_argument("--state-action-features", action="store_const", const=True)
    group.add_argument("--eval-interval", type=int)
    group.add_argument("--eval-episodes", type=int)
    group.add_argument("--workers", type=int, help="parallel seed workers")
    group.add_argument("--out", type=str, help="output directory")
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sasr", description="Success-rate reward shaping experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", parents=[_run_flags()], help="train one run per seed")
    train.add_argument("--env", help="environment name")

    evaluate = commands.add_parser("eval", help="greedy evaluation of a checkpoint")
    evaluate.add_argument("checkpoint", type=Path)
    evaluate.add_argument("--episodes", type=int, default=100)
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--out", type=Path, help="eval CSV path (default: <checkpoint>/eval.csv)")

    ablate = commands.add_parser("ablate", parents=[_run_flags()], help="run an ablation study")
    ablate.add_argument("study", choices=sorted(STUDIES))
    ablate.add_argument("--env", action="append", help="environment (repeatable; default: desk-scale envs)")

    bench = commands.add_parser("bench", help="time the count-estimation paths")
    bench.add_argument("--buffer-sizes", type=_int_list, default=(256, 1024, 4096))
    bench.add_argument("--batch-sizes", type=_int_list, default=(256, 1024, 4096))
    bench.add_argument("--rff-dims", type=_int_list, default=(1000,))
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--out", type=Path, default=Path("runs/bench"))

    density = commands.add_parser("density", help="visit-density histograms of a run")
    density.add_argument("run_dir", type=Path)
    density.add_argument("--env", default="mountain-car")
    density.add_argument("--bins", type=int, default=20)
    density.add_argument("--window", type=int, default=25_000)
    density.add_argument("--out", type=Path, help="output directory (default: the run directory)")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    seeds = args.seed_list if args.seed_list is not None else None
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigurationError("--seeds must be at least 1", key="seeds")
        seeds = tuple(range(args.seeds))
    return {
        "steps": args.steps,
        "seeds": seeds,
        "lambda": args.lambda_,
        "phi": args.phi,
        "rff_dim": args.rff_dim,
        "bandwidth": args.bandwidth,
        "bandwidth_end": args.bandwidth_end,
        "kernel": args.kernel,
        "beta_sampling": args.beta_sampling,
        "state_action_features": args.state_action_features,
        "eval_interval": args.eval_interval,
        "eval_episodes": args.eval_episodes,
        "workers": args.workers,
        "out": args.out,
    }


def _resolve(args: argparse.Namespace, **extra: Any) -> RunConfig:
    return Config(overrides={**_overrides(args), **extra}, config_file=args.config).resolve()


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve(args, env=args.env)
    if not config.env:
        raise ConfigurationError("No environment given; pass --env or set env in the config", key="env")
    if config.env not in ENVIRONMENTS:
        raise ConfigurationError(
            f"Unknown environment {config.env!r}", reason=f"choose one of {sorted(ENVIRONMENTS)}", key="env"
        )
    records = run_seeds(config)
    for record in records:
        print(f"{config.env} seed={record.seed}: final return {record.final_return:.3f} -> {record.run_dir}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    result = evaluate_checkpoint(args.checkpoint, episodes=args.episodes, seed=args.seed)
    target = write_eval_csv(args.out or args.checkpoint / "eval.csv", result)
    print(f"{result.mean:.3f} ± {result.stderr:.3f} over {result.episodes} episodes -> {target}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _resolve(args)
    envs = args.env or ([config.env] if config.env else list(DESK_ENVS))
    rows = run_ablation(args.study, config, envs)
    target = write_ablation_csv(Path(config.out_dir) / "ablate" / f"{args.study}.csv", rows)
    for row in rows:
        print(
            f"{row.env:14s} {row.setting:14s} {row.mean_return:.3f} ± {row.stderr:.3f}"
            f"  curve area {row.mean_curve_area:.3f}"
        )
    print(f"-> {target}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    rows = run_bench(args.buffer_sizes, args.batch_sizes, args.rff_dims, repeats=args.repeats)
    space = space_table(args.buffer_sizes, args.rff_dims)
    for path in write_bench_csv(args.out, rows, space):
        print(f"-> {path}")
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    windows = run_density(args.run_dir, args.env, args.bins, args.window)
    out_dir = args.out or args.run_dir
    print(f"-> {write_density_csv(Path(out_dir) / 'density.csv', windows)}")
    bins_file = Path(args.run_dir) / "reward_bins.csv"
    if bins_file.is_file():
        trend = reward_variance_trend(bins_file)
        target = write_csv(
            Path(out_dir) / "reward_variance.csv",
            "# sasr-reward-variance-csv v1",
            ("window_start", "window_end", "samples", "mean_bin_variance"),
            ((r.window_start, r.window_end, r.samples, r.mean_bin_variance) for r in trend),
        )
        print(f"-> {target}")
        if trend:
            shift = busiest_bin_variance(bins_file)
            print(f"busiest bin {shift.cell}: reward variance {shift.early:.4g} early, {shift.late:.4g} late")
    else:
        logger.warning("No reward_bins.csv in %s; skipping the reward variance trend", args.run_dir)
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "bench": cmd_bench,
    "density": cmd_density,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, ValidationError) as e:
        print(f"sasr {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SasrError as e:
        logger.error("%s failed: %r", args.command, e)
        print(f"sasr {args.command}: error: {e}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
