"""Command-line runner for the OrthoSeis pipeline."""
import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from pydantic import ValidationError

from core.config import load_runtime_settings
from core.errors import OrthoseisError
from core.logging_middleware import CommandContext, get_logging_middleware
from pipeline.commands import (
    EvaluationEntry,
    RunContext,
    cmd_baseline,
    cmd_evaluate,
    cmd_experiment,
    cmd_generate,
    cmd_infer,
    cmd_train,
)
from pipeline.config import config_help_epilog, load_run_config
from pipeline.validator import validate_run_directory

LOG_FORMAT = '%(asctime)s %(levelname)s [%(name)s] %(message)s'

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthoseis",
        description="Seismic reflectivity/impedance inversion: data generation, training, inference, baseline, evaluation.",
        epilog=config_help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", type=Path, default=None, help="Run config (JSON, or YAML by extension).")
    parser.add_argument("--seed", type=int, default=None, help="Root seed; split into dataset and training seeds.")
    parser.add_argument("--out", type=Path, default=Path("out"), help="Parent directory of run directories.")
    parser.add_argument("--name", default=None, help="Run directory name (default: UTC timestamp).")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (fallback: ORTHOSEIS_THREADS).")
    parser.add_argument("--log-level", default=None, help="Logging level (fallback: ORTHOSEIS_LOG_LEVEL, INFO).")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("generate", help="Generate train/val/test sections and a manifest.")

    train = commands.add_parser("train", help="Train the network on a generated dataset.")
    train.add_argument("--data", type=Path, default=None, help="Dataset directory (default: <run>/data).")
    train.add_argument("--ablation", choices=["plain-unet"], default=None, help="Train the spectral-identity variant.")

    infer = commands.add_parser("infer", help="Predict a whole section from a checkpoint.")
    infer.add_argument("--checkpoint", type=Path, required=True)
    infer.add_argument("--input", type=Path, required=True, help="Input grid file.")

    baseline = commands.add_parser("baseline", help="Basis-pursuit inversion of a section.")
    baseline.add_argument("--input", type=Path, required=True, help="Input grid file.")
    baseline.add_argument("--data", type=Path, default=None, help="Dataset used to select chi when baseline.chi is null.")

    evaluate = commands.add_parser("evaluate", help="Metrics table over prediction/target pairs.")
    evaluate.add_argument(
        "--entry",
        nargs=4,
        action="append",
        required=True,
        metavar=("METHOD", "SNR", "PREDICTION", "TARGET"),
        help="One prediction/target grid pair; repeat per section, method and SNR.",
    )
    evaluate.add_argument("--output", type=Path, default=None, help="Metrics CSV path (default: <run>/tables/metrics.csv).")

    commands.add_parser("experiment", help="Generate, train both variants, infer, invert and tabulate.")
    return parser


def _run_name(name: str | None) -> str:
    return name or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def dispatch(args: argparse.Namespace, ctx: RunContext) -> list[Path]:
    if args.command == "generate":
        return cmd_generate(ctx)
    if args.command == "train":
        return cmd_train(ctx, args.data, ablation=args.ablation == "plain-unet")
    if args.command == "infer":
        return cmd_infer(ctx, args.checkpoint, args.input)
    if args.command == "baseline":
        return cmd_baseline(ctx, args.input, args.data or ctx.path("data"))
    if args.command == "evaluate":
        entries = [EvaluationEntry(method, snr, Path(pred), Path(target)) for method, snr, pred, target in args.entry]
        return cmd_evaluate(ctx, entries, args.output)
    if args.command == "experiment":
        return cmd_experiment(ctx)
    raise ValueError(f"Unknown command {args.command}")


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        settings = load_runtime_settings(cli_threads=args.threads, cli_log_level=args.log_level)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT)

    middleware = get_logging_middleware(logger)
    try:
        config = load_run_config(args.config)
        if args.seed is not None:
            config = config.with_root_seed(args.seed)
        ctx = RunContext(config=config, run_dir=args.out / _run_name(args.name), threads=settings.threads)
        ctx.prepare()
        context = CommandContext(name=args.command, arguments=vars(args))
        artifacts = middleware.process(context, lambda: dispatch(args, ctx))
    except (OrthoseisError, OSError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    validation = validate_run_directory(ctx.run_dir, artifacts)
    if not validation["is_valid"]:
        print(f"error: run directory {ctx.run_dir} failed validation", file=sys.stderr)
        return 1
    logger.info(f"✅ {args.command} wrote {len(artifacts)} artifacts to {ctx.run_dir}")
    return 0
