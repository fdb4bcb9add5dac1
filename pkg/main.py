"""
Command-line entry point for the distillation lab.

Exit codes: 0 success, 1 configuration error, 2 runtime or numeric error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from config.observability import setup_logging
from data_models.models import SweepAxis, TrainConfig
from utils.errors import ConfigError, NumericError

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def load_config(path: str) -> TrainConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
    return TrainConfig.model_validate(raw)


def _split_list(text: str) -> List[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"empty list: '{text}'")
    return items


def cmd_train_teacher(args) -> int:
    from harness.training import train_teacher

    ckpt, report = train_teacher(load_config(args.config))
    print(f"teacher checkpoint: {ckpt}")
    print(f"final mIoU: {report.final.miou:.4f}  pixel accuracy: {report.final.pixel_acc:.4f}")
    return EXIT_OK


def cmd_train_student(args) -> int:
    from harness.training import train_student

    report = train_student(load_config(args.config))
    print(f"student report: {Path(report.final.checkpoint).parent / 'report.json'}")
    print(f"final mIoU: {report.final.miou:.4f}  pixel accuracy: {report.final.pixel_acc:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from harness.report import sweep_table
    from harness.sweep import run_sweep

    try:
        axis = SweepAxis(args.axis)
        seeds = [int(s) for s in _split_list(args.seeds)]
    except ValueError as e:
        raise ConfigError(str(e)) from e
    sweep = run_sweep(load_config(args.config), axis, _split_list(args.values), seeds)
    print(sweep_table(sweep), end="")
    return EXIT_OK


def cmd_report(args) -> int:
    from harness.report import collect_reports, emit_report

    reports = collect_reports(args.input)
    if not reports:
        raise ConfigError(f"No report.json found under {args.input}")
    output = args.output or str(Path(args.input) / ("runs.csv" if args.format == "csv" else "reports.json"))
    emit_report(reports, args.format, output)
    print(f"{len(reports)} run(s) written to {output}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from harness.report import compare_class_iou, frame_to_csv, load_report
    from utils.io import atomic_write_text

    df = compare_class_iou(load_report(args.baseline), load_report(args.candidate))
    if args.output:
        atomic_write_text(args.output, frame_to_csv(df))
    print(df.to_string(index=False))
    return EXIT_OK


def cmd_dump_dataset(args) -> int:
    from synthtask.dataset import generate_dataset
    from synthtask.dump import write_split

    cfg = load_config(args.config)
    train, val = generate_dataset(cfg.dataset)
    out = Path(args.output)
    write_split(out / "train.synth", train, cfg.dataset.num_classes)
    write_split(out / "val.synth", val, cfg.dataset.num_classes)
    print(f"dataset written to {out}")
    return EXIT_OK


def cmd_noise_diagnostic(args) -> int:
    from debugging.monte_carlo import diagnose_config

    try:
        mc = diagnose_config(load_config(args.config), args.draws, args.student_checkpoint)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    print(mc.generate_debug_report())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdd-lab", description="Generative denoise distillation lab")
    parser.add_argument("--log-level", default=None, help="Overrides GDD_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-teacher", help="Train the teacher network")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train_teacher)

    p = sub.add_parser("train-student", help="Train a student under the configured distillation method")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train_student)

    p = sub.add_parser("sweep", help="Run an ablation or calibration sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, choices=[a.value for a in SweepAxis])
    p.add_argument("--values", required=True, help="Comma-separated axis values")
    p.add_argument("--seeds", required=True, help="Comma-separated integer seeds")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="Aggregate run reports below a directory")
    p.add_argument("--input", required=True)
    p.add_argument("--format", required=True, choices=["csv", "json"])
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="Class-level IoU of a candidate run against a baseline run")
    p.add_argument("--baseline", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dump-dataset", help="Write the synthetic splits as SYNTH1 binary files")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_dump_dataset)

    p = sub.add_parser("noise-diagnostic", help="Resample the distillation noise on one batch")
    p.add_argument("--config", required=True)
    p.add_argument("--draws", type=int, default=100)
    p.add_argument("--student-checkpoint", default=None)
    p.set_defaults(func=cmd_noise_diagnostic)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging(args.log_level)
    except ValidationError as e:
        logger.error(f"Invalid settings: {e}")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NumericError as e:
        logger.error(f"Numeric error: {e}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.error(f"Run failed: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
