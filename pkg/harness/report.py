"""
Run/sweep report serialization (CSV through pandas, JSON through pydantic)
"""
import io
import json
import logging
from pathlib import Path
from typing import List, Sequence, Union

import pandas as pd

from data_models.models import RunReport, SweepReport, SweepRunRow
from utils.io import PathLike, atomic_write_text

logger = logging.getLogger(__name__)

CSV_COLUMNS = list(SweepRunRow.model_fields.keys())

Reports = Union[RunReport, Sequence[RunReport]]


def run_row(report: RunReport) -> SweepRunRow:
    distill = report.config.get("distill", {})
    return SweepRunRow(
        run_id=report.run_id,
        method=distill.get("method", "none"),
        alpha=distill.get("alpha", 0.0),
        tau=distill.get("tau", 0.0),
        sigma=distill.get("sigma", 0.0),
        inject_location=distill.get("inject_location", "feature"),
        seed=report.seed,
        epochs=report.config.get("epochs", len(report.epochs)),
        final_miou=report.final.miou,
        final_pixel_acc=report.final.pixel_acc,
        wall_seconds=report.final.wall_seconds,
    )


def runs_frame(rows: Sequence[SweepRunRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump(mode="json") for row in rows], columns=CSV_COLUMNS)


def frame_to_csv(df: pd.DataFrame) -> str:
    buf = io.StringIO()
    df.to_csv(buf, index=False, lineterminator="\n")
    return buf.getvalue()


def report_json(reports: Reports) -> str:
    if isinstance(reports, RunReport):
        return reports.model_dump_json(indent=2) + "\n"
    return json.dumps([r.model_dump(mode="json") for r in reports], indent=2) + "\n"


def emit_report(reports: Reports, fmt: str, path: PathLike) -> Path:
    """Write one report (or many) as JSON, or as one CSV row per run."""
    if fmt == "json":
        text = report_json(reports)
    elif fmt == "csv":
        items = [reports] if isinstance(reports, RunReport) else list(reports)
        text = frame_to_csv(runs_frame([run_row(r) for r in items]))
    else:
        raise ValueError(f"Unknown report format '{fmt}' (expected csv or json)")
    target = atomic_write_text(path, text)
    logger.debug(f"Wrote {fmt} report to {target}")
    return target


def load_report(path: PathLike) -> RunReport:
    return RunReport.model_validate_json(Path(path).read_text(encoding="utf-8"))


def collect_reports(root: PathLike, filename: str = "report.json") -> List[RunReport]:
    """Every run report found below root, in sorted path order."""
    paths = sorted(Path(root).rglob(filename))
    logger.info(f"Found {len(paths)} run report(s) under {root}")
    return [load_report(p) for p in paths]


def sweep_summary_frame(sweep: SweepReport) -> pd.DataFrame:
    rows = []
    for arm in sweep.summary:
        row = {
            "value": arm.value,
            "runs": arm.runs,
            "mean_miou": arm.mean_miou,
            "std_miou": arm.std_miou,
            "delta_vs_reference": arm.delta_vs_reference,
            "all_seeds_agree": arm.all_seeds_agree,
        }
        row.update({f"seed_{seed}": miou for seed, miou in arm.per_seed_miou.items()})
        rows.append(row)
    return pd.DataFrame(rows)


def sweep_table(sweep: SweepReport) -> str:
    """Human-readable table: one row per axis value, mean +- std mIoU."""
    reference = sweep.summary[0].value if sweep.summary else ""
    df = pd.DataFrame(
        {
            sweep.axis.value: [arm.value for arm in sweep.summary],
            "mIoU": [f"{arm.mean_miou:.4f} ± {arm.std_miou:.4f}" for arm in sweep.summary],
            "runs": [arm.runs for arm in sweep.summary],
            f"Δ vs {reference}": [f"{arm.delta_vs_reference:+.4f}" for arm in sweep.summary],
            "seeds agree": [arm.all_seeds_agree for arm in sweep.summary],
        }
    )
    return df.to_string(index=False) + "\n"


def write_sweep(sweep: SweepReport, out_dir: PathLike) -> Path:
    out = Path(out_dir)
    atomic_write_text(out / "runs.csv", frame_to_csv(runs_frame(sweep.runs)))
    atomic_write_text(out / "summary.csv", frame_to_csv(sweep_summary_frame(sweep)))
    atomic_write_text(out / "sweep.json", sweep.model_dump_json(indent=2) + "\n")
    atomic_write_text(out / "table.txt", sweep_table(sweep))
    logger.info(f"Sweep outputs written to {out}")
    return out


def compare_class_iou(baseline: RunReport, candidate: RunReport) -> pd.DataFrame:
    """Per-class IoU of two runs side by side with the candidate-minus-baseline delta."""
    base = baseline.final.per_class_iou
    cand = candidate.final.per_class_iou
    if len(base) != len(cand):
        raise ValueError(f"class count differs: {len(base)} vs {len(cand)}")
    rows = []
    for k, (b, c) in enumerate(zip(base, cand)):
        delta = c - b if b is not None and c is not None else None
        rows.append({"class": k, "baseline_iou": b, "candidate_iou": c, "delta": delta})
    rows.append(
        {
            "class": "mIoU",
            "baseline_iou": baseline.final.miou,
            "candidate_iou": candidate.final.miou,
            "delta": candidate.final.miou - baseline.final.miou,
        }
    )
    return pd.DataFrame(rows, columns=["class", "baseline_iou", "candidate_iou", "delta"])
