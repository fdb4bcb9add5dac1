"""
Experiment sweeps: noise strength, injection location, component ablation,
alpha/tau calibration and the method comparison.
"""
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config.settings import get_settings
from data_models.models import (
    DistillMethod,
    NOISY_METHODS,
    Role,
    RunReport,
    SweepArmSummary,
    SweepAxis,
    SweepReport,
    TrainConfig,
)
from harness.report import run_row, write_sweep
from harness.training import train_student
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Component grid: baseline, +channel distillation, +stochastic noise, both (= GDD).
MODULE_ABLATION_ARMS: Dict[str, DistillMethod] = {
    "baseline": DistillMethod.NONE,
    "+cd": DistillMethod.CWD,
    "+sn": DistillMethod.SN_ONLY,
    "+cd&sn": DistillMethod.GDD,
}

NOISE_GRID = [0.0, 0.5, 1.0, 1.5, 2.0]

_TAU_METHODS = {DistillMethod.GDD, DistillMethod.CWD, DistillMethod.LOGIT_KD}


def _method_for_ablation(value: str) -> DistillMethod:
    key = value.strip().lower()
    if key in MODULE_ABLATION_ARMS:
        return MODULE_ABLATION_ARMS[key]
    try:
        method = DistillMethod(key)
    except ValueError:
        raise ConfigError(f"Unknown module_ablation arm '{value}'. Use one of {list(MODULE_ABLATION_ARMS)}") from None
    if method not in MODULE_ABLATION_ARMS.values():
        raise ConfigError(f"module_ablation arms map to {sorted(m.value for m in MODULE_ABLATION_ARMS.values())}, got '{value}'")
    return method


def parse_axis_value(axis: SweepAxis, raw: Any) -> Any:
    if axis in (SweepAxis.SIGMA, SweepAxis.ALPHA, SweepAxis.TAU):
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"axis '{axis.value}' needs numeric values, got '{raw}'") from None
    return str(raw).strip()


def validate_axis(base: TrainConfig, axis: SweepAxis) -> None:
    method = base.distill.method
    if base.role != Role.STUDENT:
        raise ConfigError("sweeps run student trainings; base role must be 'student'")
    if axis in (SweepAxis.SIGMA, SweepAxis.INJECT_LOCATION) and method not in NOISY_METHODS:
        raise ConfigError(f"axis '{axis.value}' needs a noise-injecting method (gdd or sn_only), base has '{method.value}'")
    if axis == SweepAxis.ALPHA and method == DistillMethod.NONE:
        raise ConfigError("axis 'alpha' needs a distillation method")
    if axis == SweepAxis.TAU and method not in _TAU_METHODS:
        raise ConfigError(f"axis 'tau' applies to {sorted(m.value for m in _TAU_METHODS)}, base has '{method.value}'")
    if axis in (SweepAxis.MODULE_ABLATION, SweepAxis.METHOD) and not base.teacher_checkpoint:
        raise ConfigError(f"axis '{axis.value}' needs teacher_checkpoint in the base config")


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._=-]+", "_", text)


def arm_config(base: TrainConfig, axis: SweepAxis, value: Any, seed: int, sweep_dir: Path) -> TrainConfig:
    data = base.model_dump(mode="json")
    distill = data["distill"]
    if axis == SweepAxis.SIGMA:
        distill["sigma"] = value
    elif axis == SweepAxis.ALPHA:
        distill["alpha"] = value
    elif axis == SweepAxis.TAU:
        distill["tau"] = value
    elif axis == SweepAxis.INJECT_LOCATION:
        distill["inject_location"] = value
    elif axis == SweepAxis.MODULE_ABLATION:
        distill["method"] = _method_for_ablation(value).value
    elif axis == SweepAxis.METHOD:
        distill["method"] = value
    run_id = f"{axis.value}={value}-seed{seed}"
    data["seed"] = seed
    data["run_id"] = run_id
    data["output_dir"] = str(sweep_dir / _slug(run_id))
    try:
        return TrainConfig.model_validate(data)
    except ValueError as e:
        raise ConfigError(f"invalid sweep arm {run_id}: {e}") from e


def summarize(axis: SweepAxis, values: Sequence[str], seeds: Sequence[int], finals: Dict[str, Dict[int, float]]) -> List[SweepArmSummary]:
    """Mean/std of final mIoU per value, with per-seed sign agreement against the first value."""
    reference = finals[values[0]]
    ref_mean = float(np.mean([reference[s] for s in seeds]))
    summary = []
    for value in values:
        per_seed = finals[value]
        scores = [per_seed[s] for s in seeds]
        mean = float(np.mean(scores))
        std = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
        delta = mean - ref_mean
        diffs = [per_seed[s] - reference[s] for s in seeds]
        agree = all(np.sign(d) == np.sign(delta) for d in diffs)
        summary.append(
            SweepArmSummary(
                value=value,
                runs=len(scores),
                mean_miou=mean,
                std_miou=std,
                per_seed_miou={str(s): per_seed[s] for s in seeds},
                delta_vs_reference=delta,
                all_seeds_agree=agree,
            )
        )
    return summary


def run_sweep(
    base: TrainConfig,
    axis: SweepAxis,
    values: Sequence[Any],
    seeds: Sequence[int],
    threads: Optional[int] = None,
) -> SweepReport:
    """Train every (value, seed) arm, aggregate, and write the sweep outputs under base.output_dir."""
    axis = SweepAxis(axis)
    if not values or not seeds:
        raise ConfigError("a sweep needs at least one value and one seed")
    validate_axis(base, axis)
    parsed = [parse_axis_value(axis, v) for v in values]
    labels = [str(v) for v in parsed]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate sweep values: {labels}")
    sweep_dir = Path(base.output_dir) / f"sweep-{axis.value}"
    jobs = [(label, seed, arm_config(base, axis, value, seed, sweep_dir)) for label, value in zip(labels, parsed) for seed in seeds]

    workers = min(threads or get_settings().threads, len(jobs))
    logger.info(f"Sweep over {axis.value}: {len(labels)} value(s) x {len(seeds)} seed(s) = {len(jobs)} runs, {workers} worker(s)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports: List[RunReport] = list(pool.map(lambda job: train_student(job[2]), jobs))
    else:
        reports = [train_student(cfg) for _, _, cfg in jobs]

    finals: Dict[str, Dict[int, float]] = {label: {} for label in labels}
    for (label, seed, _), report in zip(jobs, reports):
        finals[label][seed] = report.final.miou
        logger.info(f"Sweep arm {report.run_id}: mIoU={report.final.miou:.4f}")

    sweep = SweepReport(
        axis=axis,
        values=labels,
        seeds=list(seeds),
        runs=[run_row(r) for r in reports],
        summary=summarize(axis, labels, seeds, finals),
    )
    write_sweep(sweep, sweep_dir)
    return sweep
