"""
Desk-scale trend checks. Minutes to hours of CPU; run with GDD_RUN_SLOW=1.
"""
import os
import time

import pytest

from data_models.models import SweepAxis, SynthSpec, TrainConfig
from harness.sweep import run_sweep
from harness.training import train_student, train_teacher
from synthtask.dataset import generate_split

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(os.getenv("GDD_RUN_SLOW") != "1", reason="desk-scale training; set GDD_RUN_SLOW=1"),
]

SEEDS = [0, 1, 2]
ALPHA_GRID = ["1", "2", "5", "10", "20"]
# Lower bound on mean mIoU(gdd) - mean mIoU(none) at the calibrated alpha.
# TODO: replace 0.0 with the gain measured on the first GDD_RUN_SLOW=1 run, minus one seed std.
MIN_GDD_MIOU_GAIN = 0.0


@pytest.fixture(scope="module")
def desk_teacher(tmp_path_factory):
    out = tmp_path_factory.mktemp("teacher")
    cfg = TrainConfig.model_validate({"role": "teacher", "output_dir": str(out), "record_wall_time": False})
    return train_teacher(cfg)


def student_base(ckpt, out, method="gdd", alpha=None):
    distill = {"method": method} if alpha is None else {"method": method, "alpha": alpha}
    return TrainConfig.model_validate(
        {
            "role": "student",
            "distill": distill,
            "teacher_checkpoint": str(ckpt),
            "output_dir": str(out),
            "record_wall_time": False,
        }
    )


def test_teacher_pixel_accuracy(desk_teacher):
    _, report = desk_teacher
    assert report.final.pixel_acc >= 0.92


@pytest.fixture(scope="module")
def calibrated_alpha(desk_teacher, tmp_path_factory):
    ckpt, _ = desk_teacher
    out = tmp_path_factory.mktemp("alpha")
    sweep = run_sweep(student_base(ckpt, out), SweepAxis.ALPHA, ALPHA_GRID, SEEDS)
    best = max(sweep.summary, key=lambda arm: arm.mean_miou)
    return float(best.value)


def test_gdd_beats_plain_student(desk_teacher, calibrated_alpha, tmp_path):
    ckpt, _ = desk_teacher
    base = student_base(ckpt, tmp_path, alpha=calibrated_alpha)
    sweep = run_sweep(base, SweepAxis.METHOD, ["none", "cwd", "mse", "gdd"], SEEDS)
    by_value = {arm.value: arm for arm in sweep.summary}
    gain = by_value["gdd"].delta_vs_reference
    assert gain > 0.0
    assert gain >= MIN_GDD_MIOU_GAIN
    assert by_value["gdd"].all_seeds_agree
    assert {"cwd", "mse"} <= set(by_value)


def test_feature_injection_not_worse_than_image(desk_teacher, tmp_path):
    ckpt, _ = desk_teacher
    sweep = run_sweep(student_base(ckpt, tmp_path), SweepAxis.INJECT_LOCATION, ["feature", "image"], SEEDS)
    feature, image = sweep.summary
    assert feature.mean_miou >= image.mean_miou


def test_ablation_grids_complete(desk_teacher, tmp_path):
    ckpt, _ = desk_teacher
    sigma = run_sweep(student_base(ckpt, tmp_path / "sigma"), SweepAxis.SIGMA, ["0", "0.5", "1", "1.5", "2"], SEEDS)
    modules = run_sweep(student_base(ckpt, tmp_path / "modules"), SweepAxis.MODULE_ABLATION, ["baseline", "+CD", "+SN", "+CD&SN"], SEEDS)
    assert len(sigma.runs) == 15 and len(sigma.summary) == 5
    assert len(modules.runs) == 12 and len(modules.summary) == 4


def test_default_student_runtime(desk_teacher, tmp_path):
    ckpt, _ = desk_teacher
    started = time.perf_counter()
    train_student(student_base(ckpt, tmp_path))
    assert time.perf_counter() - started < 600


def test_dataset_throughput():
    spec = SynthSpec(train_count=1000)
    started = time.perf_counter()
    generate_split(spec, 0, 1000)
    assert time.perf_counter() - started < 1.0
