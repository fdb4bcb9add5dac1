import pytest
from pydantic import ValidationError

from config.settings import get_settings
from data_models.models import DistillConfig, DistillMethod, RunReport, TrainConfig


def test_role_defaults():
    teacher = TrainConfig.model_validate({"role": "teacher"})
    student = TrainConfig.model_validate({"role": "student"})
    assert teacher.widths == [32, 64, 64] and teacher.epochs == 30
    assert student.widths == [8, 16, 16] and student.epochs == 20
    assert student.sgd.lr == 0.05 and student.sgd.batch_size == 16
    assert student.distill.tau == 4.0 and student.distill.sigma == 1.0
    assert student.tap_index == 2
    assert not student.record_wall_time and not teacher.record_wall_time


def test_explicit_values_override_defaults():
    cfg = TrainConfig.model_validate({"role": "student", "widths": [4], "epochs": 3})
    assert cfg.widths == [4] and cfg.epochs == 3


def test_teacher_must_not_distill():
    with pytest.raises(ValidationError):
        TrainConfig.model_validate({"role": "teacher", "distill": {"method": "gdd"}})


def test_distilling_student_needs_teacher():
    with pytest.raises(ValidationError):
        TrainConfig.model_validate({"role": "student", "distill": {"method": "cwd"}})
    cfg = TrainConfig.model_validate(
        {"role": "student", "distill": {"method": "cwd"}, "teacher_checkpoint": "t.ckpt.json"}
    )
    assert cfg.distill.method == DistillMethod.CWD


@pytest.mark.parametrize(
    "patch",
    [
        {"feature_tap": 3},
        {"widths": []},
        {"widths": [4, 0]},
        {"epochs": -1},
        {"unknown": 1},
        {"sgd": {"momentum": 1.0}},
        {"sgd": {"lr": 0.0}},
        {"distill": {"tau": 0.0}},
        {"distill": {"sigma": -0.5}},
        {"distill": {"mask_ratio": 1.0}},
        {"distill": {"noise": "laplace"}},
        {"dataset": {"shapes_per_image": [3, 1]}},
    ],
)
def test_invalid_configs(patch):
    with pytest.raises(ValidationError):
        TrainConfig.model_validate({"role": "student", **patch})


def test_label_prefers_run_id():
    cfg = TrainConfig.model_validate({"role": "student", "seed": 4})
    assert cfg.label == "student-none-seed4"
    assert cfg.model_copy(update={"run_id": "custom"}).label == "custom"


def test_distill_config_defaults():
    cfg = DistillConfig()
    assert cfg.method == DistillMethod.NONE
    assert cfg.alpha == 5.0 and cfg.mu == 0.0 and cfg.mask_ratio == 0.5


def test_run_report_epochs_must_be_consecutive():
    final = {"per_class_iou": [1.0, None], "miou": 1.0, "pixel_acc": 1.0, "confusion_matrix": [[1, 0], [0, 0]], "wall_seconds": 0.0}
    record = {"task_loss": 1.0, "distill_loss": 0.0, "total_loss": 1.0, "val_miou": 0.5, "val_pixel_acc": 0.5}
    RunReport(run_id="r", seed=0, config={}, epochs=[{"epoch": 1, **record}], final=final)
    with pytest.raises(ValidationError):
        RunReport(run_id="r", seed=0, config={}, epochs=[{"epoch": 2, **record}], final=final)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("GDD_THREADS", "3")
    monkeypatch.setenv("GDD_LOG_LEVEL", "debug")
    settings = get_settings()
    assert settings.threads == 3
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize("name,value", [("GDD_THREADS", "0"), ("GDD_LOG_LEVEL", "loud")])
def test_invalid_settings(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValidationError):
        get_settings()
