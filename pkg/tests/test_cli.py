import json
from pathlib import Path

import pytest

import main
from harness import training
from utils.errors import NumericError


def write_config(path: Path, cfg) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cfg.model_dump_json(indent=2))
    return str(path)


def test_train_teacher(teacher_cfg, tmp_path):
    config = write_config(tmp_path / "teacher.json", teacher_cfg)
    assert main.main(["train-teacher", "--config", config]) == main.EXIT_OK
    assert (Path(teacher_cfg.output_dir) / "teacher.ckpt.json").is_file()


def test_train_student(student_cfg, tmp_path):
    config = write_config(tmp_path / "student.json", student_cfg(epochs=1, method="gdd"))
    assert main.main(["train-student", "--config", config]) == main.EXIT_OK


def test_missing_config_file(tmp_path):
    assert main.main(["train-teacher", "--config", str(tmp_path / "absent.json")]) == main.EXIT_CONFIG


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main.main(["train-teacher", "--config", str(path)]) == main.EXIT_CONFIG


def test_distilling_student_without_teacher(tmp_path):
    path = tmp_path / "student.json"
    path.write_text(json.dumps({"role": "student", "distill": {"method": "gdd"}}))
    assert main.main(["train-student", "--config", str(path)]) == main.EXIT_CONFIG


def test_teacher_checkpoint_not_found(tmp_path):
    path = tmp_path / "student.json"
    path.write_text(
        json.dumps({"role": "student", "distill": {"method": "gdd"}, "teacher_checkpoint": str(tmp_path / "none.ckpt.json")})
    )
    assert main.main(["train-student", "--config", str(path)]) == main.EXIT_CONFIG


def test_numeric_failure_exit_code(teacher_cfg, tmp_path, monkeypatch):
    def diverge(cfg):
        raise NumericError("non-finite loss at epoch 1")

    monkeypatch.setattr(training, "train_teacher", diverge)
    config = write_config(tmp_path / "teacher.json", teacher_cfg)
    assert main.main(["train-teacher", "--config", config]) == main.EXIT_RUNTIME


def test_invalid_log_level_setting(teacher_cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("GDD_LOG_LEVEL", "loud")
    config = write_config(tmp_path / "teacher.json", teacher_cfg)
    assert main.main(["train-teacher", "--config", config]) == main.EXIT_CONFIG


def test_sweep_and_report(student_cfg, tmp_path, capsys):
    base = student_cfg(name="sweep-base", epochs=1, method="gdd")
    config = write_config(tmp_path / "sweep.json", base)
    code = main.main(["sweep", "--config", config, "--axis", "module_ablation", "--values", "baseline,+CD&SN", "--seeds", "0"])
    assert code == main.EXIT_OK
    assert "module_ablation" in capsys.readouterr().out

    runs = tmp_path / "sweep-base"
    assert main.main(["report", "--input", str(runs), "--format", "csv"]) == main.EXIT_OK
    assert len((runs / "runs.csv").read_text().splitlines()) == 3
    assert main.main(["report", "--input", str(runs), "--format", "json", "--output", str(tmp_path / "all.json")]) == main.EXIT_OK
    assert len(json.loads((tmp_path / "all.json").read_text())) == 2


def test_sweep_bad_seeds(student_cfg, tmp_path):
    config = write_config(tmp_path / "sweep.json", student_cfg(method="gdd"))
    assert main.main(["sweep", "--config", config, "--axis", "sigma", "--values", "0,1", "--seeds", "zero"]) == main.EXIT_CONFIG


def test_sweep_axis_incompatible_with_method(student_cfg, tmp_path):
    config = write_config(tmp_path / "sweep.json", student_cfg(method="cwd"))
    assert main.main(["sweep", "--config", config, "--axis", "sigma", "--values", "0,1", "--seeds", "0"]) == main.EXIT_CONFIG


def test_report_on_empty_directory(tmp_path):
    assert main.main(["report", "--input", str(tmp_path), "--format", "csv"]) == main.EXIT_CONFIG


def test_compare(student_cfg, tmp_path):
    base = training.train_student(student_cfg(name="base", epochs=1))
    cand = training.train_student(student_cfg(name="cand", epochs=1, method="cwd"))
    out = tmp_path / "compare.csv"
    code = main.main(
        [
            "compare",
            "--baseline", str(Path(base.final.checkpoint).parent / "report.json"),
            "--candidate", str(Path(cand.final.checkpoint).parent / "report.json"),
            "--output", str(out),
        ]
    )
    assert code == main.EXIT_OK
    assert out.read_text().splitlines()[0] == "class,baseline_iou,candidate_iou,delta"


def test_dump_dataset(teacher_cfg, tmp_path):
    config = write_config(tmp_path / "teacher.json", teacher_cfg)
    assert main.main(["dump-dataset", "--config", config, "--output", str(tmp_path / "data")]) == main.EXIT_OK
    assert (tmp_path / "data" / "train.synth").read_bytes()[:6] == b"SYNTH1"
    assert (tmp_path / "data" / "val.synth").is_file()


def test_noise_diagnostic(student_cfg, tmp_path, capsys):
    config = write_config(tmp_path / "diag.json", student_cfg(method="gdd"))
    assert main.main(["noise-diagnostic", "--config", config, "--draws", "5"]) == main.EXIT_OK
    assert "NOISE RESAMPLING REPORT" in capsys.readouterr().out


def test_noise_diagnostic_needs_noisy_method(student_cfg, tmp_path):
    config = write_config(tmp_path / "diag.json", student_cfg(method="cwd"))
    assert main.main(["noise-diagnostic", "--config", config]) == main.EXIT_CONFIG


@pytest.mark.parametrize("argv", [[], ["unknown"], ["sweep", "--config", "x.json", "--axis", "depth", "--values", "1", "--seeds", "0"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit):
        main.main(argv)
