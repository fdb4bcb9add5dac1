import numpy as np
import pytest

from data_models.models import TrainConfig
from harness.training import train_teacher


@pytest.fixture
def nprng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_dataset():
    return {
        "num_classes": 4,
        "image_size": 8,
        "min_shape_size": 2,
        "noise_level": 0.05,
        "train_count": 12,
        "val_count": 6,
        "seed": 3,
    }


@pytest.fixture
def tiny_sgd():
    return {"lr": 0.05, "momentum": 0.9, "weight_decay": 0.0005, "batch_size": 4}


@pytest.fixture
def teacher_cfg(tmp_path, tiny_dataset, tiny_sgd):
    return TrainConfig.model_validate(
        {
            "role": "teacher",
            "widths": [6, 8],
            "epochs": 2,
            "sgd": tiny_sgd,
            "seed": 0,
            "dataset": tiny_dataset,
            "output_dir": str(tmp_path / "teacher"),
            "record_wall_time": False,
        }
    )


@pytest.fixture
def teacher_ckpt(teacher_cfg):
    path, _ = train_teacher(teacher_cfg)
    return path


@pytest.fixture
def student_cfg(tmp_path, tiny_dataset, tiny_sgd, teacher_ckpt):
    """Factory for tiny student configs against the tiny teacher."""

    def make(name="student", epochs=2, seed=0, inherit=False, widths=None, **distill):
        return TrainConfig.model_validate(
            {
                "role": "student",
                "widths": widths or [4, 4],
                "epochs": epochs,
                "sgd": tiny_sgd,
                "distill": distill,
                "teacher_checkpoint": str(teacher_ckpt),
                "inherit": inherit,
                "seed": seed,
                "dataset": tiny_dataset,
                "output_dir": str(tmp_path / name),
                "record_wall_time": False,
            }
        )

    return make
