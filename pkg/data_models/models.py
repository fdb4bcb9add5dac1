from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Role(str, Enum):
    TEACHER = "teacher"
    STUDENT = "student"


class DistillMethod(str, Enum):
    NONE = "none"
    GDD = "gdd"
    CWD = "cwd"
    MGD = "mgd"
    MSE = "mse"
    LOGIT_KD = "logit_kd"
    SN_ONLY = "sn_only"


class InjectLocation(str, Enum):
    FEATURE = "feature"
    IMAGE = "image"


# Methods whose loss runs the align + generation auxiliaries.
GENERATIVE_METHODS = {DistillMethod.GDD, DistillMethod.SN_ONLY, DistillMethod.MGD}
# Methods that perturb with Gaussian noise (feature or image location).
NOISY_METHODS = {DistillMethod.GDD, DistillMethod.SN_ONLY}
# Methods comparing intermediate features (need an align module).
FEATURE_METHODS = GENERATIVE_METHODS | {DistillMethod.CWD, DistillMethod.MSE}


class SgdConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lr: float = Field(default=0.05, gt=0, description="Learning rate")
    momentum: float = Field(default=0.9, ge=0, lt=1)
    weight_decay: float = Field(default=0.0005, ge=0)
    batch_size: int = Field(default=16, gt=0)


class DistillConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: DistillMethod = DistillMethod.NONE
    alpha: float = Field(default=5.0, ge=0, description="Weight of the distillation term")
    tau: float = Field(default=4.0, gt=0, description="Softmax temperature")
    mu: float = 0.0
    sigma: float = Field(default=1.0, ge=0, description="Std of the injected Gaussian noise")
    mask_ratio: float = Field(default=0.5, ge=0, lt=1, description="Masked fraction for mgd")
    inject_location: InjectLocation = InjectLocation.FEATURE
    hidden_channels: Optional[int] = Field(default=None, gt=0, description="Generator width; None means teacher channels")
    noise: str = Field(default="gaussian", description="Noise family registered in autodiff.rng")

    @field_validator("noise")
    def check_noise_family(cls, v):
        from autodiff.rng import NOISE_SAMPLERS
        if v not in NOISE_SAMPLERS:
            raise ValueError(f"Unknown noise family '{v}'. Available: {sorted(NOISE_SAMPLERS)}")
        return v


class SynthSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_classes: int = Field(default=4, ge=2, le=8, description="Background plus shape classes")
    shapes_per_image: Tuple[int, int] = (1, 3)
    noise_level: float = Field(default=0.05, ge=0, description="Per-pixel Gaussian noise std")
    image_size: int = Field(default=32, ge=4)
    min_shape_size: int = Field(default=6, ge=1)
    seed: int = 0
    train_count: int = Field(default=2000, gt=0)
    val_count: int = Field(default=500, gt=0)

    @field_validator("shapes_per_image")
    def check_shape_range(cls, v):
        low, high = v
        if low < 1 or high < low:
            raise ValueError(f"shapes_per_image must be a range 1 <= low <= high, got {v}")
        return v

    @model_validator(mode="after")
    def check_geometry(self):
        if self.min_shape_size > self.image_size // 2:
            raise ValueError(
                f"min_shape_size {self.min_shape_size} exceeds the largest shape "
                f"that fits a {self.image_size}px image ({self.image_size // 2})"
            )
        return self


_ROLE_DEFAULTS = {
    Role.TEACHER: {"widths": [32, 64, 64], "epochs": 30},
    Role.STUDENT: {"widths": [8, 16, 16], "epochs": 20},
}


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    role: Role
    widths: List[int] = Field(description="Channel width of each conv3x3+relu block")
    feature_tap: Optional[int] = Field(default=None, description="Block index of the distillation feature; None = last")
    epochs: int = Field(ge=0)
    sgd: SgdConfig = Field(default_factory=SgdConfig)
    distill: DistillConfig = Field(default_factory=DistillConfig)
    teacher_checkpoint: Optional[str] = None
    inherit: bool = False
    seed: int = 0
    dataset: SynthSpec = Field(default_factory=SynthSpec)
    output_dir: str = "runs/default"
    run_id: Optional[str] = None
    record_wall_time: bool = Field(default=False, description="Report wall-clock seconds; off keeps report.json byte-identical across runs")

    @model_validator(mode="before")
    @classmethod
    def fill_role_defaults(cls, data: Any):
        if isinstance(data, dict) and "role" in data:
            try:
                role = Role(data["role"])
            except ValueError:
                return data
            merged = dict(_ROLE_DEFAULTS[role])
            merged.update(data)
            return merged
        return data

    @field_validator("widths")
    def check_widths(cls, v):
        if not v or any(w <= 0 for w in v):
            raise ValueError(f"widths must be a non-empty list of positive ints, got {v}")
        return v

    @model_validator(mode="after")
    def check_role(self):
        if self.feature_tap is not None and not 0 <= self.feature_tap < len(self.widths):
            raise ValueError(f"feature_tap {self.feature_tap} out of range for {len(self.widths)} blocks")
        if self.role == Role.TEACHER and self.distill.method != DistillMethod.NONE:
            raise ValueError("teacher runs train with cross-entropy only (distill.method must be 'none')")
        if self.role == Role.STUDENT and self.distill.method != DistillMethod.NONE and not self.teacher_checkpoint:
            raise ValueError(f"student method '{self.distill.method.value}' requires teacher_checkpoint")
        return self

    @property
    def tap_index(self) -> int:
        return len(self.widths) - 1 if self.feature_tap is None else self.feature_tap

    @property
    def label(self) -> str:
        if self.run_id:
            return self.run_id
        return f"{self.role.value}-{self.distill.method.value}-seed{self.seed}"


class EpochRecord(BaseModel):
    epoch: int
    task_loss: float
    distill_loss: float
    total_loss: float
    val_miou: float
    val_pixel_acc: float


class FinalEvaluation(BaseModel):
    per_class_iou: List[Optional[float]]
    miou: float
    pixel_acc: float
    confusion_matrix: List[List[int]]
    wall_seconds: float
    aux_param_count: int = 0
    inherited_params: int = 0
    checkpoint: Optional[str] = None


class RunReport(BaseModel):
    run_id: str
    seed: int
    config: Dict[str, Any]
    epochs: List[EpochRecord] = Field(default_factory=list)
    final: FinalEvaluation

    @model_validator(mode="after")
    def check_epoch_records(self):
        for expected, record in enumerate(self.epochs, start=1):
            if record.epoch != expected:
                raise ValueError(f"epoch records must be consecutive from 1, found {record.epoch} at position {expected}")
        return self


class SweepAxis(str, Enum):
    SIGMA = "sigma"
    INJECT_LOCATION = "inject_location"
    MODULE_ABLATION = "module_ablation"
    ALPHA = "alpha"
    TAU = "tau"
    METHOD = "method"


class SweepRunRow(BaseModel):
    """One CSV row; field order is the CSV column order."""

    run_id: str
    method: str
    alpha: float
    tau: float
    sigma: float
    inject_location: str
    seed: int
    epochs: int
    final_miou: float
    final_pixel_acc: float
    wall_seconds: float


class SweepArmSummary(BaseModel):
    value: str
    runs: int
    mean_miou: float
    std_miou: float
    per_seed_miou: Dict[str, float]
    delta_vs_reference: float
    all_seeds_agree: bool


class SweepReport(BaseModel):
    axis: SweepAxis
    values: List[str]
    seeds: List[int]
    runs: List[SweepRunRow]
    summary: List[SweepArmSummary]
