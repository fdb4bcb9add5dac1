import logging
from typing import List, Optional

from autodiff.rng import Rng
from autodiff.tensor import Tensor
from data_models.models import (
    FEATURE_METHODS,
    GENERATIVE_METHODS,
    DistillConfig,
    DistillMethod,
    InjectLocation,
    NOISY_METHODS,
)
from distill import losses
from distill.modules import AlignModule, GenerationModule, align_apply, auxiliary_param_count
from nn.module import Param
from nn.network import init_params
from utils.errors import ShapeError

logger = logging.getLogger(__name__)


class Distiller:
    """Owns the auxiliaries for one configured method and evaluates its loss."""

    def __init__(self, cfg: DistillConfig, student_channels: int, teacher_channels: int, rng: Optional[Rng] = None):
        self.cfg = cfg
        self.method = cfg.method
        self.student_channels = student_channels
        self.teacher_channels = teacher_channels
        self.align: Optional[AlignModule] = None
        self.generator: Optional[GenerationModule] = None
        if self.method in FEATURE_METHODS:
            self.align = AlignModule(student_channels, teacher_channels)
        if self.method in GENERATIVE_METHODS:
            self.generator = GenerationModule(teacher_channels, cfg.hidden_channels)
        if rng is not None:
            self.init_params(rng)

    def init_params(self, rng: Rng) -> None:
        for module in (self.align, self.generator):
            if module is not None:
                init_params(module, rng)

    @property
    def needs_teacher_logits(self) -> bool:
        return self.method == DistillMethod.LOGIT_KD

    @property
    def image_noise(self) -> bool:
        return self.method in NOISY_METHODS and self.cfg.inject_location == InjectLocation.IMAGE

    def parameters(self) -> List[Param]:
        params: List[Param] = []
        for module in (self.align, self.generator):
            if module is not None:
                params.extend(module.parameters())
        return params

    def param_count(self) -> int:
        return sum(p.value.size for p in self.parameters())

    def expected_param_count(self) -> int:
        if self.generator is not None:
            return auxiliary_param_count(self.student_channels, self.teacher_channels, self.generator.hidden_channels)
        if self.align is not None and not self.align.is_identity:
            return self.student_channels * self.teacher_channels + self.teacher_channels
        return 0

    def loss(
        self,
        rng: Rng,
        teacher_feature: Optional[Tensor] = None,
        student_feature: Optional[Tensor] = None,
        teacher_logits: Optional[Tensor] = None,
        student_logits: Optional[Tensor] = None,
    ) -> Tensor:
        cfg = self.cfg
        if self.method == DistillMethod.NONE:
            raise ValueError("method 'none' has no distillation loss")
        if self.method == DistillMethod.LOGIT_KD:
            return losses.logit_kd_loss(teacher_logits, student_logits, cfg.tau)

        t, s = teacher_feature, student_feature
        if t.shape[0] != s.shape[0] or t.shape[2:] != s.shape[2:]:
            raise ShapeError(f"teacher feature {t.shape} and student feature {s.shape} differ beyond channels")
        if self.method == DistillMethod.GDD:
            return losses.gdd_loss(t, s, self.align, self.generator, cfg, rng)
        if self.method == DistillMethod.SN_ONLY:
            return losses.sn_only_loss(t, s, self.align, self.generator, cfg, rng)
        if self.method == DistillMethod.MGD:
            return losses.mgd_loss(t, s, self.align, self.generator, cfg.mask_ratio, rng)
        if self.method == DistillMethod.CWD:
            return losses.cwd_loss(t, align_apply(self.align, s), cfg.tau)
        if self.method == DistillMethod.MSE:
            return losses.mse_feature_loss(t, align_apply(self.align, s))
        raise ValueError(f"Unsupported distillation method: {self.method}")
