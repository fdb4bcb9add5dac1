"""
Training-time auxiliaries: the 1x1 align projection and the conv-relu-conv generator
"""
from typing import List, Optional

from autodiff.ops import relu
from autodiff.tensor import Tensor
from nn.module import Conv2d, Module
from utils.errors import ShapeError


class AlignModule(Module):
    """1x1 conv from student channels to teacher channels; identity when they match."""

    def __init__(self, student_channels: int, teacher_channels: int, prefix: str = "align"):
        self.student_channels = student_channels
        self.teacher_channels = teacher_channels
        self.proj: Optional[Conv2d] = None
        if student_channels != teacher_channels:
            self.proj = Conv2d(f"{prefix}.proj", student_channels, teacher_channels, kernel_size=1)

    @property
    def is_identity(self) -> bool:
        return self.proj is None

    def layers(self) -> List[Conv2d]:
        return [] if self.proj is None else [self.proj]

    def __call__(self, s: Tensor) -> Tensor:
        return align_apply(self, s)


class GenerationModule(Module):
    """conv3x3 (C -> hidden) -> relu -> conv3x3 (hidden -> C), shape-preserving."""

    def __init__(self, channels: int, hidden_channels: Optional[int] = None, prefix: str = "generator"):
        self.channels = channels
        self.hidden_channels = hidden_channels or channels
        self.conv_l1 = Conv2d(f"{prefix}.conv_l1", channels, self.hidden_channels, kernel_size=3, padding=1)
        self.conv_l2 = Conv2d(f"{prefix}.conv_l2", self.hidden_channels, channels, kernel_size=3, padding=1)

    def layers(self) -> List[Conv2d]:
        return [self.conv_l1, self.conv_l2]

    def __call__(self, x: Tensor) -> Tensor:
        return generate(self, x)


def align_apply(m: AlignModule, s: Tensor) -> Tensor:
    if s.ndim != 4 or s.shape[1] != m.student_channels:
        raise ShapeError(f"align expects (N, {m.student_channels}, H, W), got {s.shape}")
    if m.proj is None:
        return s
    return m.proj(s)


def generate(m: GenerationModule, x: Tensor) -> Tensor:
    if x.ndim != 4 or x.shape[1] != m.channels:
        raise ShapeError(f"generator expects (N, {m.channels}, H, W), got {x.shape}")
    return m.conv_l2(relu(m.conv_l1(x)))


def auxiliary_param_count(student_channels: int, teacher_channels: int, hidden_channels: int) -> int:
    """Closed-form size of align (when projecting) plus generator."""
    ct, hid = teacher_channels, hidden_channels
    align = student_channels * ct + ct if student_channels != ct else 0
    return align + 9 * ct * hid + hid + 9 * hid * ct + ct
