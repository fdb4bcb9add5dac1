import logging
import math
from typing import Any, Dict, List, Optional, Tuple

from autodiff.ops import relu
from autodiff.rng import Rng
from autodiff.tensor import Tensor
from nn.module import Conv2d, Module
from utils.errors import ShapeError

logger = logging.getLogger(__name__)


class SmallCNN(Module):
    """Stack of same-padded conv3x3+relu blocks followed by a 1x1 classifier head.

    ``feature_tap`` picks the block whose activation is handed to distillation.
    Spatial size is preserved end to end.
    """

    def __init__(self, widths: List[int], num_classes: int, in_channels: int = 3, feature_tap: Optional[int] = None):
        if not widths:
            raise ValueError("SmallCNN needs at least one block")
        tap = len(widths) - 1 if feature_tap is None else feature_tap
        if not 0 <= tap < len(widths):
            raise ValueError(f"feature_tap {tap} out of range for {len(widths)} blocks")
        self.widths = list(widths)
        self.num_classes = num_classes
        self.in_channels = in_channels
        self.feature_tap = tap
        self.blocks: List[Conv2d] = []
        prev = in_channels
        for i, width in enumerate(widths):
            self.blocks.append(Conv2d(f"blocks.{i}", prev, width, kernel_size=3, padding=1))
            prev = width
        self.head = Conv2d("head", prev, num_classes, kernel_size=1)

    @property
    def feature_channels(self) -> int:
        return self.widths[self.feature_tap]

    def layers(self) -> List[Conv2d]:
        return [*self.blocks, self.head]

    def architecture(self) -> Dict[str, Any]:
        return {
            "widths": self.widths,
            "num_classes": self.num_classes,
            "in_channels": self.in_channels,
            "feature_tap": self.feature_tap,
        }

    @classmethod
    def from_architecture(cls, arch: Dict[str, Any]) -> "SmallCNN":
        return cls(
            widths=list(arch["widths"]),
            num_classes=int(arch["num_classes"]),
            in_channels=int(arch.get("in_channels", 3)),
            feature_tap=arch.get("feature_tap"),
        )

    def __call__(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        return forward(self, x)


def forward(net: SmallCNN, x: Tensor) -> Tuple[Tensor, Tensor]:
    """Per-pixel class logits and the tapped feature from one pass."""
    if x.ndim != 4 or x.shape[1] != net.in_channels:
        raise ShapeError(f"SmallCNN expects (N, {net.in_channels}, H, W) input, got {x.shape}")
    h = x
    feature = None
    for i, block in enumerate(net.blocks):
        h = relu(block(h))
        if i == net.feature_tap:
            feature = h
    return net.head(h), feature


def glorot_bound(layer: Conv2d) -> float:
    return math.sqrt(6.0 / (layer.fan_in + layer.fan_out))


def init_params(net: Module, rng: Rng) -> None:
    """Glorot-uniform weights and zero biases, drawing from rng in layer order."""
    for layer in net.layers():
        bound = glorot_bound(layer)
        shape = layer.weight.shape
        draws = rng.uniform(layer.weight.value.size).reshape(shape)
        layer.weight.assign(draws * (2.0 * bound) - bound)
        layer.bias.assign(layer.bias.value.data * 0.0)
        layer.weight.momentum_buffer[...] = 0.0
        layer.bias.momentum_buffer[...] = 0.0
    logger.debug(f"initialised {len(net.layers())} conv layers")
