"""
Parameters, the module base class and the conv layer every network is built from
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from autodiff.ops import conv2d
from autodiff.tensor import Tensor


@dataclass
class Param:
    """Named trainable tensor plus its SGD momentum buffer."""

    name: str
    value: Tensor
    momentum_buffer: np.ndarray = field(default=None)

    def __post_init__(self):
        self.value.requires_grad = True
        if self.momentum_buffer is None:
            self.momentum_buffer = np.zeros(self.value.shape)

    @property
    def shape(self):
        return self.value.shape

    def assign(self, data: np.ndarray) -> None:
        """Replace the value with a fresh tensor (the old tensor stays immutable)."""
        data = np.asarray(data, dtype=np.float64)
        if data.shape != self.value.shape:
            raise ValueError(f"{self.name}: cannot assign shape {data.shape} to {self.value.shape}")
        self.value = Tensor(data, requires_grad=True)


class Conv2d:
    def __init__(self, name: str, in_channels: int, out_channels: int, kernel_size: int, padding: int = 0):
        self.name = name
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.padding = padding
        self.weight = Param(f"{name}.weight", Tensor.zeros((out_channels, in_channels, kernel_size, kernel_size)))
        self.bias = Param(f"{name}.bias", Tensor.zeros((out_channels,)))

    @property
    def fan_in(self) -> int:
        return self.in_channels * self.kernel_size * self.kernel_size

    @property
    def fan_out(self) -> int:
        return self.out_channels * self.kernel_size * self.kernel_size

    def parameters(self) -> List[Param]:
        return [self.weight, self.bias]

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight.value, self.bias.value, stride=1, padding=self.padding)


class Module:
    """Anything built from an ordered list of Conv2d layers."""

    def layers(self) -> List[Conv2d]:
        raise NotImplementedError

    def parameters(self) -> List[Param]:
        return [p for layer in self.layers() for p in layer.parameters()]

    def named_parameters(self) -> Dict[str, Param]:
        named: Dict[str, Param] = {}
        for p in self.parameters():
            if p.name in named:
                raise ValueError(f"Duplicate parameter name {p.name}")
            named[p.name] = p
        return named

    def param_count(self) -> int:
        return sum(p.value.size for p in self.parameters())
