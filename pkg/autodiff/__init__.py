from autodiff.gradcheck import check_gradients
from autodiff.ops import (
    add,
    conv2d,
    elementwise,
    exp,
    log,
    log_softmax_with_temperature,
    mean_all,
    mul,
    reduce,
    relu,
    reshape,
    scalar_mul,
    softmax_with_temperature,
    sub,
    sum_all,
)
from autodiff.rng import NOISE_SAMPLERS, Rng, gaussian_density, gaussian_sample, sample_noise
from autodiff.tensor import Tape, Tensor, active_tape, no_tape

__all__ = [
    "NOISE_SAMPLERS",
    "Rng",
    "Tape",
    "Tensor",
    "active_tape",
    "add",
    "check_gradients",
    "conv2d",
    "elementwise",
    "exp",
    "gaussian_density",
    "gaussian_sample",
    "log",
    "log_softmax_with_temperature",
    "mean_all",
    "mul",
    "no_tape",
    "reduce",
    "relu",
    "reshape",
    "sample_noise",
    "scalar_mul",
    "softmax_with_temperature",
    "sub",
    "sum_all",
]
