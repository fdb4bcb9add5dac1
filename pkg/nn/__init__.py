from nn.checkpoint import (
    CHECKPOINT_SUFFIX,
    Checkpoint,
    InheritResult,
    inherit_parameters,
    load_checkpoint,
    load_into,
    save_checkpoint,
)
from nn.losses import one_hot, pixel_cross_entropy
from nn.module import Conv2d, Module, Param
from nn.network import SmallCNN, forward, glorot_bound, init_params
from nn.optim import sgd_step

__all__ = [
    "CHECKPOINT_SUFFIX",
    "Checkpoint",
    "Conv2d",
    "InheritResult",
    "Module",
    "Param",
    "SmallCNN",
    "forward",
    "glorot_bound",
    "inherit_parameters",
    "init_params",
    "load_checkpoint",
    "load_into",
    "one_hot",
    "pixel_cross_entropy",
    "save_checkpoint",
    "sgd_step",
]
