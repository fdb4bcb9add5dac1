from distill.distiller import Distiller
from distill.losses import (
    channel_kl,
    channel_softmax,
    cwd_loss,
    gdd_loss,
    inject_image_noise,
    logit_kd_loss,
    mgd_loss,
    mse,
    mse_feature_loss,
    perturb_student,
    sn_only_loss,
    spatial_keep_mask,
    total_loss,
)
from distill.modules import AlignModule, GenerationModule, align_apply, auxiliary_param_count, generate

__all__ = [
    "AlignModule",
    "Distiller",
    "GenerationModule",
    "align_apply",
    "auxiliary_param_count",
    "channel_kl",
    "channel_softmax",
    "cwd_loss",
    "gdd_loss",
    "generate",
    "inject_image_noise",
    "logit_kd_loss",
    "mgd_loss",
    "mse",
    "mse_feature_loss",
    "perturb_student",
    "sn_only_loss",
    "spatial_keep_mask",
    "total_loss",
]
