"""
Distillation losses: GDD and the baselines it is compared against.

Teacher tensors are always detached; gradients only reach the student side
(student feature, align and generator parameters).
"""
import numpy as np

from autodiff.ops import (
    add,
    log_softmax_with_temperature,
    mean_all,
    mul,
    reduce,
    reshape,
    scalar_mul,
    softmax_with_temperature,
    sub,
)
from autodiff.rng import Rng, sample_noise
from autodiff.tensor import Tensor
from data_models.models import DistillConfig, InjectLocation
from distill.modules import AlignModule, GenerationModule, align_apply, generate
from utils.errors import ShapeError


def _same_shape(name: str, t: Tensor, s: Tensor) -> None:
    if t.shape != s.shape:
        raise ShapeError(f"{name}: teacher shape {t.shape} != student shape {s.shape}")


def _check_nchw(name: str, x: Tensor) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{name} expects (N, C, H, W), got {x.shape}")


def channel_softmax(x: Tensor, tau: float) -> Tensor:
    """Per (sample, channel), softmax over the flattened H*W positions."""
    _check_nchw("channel_softmax", x)
    n, c, h, w = x.shape
    flat = reshape(x, (n, c, h * w))
    return reshape(softmax_with_temperature(flat, axis=2, tau=tau), (n, c, h, w))


def channel_kl(t: Tensor, s: Tensor, tau: float) -> Tensor:
    """(tau^2 / C) * sum_{c,i} phi(T) log(phi(T) / phi(S)), averaged over the batch."""
    _check_nchw("channel_kl", s)
    _same_shape("channel_kl", t, s)
    n, c, h, w = s.shape
    t_flat = reshape(t.detach(), (n, c, h * w))
    s_flat = reshape(s, (n, c, h * w))
    p_t = softmax_with_temperature(t_flat, axis=2, tau=tau)
    log_p_t = log_softmax_with_temperature(t_flat, axis=2, tau=tau)
    log_p_s = log_softmax_with_temperature(s_flat, axis=2, tau=tau)
    kl = reduce("sum", mul(p_t, sub(log_p_t, log_p_s)))
    return scalar_mul(kl, tau * tau / (c * n))


def mse(t: Tensor, s: Tensor) -> Tensor:
    _same_shape("mse", t, s)
    diff = sub(t.detach(), s)
    return mean_all(mul(diff, diff))


def perturb_student(s: Tensor, align: AlignModule, gen: GenerationModule, cfg: DistillConfig, rng: Rng) -> Tensor:
    """S' = G_e(align(S) + noise); the noise term is dropped when noise goes on the image instead."""
    aligned = align_apply(align, s)
    if cfg.inject_location == InjectLocation.FEATURE:
        noise = sample_noise(cfg.noise, rng, aligned.shape, cfg.mu, cfg.sigma)
        aligned = add(aligned, noise)
    return generate(gen, aligned)


def gdd_loss(t: Tensor, s: Tensor, align: AlignModule, gen: GenerationModule, cfg: DistillConfig, rng: Rng) -> Tensor:
    return channel_kl(t, perturb_student(s, align, gen, cfg, rng), cfg.tau)


def cwd_loss(t: Tensor, s_aligned: Tensor, tau: float) -> Tensor:
    return channel_kl(t, s_aligned, tau)


def sn_only_loss(t: Tensor, s: Tensor, align: AlignModule, gen: GenerationModule, cfg: DistillConfig, rng: Rng) -> Tensor:
    """Noise + generator compared with spatial MSE instead of channel KL."""
    return mse(t, perturb_student(s, align, gen, cfg, rng))


def mse_feature_loss(t: Tensor, s_aligned: Tensor) -> Tensor:
    return mse(t, s_aligned)


def spatial_keep_mask(rng: Rng, n: int, c: int, h: int, w: int, mask_ratio: float) -> np.ndarray:
    """(N, C, H, W) 0/1 mask; each spatial position is dropped with probability mask_ratio for all channels."""
    if not 0.0 <= mask_ratio < 1.0:
        raise ValueError(f"mask_ratio must lie in [0, 1), got {mask_ratio}")
    keep = (rng.uniform(n * h * w) >= mask_ratio).astype(np.float64).reshape(n, 1, h, w)
    return np.broadcast_to(keep, (n, c, h, w))


def mgd_loss(t: Tensor, s: Tensor, align: AlignModule, gen: GenerationModule, mask_ratio: float, rng: Rng) -> Tensor:
    """MSE(T, G_e(M * align(S))) with a fresh Bernoulli spatial mask M per call."""
    aligned = align_apply(align, s)
    n, c, h, w = aligned.shape
    keep = spatial_keep_mask(rng, n, c, h, w, mask_ratio)
    return mse(t, generate(gen, mul(aligned, Tensor.wrap(keep))))


def logit_kd_loss(logits_t: Tensor, logits_s: Tensor, tau: float) -> Tensor:
    """Per-pixel KL(softmax(T/tau) || softmax(S/tau)) over classes, times tau^2, averaged over pixels."""
    _check_nchw("logit_kd_loss", logits_s)
    _same_shape("logit_kd_loss", logits_t, logits_s)
    n, _, h, w = logits_s.shape
    t = logits_t.detach()
    p_t = softmax_with_temperature(t, axis=1, tau=tau)
    log_p_t = log_softmax_with_temperature(t, axis=1, tau=tau)
    log_p_s = log_softmax_with_temperature(logits_s, axis=1, tau=tau)
    kl = reduce("sum", mul(p_t, sub(log_p_t, log_p_s)))
    return scalar_mul(kl, tau * tau / (n * h * w))


def inject_image_noise(x: Tensor, cfg: DistillConfig, rng: Rng) -> Tensor:
    """Input image plus N(mu, sigma^2) noise, for the image injection location."""
    return add(x, sample_noise(cfg.noise, rng, x.shape, cfg.mu, cfg.sigma))


def total_loss(task: Tensor, distill: Tensor, alpha: float) -> Tensor:
    if task.size != 1 or distill.size != 1:
        raise ShapeError(f"total_loss expects scalars, got {task.shape} and {distill.shape}")
    return add(task, scalar_mul(distill, alpha))
