import numpy as np

from autodiff.ops import log_softmax_with_temperature, mul, reduce, scalar_mul
from autodiff.tensor import Tensor
from utils.errors import ShapeError


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """(N, H, W) int labels -> (N, K, H, W) float indicator."""
    labels = np.asarray(labels)
    return (labels[:, None, :, :] == np.arange(num_classes)[None, :, None, None]).astype(np.float64)


def pixel_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean over N*H*W pixels of -log softmax(logits)[true class]."""
    if logits.ndim != 4:
        raise ShapeError(f"pixel_cross_entropy expects (N, K, H, W) logits, got {logits.shape}")
    n, k, h, w = logits.shape
    labels = np.asarray(labels)
    if labels.shape != (n, h, w):
        raise ShapeError(f"labels shape {labels.shape} does not match logits {logits.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"labels must lie in [0, {k}), found range [{labels.min()}, {labels.max()}]")
    log_probs = log_softmax_with_temperature(logits, axis=1, tau=1.0)
    picked = reduce("sum", mul(log_probs, Tensor.wrap(one_hot(labels, k))))
    return scalar_mul(picked, -1.0 / (n * h * w))
