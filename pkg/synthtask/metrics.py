''' Confusion matrix, per-class IoU, mIoU and pixel accuracy '''
from typing import List, Optional, Tuple

import numpy as np


class ConfusionMatrix:
    """K x K counts, rows = ground truth, cols = prediction."""

    def __init__(self, num_classes: int):
        if num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {num_classes}")
        self.num_classes = num_classes
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    @classmethod
    def from_counts(cls, counts) -> "ConfusionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"confusion counts must be square, got shape {counts.shape}")
        cm = cls(counts.shape[0])
        cm.counts = counts.copy()
        return cm

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def update(self, pred: np.ndarray, truth: np.ndarray) -> None:
        confusion_update(self, pred, truth)

    def reset(self) -> None:
        self.counts[...] = 0

    def to_list(self) -> List[List[int]]:
        return self.counts.tolist()


def confusion_update(cm: ConfusionMatrix, pred: np.ndarray, truth: np.ndarray) -> None:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction shape {pred.shape} != ground-truth shape {truth.shape}")
    k = cm.num_classes
    for name, arr in (("prediction", pred), ("ground truth", truth)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"{name} classes must lie in [0, {k})")
    flat = k * truth.reshape(-1).astype(np.int64) + pred.reshape(-1).astype(np.int64)
    cm.counts += np.bincount(flat, minlength=k * k).reshape(k, k)


def miou(cm: ConfusionMatrix) -> Tuple[List[Optional[float]], float]:
    """IoU_k = TP / (row + col - TP); classes with an empty union are left out (None)."""
    counts = cm.counts
    tp = np.diag(counts)
    union = counts.sum(axis=1) + counts.sum(axis=0) - tp
    per_class: List[Optional[float]] = [
        float(tp[k]) / float(union[k]) if union[k] > 0 else None for k in range(cm.num_classes)
    ]
    included = [v for v in per_class if v is not None]
    if not included:
        raise ValueError("mIoU undefined: every class has an empty union")
    return per_class, float(sum(included) / len(included))


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise ValueError("pixel accuracy undefined on an empty confusion matrix")
    return float(np.trace(cm.counts)) / float(total)
