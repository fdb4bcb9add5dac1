from synthtask.dataset import (
    ShapeGeometry,
    ShapeKind,
    SynthSample,
    generate_dataset,
    label_histogram,
    render_sample,
    shape_mask,
    stack_samples,
)
from synthtask.dump import read_split, write_split
from synthtask.metrics import ConfusionMatrix, confusion_update, miou, pixel_accuracy

__all__ = [
    "ConfusionMatrix",
    "ShapeGeometry",
    "ShapeKind",
    "SynthSample",
    "confusion_update",
    "generate_dataset",
    "label_histogram",
    "miou",
    "pixel_accuracy",
    "read_split",
    "render_sample",
    "shape_mask",
    "stack_samples",
    "write_split",
]
