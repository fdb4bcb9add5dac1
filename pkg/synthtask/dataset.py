"""
Deterministic shape-segmentation dataset.

Each image is a uniform gray canvas with 1-3 filled shapes (circle, rectangle,
triangle) painted in class colors, later shapes over earlier ones, plus
per-pixel Gaussian noise. Labels come from the same geometry masks used for
painting, so image and labels never disagree.

Seeding: split k (0 = train, 1 = val) uses Rng(spec.seed).spawn(k), and
sample i of that split uses .spawn(i).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from autodiff.rng import Rng
from data_models.models import SynthSpec

logger = logging.getLogger(__name__)

TRAIN_STREAM = 0
VAL_STREAM = 1

BACKGROUND_COLOR = (0.5, 0.5, 0.5)
CLASS_COLORS = [
    BACKGROUND_COLOR,
    (0.9, 0.2, 0.2),
    (0.2, 0.8, 0.3),
    (0.2, 0.3, 0.9),
    (0.9, 0.85, 0.2),
    (0.85, 0.3, 0.85),
    (0.2, 0.85, 0.85),
    (0.95, 0.55, 0.1),
]


class ShapeKind(str, Enum):
    CIRCLE = "circle"
    RECTANGLE = "rectangle"
    TRIANGLE = "triangle"


_KIND_CYCLE = [ShapeKind.CIRCLE, ShapeKind.RECTANGLE, ShapeKind.TRIANGLE]


def kind_for_class(cls: int) -> ShapeKind:
    return _KIND_CYCLE[(cls - 1) % len(_KIND_CYCLE)]


@dataclass(frozen=True)
class ShapeGeometry:
    cls: int
    kind: ShapeKind
    x0: int
    y0: int
    width: int
    height: int


@dataclass
class SynthSample:
    image: np.ndarray  # (3, H, W) float64 in [0, 1]
    labels: np.ndarray  # (H, W) int64 in [0, K)
    shapes: List[ShapeGeometry] = field(default_factory=list)


@lru_cache(maxsize=8)
def _pixel_centers(size: int) -> Tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    ys.setflags(write=False)
    xs.setflags(write=False)
    return ys, xs


def shape_mask(geom: ShapeGeometry, size: int) -> np.ndarray:
    """Boolean (size, size) mask of the pixels whose centers fall inside the shape."""
    ys, xs = _pixel_centers(size)
    x0, y0, w, h = geom.x0, geom.y0, geom.width, geom.height
    if geom.kind == ShapeKind.CIRCLE:
        r = w / 2.0
        return (xs - (x0 + r)) ** 2 + (ys - (y0 + r)) ** 2 <= r * r
    if geom.kind == ShapeKind.RECTANGLE:
        return (xs >= x0) & (xs <= x0 + w) & (ys >= y0) & (ys <= y0 + h)
    # isosceles triangle: apex top-center, base along the bottom edge
    apex_x = x0 + w / 2.0
    inside_rows = (ys >= y0) & (ys <= y0 + h)
    half_width = (ys - y0) / h * (w / 2.0)
    return inside_rows & (np.abs(xs - apex_x) <= half_width)


def _draw_geometry(rng: Rng, spec: SynthSpec) -> ShapeGeometry:
    size = spec.image_size
    max_extent = size // 2
    cls = rng.randint(1, spec.num_classes - 1)
    kind = kind_for_class(cls)
    width = rng.randint(spec.min_shape_size, max_extent)
    height = width if kind == ShapeKind.CIRCLE else rng.randint(spec.min_shape_size, max_extent)
    x0 = rng.randint(0, size - width)
    y0 = rng.randint(0, size - height)
    return ShapeGeometry(cls=cls, kind=kind, x0=x0, y0=y0, width=width, height=height)


def render_sample(rng: Rng, spec: SynthSpec) -> SynthSample:
    size = spec.image_size
    image = np.empty((3, size, size))
    image[:] = np.asarray(BACKGROUND_COLOR)[:, None, None]
    labels = np.zeros((size, size), dtype=np.int64)
    low, high = spec.shapes_per_image
    shapes = [_draw_geometry(rng, spec) for _ in range(rng.randint(low, high))]
    for geom in shapes:
        mask = shape_mask(geom, size)
        labels[mask] = geom.cls
        image[:, mask] = np.asarray(CLASS_COLORS[geom.cls])[:, None]
    if spec.noise_level > 0:
        image += spec.noise_level * rng.normal(image.size).reshape(image.shape)
        np.clip(image, 0.0, 1.0, out=image)
    return SynthSample(image=image, labels=labels, shapes=shapes)


def generate_split(spec: SynthSpec, stream: int, count: int) -> List[SynthSample]:
    split_rng = Rng(spec.seed).spawn(stream)
    return [render_sample(split_rng.spawn(i), spec) for i in range(count)]


def generate_dataset(spec: SynthSpec) -> Tuple[List[SynthSample], List[SynthSample]]:
    """(train, val) lists; a pure function of the spec, splits on disjoint seed streams."""
    train = generate_split(spec, TRAIN_STREAM, spec.train_count)
    val = generate_split(spec, VAL_STREAM, spec.val_count)
    logger.info(f"Generated synthetic dataset: {len(train)} train / {len(val)} val at {spec.image_size}px, K={spec.num_classes}")
    return train, val


def stack_samples(samples: Sequence[SynthSample]) -> Tuple[np.ndarray, np.ndarray]:
    """(N, 3, H, W) images and (N, H, W) labels."""
    images = np.stack([s.image for s in samples])
    labels = np.stack([s.labels for s in samples])
    return images, labels


def label_histogram(samples: Sequence[SynthSample], num_classes: int) -> np.ndarray:
    counts = np.zeros(num_classes, dtype=np.int64)
    for s in samples:
        counts += np.bincount(s.labels.reshape(-1), minlength=num_classes)
    return counts
