"""
SYNTH1 binary split files.

Layout (little-endian): magic b"SYNTH1", uint32 K, H, W, count, then per
sample the float32 image (3*H*W, CHW order) followed by uint8 labels (H*W).
"""
import logging
import struct
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from synthtask.dataset import SynthSample
from utils.io import PathLike, atomic_write_bytes

logger = logging.getLogger(__name__)

MAGIC = b"SYNTH1"
_HEADER = struct.Struct("<6sIIII")


def write_split(path: PathLike, samples: Sequence[SynthSample], num_classes: int) -> Path:
    if not samples:
        raise ValueError("cannot dump an empty split")
    _, h, w = samples[0].image.shape
    parts = [_HEADER.pack(MAGIC, num_classes, h, w, len(samples))]
    for s in samples:
        parts.append(s.image.astype("<f4").tobytes())
        parts.append(s.labels.astype(np.uint8).tobytes())
    target = atomic_write_bytes(path, b"".join(parts))
    logger.info(f"Wrote {len(samples)} samples to {target}")
    return target


def read_split(path: PathLike) -> Tuple[int, List[SynthSample]]:
    """(K, samples); images come back as float32 values widened to float64."""
    payload = Path(path).read_bytes()
    magic, k, h, w, count = _HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    offset = _HEADER.size
    img_bytes = 3 * h * w * 4
    lbl_bytes = h * w
    expected = offset + count * (img_bytes + lbl_bytes)
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(payload)}")
    samples = []
    for _ in range(count):
        image = np.frombuffer(payload, dtype="<f4", count=3 * h * w, offset=offset).reshape(3, h, w)
        offset += img_bytes
        labels = np.frombuffer(payload, dtype=np.uint8, count=h * w, offset=offset).reshape(h, w)
        offset += lbl_bytes
        samples.append(SynthSample(image=image.astype(np.float64), labels=labels.astype(np.int64)))
    return k, samples
