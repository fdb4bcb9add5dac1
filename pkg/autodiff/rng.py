"""
Seedable, platform-independent random streams.

The generator is counter-based SplitMix64: output ``i`` of a stream with seed
``s`` is ``mix64(s + (i + 1) * GAMMA)`` in wrapping uint64 arithmetic, so a
block of draws is a single vectorized numpy expression. Uniform floats take the
top 53 bits. Normals come from the basic Box–Muller transform: two uniforms
give two normals, and a leftover second normal is cached for the next call.
"""
import math
from typing import Callable, Dict, Sequence, Union

import numpy as np

from autodiff.tensor import Tensor
from utils.errors import ShapeError

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TWO_POW_M53 = 2.0 ** -53


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def _mix_int(value: int) -> int:
    return int(mix64(np.array([value & _MASK64], dtype=np.uint64))[0])


class Rng:
    """Deterministic random stream; identical seeds give identical draws everywhere."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.counter = 0
        self._cached_normal: Union[float, None] = None

    def spawn(self, stream: int) -> "Rng":
        """Independent child stream; the rule is seed' = mix64(seed XOR mix64(stream + 1))."""
        return Rng(_mix_int(self.seed ^ _mix_int(int(stream) + 1)))

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return mix64(np.uint64(self.seed) + idx * _GAMMA)

    def uniform(self, n: int) -> np.ndarray:
        """n floats in [0, 1)."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53

    def random(self) -> float:
        return float(self.uniform(1)[0])

    def randint(self, low: int, high: int) -> int:
        """Integer in [low, high] inclusive."""
        if high < low:
            raise ValueError(f"randint: empty range [{low}, {high}]")
        return low + min(int(self.random() * (high - low + 1)), high - low)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.uniform(n), kind="stable")

    def normal(self, n: int) -> np.ndarray:
        """n standard normals via basic Box–Muller."""
        out = np.empty(n, dtype=np.float64)
        filled = 0
        if n > 0 and self._cached_normal is not None:
            out[0] = self._cached_normal
            self._cached_normal = None
            filled = 1
        remaining = n - filled
        if remaining > 0:
            pairs = (remaining + 1) // 2
            u = self.uniform(2 * pairs).reshape(pairs, 2)
            radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
            theta = 2.0 * math.pi * u[:, 1]
            z = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1).reshape(-1)
            out[filled:] = z[:remaining]
            if 2 * pairs > remaining:
                self._cached_normal = float(z[-1])
        return out


def _check_shape(shape: Sequence[int]) -> tuple:
    shape = tuple(int(d) for d in shape)
    if any(d <= 0 for d in shape):
        raise ShapeError(f"invalid sample shape {shape}")
    return shape


def gaussian_sample(rng: Rng, shape: Sequence[int], mu: float = 0.0, sigma: float = 1.0) -> Tensor:
    """i.i.d. N(mu, sigma^2) constant tensor; sigma == 0 returns mu without drawing."""
    shape = _check_shape(shape)
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return Tensor.full(shape, mu)
    size = int(np.prod(shape))
    return Tensor.wrap(rng.normal(size).reshape(shape) * sigma + mu)


def gaussian_density(z, mu: float = 0.0, sigma: float = 1.0):
    """Closed-form normal density 1/(sigma*sqrt(2*pi)) * exp(-(z-mu)^2 / (2*sigma^2))."""
    if sigma <= 0:
        raise ValueError(f"density needs sigma > 0, got {sigma}")
    z = np.asarray(z, dtype=np.float64)
    dens = np.exp(-((z - mu) ** 2) / (2.0 * sigma ** 2)) / (sigma * math.sqrt(2.0 * math.pi))
    return float(dens) if dens.ndim == 0 else dens


NoiseSampler = Callable[[Rng, Sequence[int], float, float], Tensor]

# Only Gaussian noise is wired in; other families register here.
NOISE_SAMPLERS: Dict[str, NoiseSampler] = {"gaussian": gaussian_sample}


def sample_noise(kind: str, rng: Rng, shape: Sequence[int], mu: float, sigma: float) -> Tensor:
    try:
        sampler = NOISE_SAMPLERS[kind]
    except KeyError:
        raise ValueError(f"Unknown noise family '{kind}'. Available: {sorted(NOISE_SAMPLERS)}") from None
    return sampler(rng, shape, mu, sigma)
