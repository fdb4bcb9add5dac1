import logging
from typing import Callable, Sequence

import numpy as np

from autodiff.tensor import Tape, Tensor, no_tape
from utils.errors import TapeError

logger = logging.getLogger(__name__)


def check_gradients(f: Callable[..., Tensor], inputs: Sequence[Tensor], h: float = 1e-5) -> float:
    """Worst relative error between tape adjoints and central differences.

    ``f`` is called as ``f(*inputs)`` and must return a single-element tensor.
    Each coordinate is compared with (f(x+h) - f(x-h)) / 2h using the
    denominator max(|analytic|, |numeric|, 1e-8). Inputs are perturbed by
    rebinding their data arrays, so closures over module parameters work too;
    any randomness inside ``f`` must be re-seeded on every call.
    """
    for t in inputs:
        t.requires_grad = True
        t.zero_grad()

    with Tape() as tape:
        out = f(*inputs)
    if out.size != 1:
        raise TapeError(f"check_gradients needs a scalar function, got shape {out.shape}")
    tape.backward(out)
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in inputs]

    worst = 0.0
    with no_tape():
        for t, grad in zip(inputs, analytic):
            original = t.data
            numeric = np.empty_like(original)
            flat = original.reshape(-1)
            try:
                for idx in range(flat.size):
                    bumped = flat.copy()
                    bumped[idx] = flat[idx] + h
                    t.data = bumped.reshape(original.shape)
                    f_plus = f(*inputs).item()
                    bumped[idx] = flat[idx] - h
                    t.data = bumped.reshape(original.shape)
                    f_minus = f(*inputs).item()
                    numeric.reshape(-1)[idx] = (f_plus - f_minus) / (2.0 * h)
            finally:
                t.data = original
            denom = np.maximum(np.maximum(np.abs(grad), np.abs(numeric)), 1e-8)
            worst = max(worst, float(np.max(np.abs(grad - numeric) / denom)))
    for t in inputs:
        t.zero_grad()
    logger.debug(f"gradient check: max relative error {worst:.3e}")
    return worst
