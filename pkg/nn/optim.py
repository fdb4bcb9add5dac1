import logging
from typing import Iterable

from data_models.models import SgdConfig
from nn.module import Param
from utils.errors import MissingGradientError

logger = logging.getLogger(__name__)


def sgd_step(params: Iterable[Param], cfg: SgdConfig) -> None:
    """SGD with momentum and L2 weight decay on every tensor, biases included.

    g = grad + wd * value; buf = momentum * buf + g; value -= lr * buf.
    The new value tensor starts with no gradient.
    """
    params = list(params)
    missing = [p.name for p in params if p.value.grad is None]
    if missing:
        raise MissingGradientError(f"No gradient for {len(missing)} parameter(s), e.g. {missing[:3]}")
    for p in params:
        value = p.value.data
        g = p.value.grad + cfg.weight_decay * value
        p.momentum_buffer = cfg.momentum * p.momentum_buffer + g
        p.assign(value - cfg.lr * p.momentum_buffer)
