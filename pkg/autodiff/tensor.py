"""
Dense float64 tensors and the gradient tape that records operations on them
"""
import contextvars
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

from utils.errors import NumericError, ShapeError, TapeError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_ACTIVE_TAPE: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar("active_tape", default=None)


class Tensor:
    """Row-major float64 array with an optional adjoint.

    The data array is read-only once wrapped; only ``grad`` changes after
    creation (adjoint accumulation during a backward pass).
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.array(data, dtype=np.float64, copy=True)
        self._init(arr, requires_grad)

    def _init(self, arr: np.ndarray, requires_grad: bool) -> None:
        if any(dim <= 0 for dim in arr.shape):
            raise ShapeError(f"Tensor dimensions must be positive, got {arr.shape}")
        arr = np.require(arr, dtype=np.float64, requirements="C")
        arr.setflags(write=False)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None

    @classmethod
    def wrap(cls, arr: np.ndarray, requires_grad: bool = False) -> "Tensor":
        """Wrap a freshly computed array without copying it."""
        out = cls.__new__(cls)
        out._init(np.asarray(arr, dtype=np.float64), requires_grad)
        return out

    @classmethod
    def zeros(cls, shape: Sequence[int], requires_grad: bool = False) -> "Tensor":
        return cls.wrap(np.zeros(tuple(shape)), requires_grad)

    @classmethod
    def full(cls, shape: Sequence[int], value: float, requires_grad: bool = False) -> "Tensor":
        return cls.wrap(np.full(tuple(shape), float(value)), requires_grad)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        """Same values, cut from any tape: a stop-gradient constant."""
        return Tensor.wrap(self.data, requires_grad=False)

    def accumulate_grad(self, g: np.ndarray) -> None:
        if g.shape != self.data.shape:
            raise ShapeError(f"Adjoint shape {g.shape} does not match tensor shape {self.shape}")
        self.grad = g.copy() if self.grad is None else self.grad + g

    # Operator sugar; the primitives live in autodiff.ops.
    def __add__(self, other: "Tensor") -> "Tensor":
        from autodiff import ops
        return ops.add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from autodiff import ops
        return ops.sub(self, other)

    def __mul__(self, other) -> "Tensor":
        from autodiff import ops
        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.scalar_mul(self, float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        from autodiff import ops
        return ops.scalar_mul(self, -1.0)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


@dataclass
class TapeRecord:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """Ordered record of primitive operations executed while the tape is active.

    Usage::

        with Tape() as tape:
            loss = f(params)
        tape.backward(loss)

    Operations executed with no active tape are not recorded and produce
    constants; frozen networks run that way. A tape supports one backward pass.
    """

    def __init__(self):
        self.records: list[TapeRecord] = []
        self._consumed = False
        self._tokens: list[contextvars.Token] = []

    def __enter__(self) -> "Tape":
        if self._consumed:
            raise TapeError("Tape has already been consumed by a backward pass")
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _ACTIVE_TAPE.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.records)

    @property
    def consumed(self) -> bool:
        return self._consumed

    def record(self, rec: TapeRecord) -> None:
        if self._consumed:
            raise TapeError("Cannot record onto a consumed tape")
        self.records.append(rec)

    def backward(self, loss: Tensor) -> None:
        """Replay backward rules in reverse recorded order, seeding d(loss)=1."""
        if self._consumed:
            raise TapeError("Tape reuse: backward was already run on this tape")
        if loss.size != 1:
            raise TapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        self._consumed = True
        if not loss.requires_grad:
            logger.debug("backward called on a constant loss; nothing to propagate")
            return
        loss.accumulate_grad(np.ones_like(loss.data))
        for rec in reversed(self.records):
            if rec.output.grad is None:
                continue
            grads = rec.backward(rec.output.grad)
            for tensor, g in zip(rec.inputs, grads):
                if g is not None and tensor.requires_grad:
                    tensor.accumulate_grad(g)
        self.records.clear()


def active_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE.get()


@contextmanager
def no_tape() -> Iterator[None]:
    """Run a block without recording, e.g. a frozen teacher forward pass."""
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)


def make_result(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward: BackwardFn) -> Tensor:
    """Wrap an op's output, enforce finiteness and record it on the active tape."""
    if not np.all(np.isfinite(data)):
        raise NumericError(f"{op} produced non-finite values")
    tape = _ACTIVE_TAPE.get()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor.wrap(data, requires_grad=track)
    if track:
        tape.record(TapeRecord(op=op, inputs=tuple(inputs), output=out, backward=backward))
    return out
