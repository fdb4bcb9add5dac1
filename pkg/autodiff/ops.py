"""
Differentiable primitives.

Every op checks shapes, computes a fresh float64 array and registers a
backward rule on the active tape. There is no implicit broadcasting apart
from ``scalar_mul``.
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from autodiff.tensor import Tensor, make_result
from utils.errors import NumericError, ShapeError

Axes = Union[int, Sequence[int], None]


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return make_result("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return make_result("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return make_result("mul", a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def scalar_mul(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return make_result("scalar_mul", a.data * c, (a,), lambda g: (g * c,))


def exp(a: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        out = np.exp(a.data)

    def backward(g):
        return (g * out,)

    return make_result("exp", out, (a,), backward)


def log(a: Tensor) -> Tensor:
    if np.any(a.data <= 0.0):
        raise NumericError("log: input must be strictly positive")
    return make_result("log", np.log(a.data), (a,), lambda g: (g / a.data,))


def relu(a: Tensor) -> Tensor:
    # subgradient 0 at exactly 0
    active = a.data > 0.0
    return make_result("relu", np.where(active, a.data, 0.0), (a,), lambda g: (g * active,))


_UNARY = {"exp": exp, "log": log, "relu": relu}
_BINARY = {"add": add, "sub": sub, "mul": mul}


def elementwise(op: str, a: Tensor, b: Optional[Union[Tensor, float]] = None) -> Tensor:
    """Dispatch one of add, sub, mul, scalar_mul, exp, log, relu by name."""
    if op in _UNARY:
        if b is not None:
            raise ShapeError(f"{op} is unary")
        return _UNARY[op](a)
    if op in _BINARY:
        if not isinstance(b, Tensor):
            raise ShapeError(f"{op} needs a second tensor operand")
        return _BINARY[op](a, b)
    if op == "scalar_mul":
        if b is None or isinstance(b, Tensor):
            raise ShapeError("scalar_mul needs a float operand")
        return scalar_mul(a, float(b))
    raise ValueError(f"Unknown elementwise op: {op}")


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(int(d) for d in shape)
    if int(np.prod(shape)) != a.size:
        raise ShapeError(f"reshape: cannot view {a.shape} as {shape}")
    src = a.shape
    return make_result("reshape", a.data.reshape(shape), (a,), lambda g: (g.reshape(src),))


def _normalize_axes(a: Tensor, axes: Axes) -> Tuple[int, ...]:
    if axes is None:
        return tuple(range(a.ndim))
    if isinstance(axes, int):
        axes = (axes,)
    norm = []
    for ax in axes:
        if not -a.ndim <= ax < a.ndim:
            raise ShapeError(f"axis {ax} out of range for shape {a.shape}")
        norm.append(ax % a.ndim)
    if len(set(norm)) != len(norm):
        raise ShapeError(f"duplicate axes {tuple(axes)}")
    return tuple(sorted(norm))


def reduce(op: str, a: Tensor, axes: Axes = None) -> Tensor:
    """Sum or mean over ``axes`` (all axes when None); reduced axes are removed."""
    if op not in ("sum", "mean"):
        raise ValueError(f"Unknown reduction: {op}")
    axes_t = _normalize_axes(a, axes)
    count = int(np.prod([a.shape[ax] for ax in axes_t])) if axes_t else 1
    scale = 1.0 if op == "sum" else 1.0 / count
    out = np.sum(a.data, axis=axes_t) if axes_t else a.data.copy()
    if op == "mean":
        out = out * scale
    src = a.shape

    def backward(g):
        expanded = np.expand_dims(g, axes_t) if axes_t else g
        return (np.broadcast_to(expanded * scale, src).copy(),)

    return make_result(f"reduce_{op}", np.asarray(out, dtype=np.float64), (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    return reduce("sum", a, None)


def mean_all(a: Tensor) -> Tensor:
    return reduce("mean", a, None)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not tau > 0.0:
        raise ValueError(f"temperature must be positive, got {tau}")
    return tau


def softmax_with_temperature(x: Tensor, axis: int, tau: float = 1.0) -> Tensor:
    """exp((x - max) / tau) normalized along ``axis``."""
    tau = _check_tau(tau)
    (axis,) = _normalize_axes(x, axis)
    z = (x.data - np.max(x.data, axis=axis, keepdims=True)) / tau
    e = np.exp(z)
    p = e / np.sum(e, axis=axis, keepdims=True)

    def backward(g):
        inner = np.sum(g * p, axis=axis, keepdims=True)
        return (p * (g - inner) / tau,)

    return make_result("softmax", p, (x,), backward)


def log_softmax_with_temperature(x: Tensor, axis: int, tau: float = 1.0) -> Tensor:
    """log of softmax_with_temperature, computed without forming the probabilities first."""
    tau = _check_tau(tau)
    (axis,) = _normalize_axes(x, axis)
    z = (x.data - np.max(x.data, axis=axis, keepdims=True)) / tau
    lse = np.log(np.sum(np.exp(z), axis=axis, keepdims=True))
    out = z - lse
    p = np.exp(out)

    def backward(g):
        return ((g - p * np.sum(g, axis=axis, keepdims=True)) / tau,)

    return make_result("log_softmax", out, (x,), backward)


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """2-D cross-correlation, NCHW input and (Cout, Cin, kh, kw) kernels, zero padding.

    Computed channels-last as one (N*Ho*Wo, Cin) x (Cin, Cout) matrix product per
    kernel tap, accumulated in fixed (row, column) tap order.
    """
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(f"conv2d expects 4-D input and weight, got {x.shape} and {weight.shape}")
    n, cin, h, w = x.shape
    cout, wcin, kh, kw = weight.shape
    if cin != wcin:
        raise ShapeError(f"conv2d: input has {cin} channels, weight expects {wcin}")
    if bias.shape != (cout,):
        raise ShapeError(f"conv2d: bias shape {bias.shape} != ({cout},)")
    if stride < 1 or padding < 0:
        raise ValueError(f"conv2d: invalid stride={stride} / padding={padding}")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise ShapeError(f"conv2d: kernel {kh}x{kw} does not fit padded input {hp}x{wp}")
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    x_cl = np.ascontiguousarray(xp.transpose(0, 2, 3, 1))  # (N, Hp, Wp, Cin)
    taps = np.ascontiguousarray(weight.data.transpose(2, 3, 1, 0))  # (kh, kw, Cin, Cout)

    def window(i: int, j: int) -> Tuple[slice, slice]:
        return slice(i, i + stride * (ho - 1) + 1, stride), slice(j, j + stride * (wo - 1) + 1, stride)

    def patch(i: int, j: int) -> np.ndarray:
        rows, cols = window(i, j)
        return x_cl[:, rows, cols, :].reshape(-1, cin)

    out_mat = np.empty((n * ho * wo, cout))
    out_mat[...] = bias.data
    for i in range(kh):
        for j in range(kw):
            out_mat += patch(i, j) @ taps[i, j]
    out = out_mat.reshape(n, ho, wo, cout).transpose(0, 3, 1, 2)

    def backward(g):
        g_cl = np.ascontiguousarray(g.transpose(0, 2, 3, 1))  # (N, Ho, Wo, Cout)
        g_mat = g_cl.reshape(-1, cout)
        grad_b = g_mat.sum(axis=0)
        grad_taps = np.empty((kh, kw, cin, cout))
        grad_cl = np.zeros((n, hp, wp, cin))
        for i in range(kh):
            for j in range(kw):
                rows, cols = window(i, j)
                grad_taps[i, j] = patch(i, j).T @ g_mat
                grad_cl[:, rows, cols, :] += (g_mat @ taps[i, j].T).reshape(n, ho, wo, cin)
        grad_xp = grad_cl.transpose(0, 3, 1, 2)
        grad_x = grad_xp[:, :, padding:padding + h, padding:padding + w] if padding else grad_xp
        return (np.ascontiguousarray(grad_x), np.ascontiguousarray(grad_taps.transpose(3, 2, 0, 1)), grad_b)

    return make_result("conv2d", np.ascontiguousarray(out), (x, weight, bias), backward)
