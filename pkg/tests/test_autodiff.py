import math

import numpy as np
import pytest

from autodiff import ops
from autodiff.tensor import Tape, Tensor, active_tape, no_tape
from utils.errors import NumericError, ShapeError, TapeError


def naive_conv2d(x, w, b, stride, padding):
    n, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (wd + 2 * padding - kw) // stride + 1
    out = np.zeros((n, cout, ho, wo))
    for i in range(n):
        for o in range(cout):
            for y in range(ho):
                for z in range(wo):
                    patch = xp[i, :, y * stride:y * stride + kh, z * stride:z * stride + kw]
                    out[i, o, y, z] = np.sum(patch * w[o]) + b[o]
    return out


class TestTensor:
    def test_data_is_read_only(self):
        t = Tensor([1.0, 2.0])
        with pytest.raises(ValueError):
            t.data[0] = 5.0

    def test_zero_dimension_rejected(self):
        with pytest.raises(ShapeError):
            Tensor(np.zeros((2, 0)))

    def test_constructor_copies_input(self):
        src = np.ones(3)
        t = Tensor(src)
        src[0] = 7.0
        assert t.data[0] == 1.0

    def test_item_needs_single_element(self):
        assert Tensor([[3.5]]).item() == 3.5
        with pytest.raises(ShapeError):
            Tensor([1.0, 2.0]).item()

    def test_detach_cuts_gradient(self):
        a = Tensor([2.0], requires_grad=True)
        assert not a.detach().requires_grad


class TestElementwise:
    def test_relu_example(self):
        out = ops.relu(Tensor([-1.0, 0.0, 2.0]))
        assert out.data.tolist() == [0.0, 0.0, 2.0]

    def test_add_zeros_is_exact(self, nprng):
        x = Tensor(nprng.normal(size=(3, 4)))
        assert np.array_equal(ops.add(x, Tensor.zeros(x.shape)).data, x.data)

    def test_square_derivative(self):
        x = Tensor([3.0], requires_grad=True)
        with Tape() as tape:
            y = ops.sum_all(ops.mul(x, x))
        tape.backward(y)
        assert x.grad.tolist() == [6.0]

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))

    def test_log_non_positive(self):
        with pytest.raises(NumericError):
            ops.log(Tensor([1.0, 0.0]))

    def test_exp_overflow_is_numeric_error(self):
        with pytest.raises(NumericError):
            ops.exp(Tensor([1000.0]))

    def test_elementwise_dispatch(self):
        a, b = Tensor([1.0, 2.0]), Tensor([3.0, 4.0])
        assert ops.elementwise("mul", a, b).data.tolist() == [3.0, 8.0]
        assert ops.elementwise("scalar_mul", a, 2.0).data.tolist() == [2.0, 4.0]
        assert ops.elementwise("relu", Tensor([-1.0])).data.tolist() == [0.0]
        with pytest.raises(ValueError):
            ops.elementwise("tanh", a)

    def test_operator_sugar(self):
        a, b = Tensor([1.0, 2.0]), Tensor([3.0, 5.0])
        assert (a + b).data.tolist() == [4.0, 7.0]
        assert (b - a).data.tolist() == [2.0, 3.0]
        assert (a * 3).data.tolist() == [3.0, 6.0]
        assert (-a).data.tolist() == [-1.0, -2.0]


class TestReduce:
    def test_sum_and_mean(self):
        x = Tensor(np.arange(6.0).reshape(2, 3))
        assert ops.reduce("sum", x, 1).data.tolist() == [3.0, 12.0]
        assert ops.reduce("mean", x, 0).data.tolist() == [1.5, 2.5, 3.5]
        assert ops.sum_all(x).item() == 15.0

    def test_sum_backward_is_ones(self, nprng):
        x = Tensor(nprng.normal(size=(2, 3, 4)), requires_grad=True)
        with Tape() as tape:
            y = ops.sum_all(x)
        assert y.shape == ()
        tape.backward(y)
        assert np.array_equal(x.grad, np.ones((2, 3, 4)))

    def test_full_reduction_is_zero_dimensional(self):
        x = Tensor(np.ones((2, 3, 4)))
        assert ops.reduce("sum", x).shape == ()
        assert ops.reduce("mean", x).shape == ()
        assert Tensor(2.5).shape == ()

    def test_mean_backward_through_scalar_chain(self):
        x = Tensor(np.ones((2, 3, 4)), requires_grad=True)
        with Tape() as tape:
            y = ops.scalar_mul(ops.mean_all(x), 2.0)
        tape.backward(y)
        assert np.allclose(x.grad, np.full((2, 3, 4), 2.0 / 24))

    def test_invalid_axis(self):
        x = Tensor(np.ones((2, 3)))
        with pytest.raises(ShapeError):
            ops.reduce("sum", x, 2)
        with pytest.raises(ShapeError):
            ops.reduce("sum", x, (0, -2))

    def test_reshape_size_mismatch(self):
        with pytest.raises(ShapeError):
            ops.reshape(Tensor(np.ones(6)), (4, 2))


class TestSoftmax:
    def test_uniform_input(self):
        p = ops.softmax_with_temperature(Tensor([0.0, 0.0]), axis=0, tau=1.0)
        assert p.data.tolist() == [0.5, 0.5]

    def test_temperature_example(self):
        p = ops.softmax_with_temperature(Tensor([0.0, 4.0]), axis=0, tau=4.0)
        e = math.e
        assert p.data[0] == pytest.approx(1.0 / (1.0 + e), abs=1e-12)
        assert p.data[1] == pytest.approx(e / (1.0 + e), abs=1e-12)

    def test_sums_to_one_and_shift_invariant(self, nprng):
        x = nprng.normal(size=(3, 5)) * 10
        p = ops.softmax_with_temperature(Tensor(x), axis=1, tau=0.7).data
        shifted = ops.softmax_with_temperature(Tensor(x + 123.0), axis=1, tau=0.7).data
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert np.max(np.abs(p - shifted)) < 1e-12

    def test_large_logits_stay_finite(self):
        p = ops.softmax_with_temperature(Tensor([1000.0, 0.0]), axis=0, tau=1.0)
        assert p.data.tolist() == [1.0, 0.0]

    def test_log_softmax_matches_log_of_softmax(self, nprng):
        x = Tensor(nprng.normal(size=(2, 4)))
        p = ops.softmax_with_temperature(x, axis=1, tau=2.0).data
        lp = ops.log_softmax_with_temperature(x, axis=1, tau=2.0).data
        assert np.allclose(np.log(p), lp, atol=1e-12)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_non_positive_temperature(self, tau):
        with pytest.raises(ValueError):
            ops.softmax_with_temperature(Tensor([1.0, 2.0]), axis=0, tau=tau)


class TestConv2d:
    def test_identity_kernel(self, nprng):
        x = Tensor(nprng.normal(size=(2, 3, 5, 5)))
        w = np.zeros((3, 3, 1, 1))
        for c in range(3):
            w[c, c, 0, 0] = 1.0
        out = ops.conv2d(x, Tensor(w), Tensor.zeros((3,)))
        assert np.array_equal(out.data, x.data)

    @pytest.mark.parametrize("stride,padding", [(1, 0), (1, 1), (2, 1), (2, 0)])
    def test_matches_naive_loop(self, nprng, stride, padding):
        x = nprng.normal(size=(2, 3, 6, 5))
        w = nprng.normal(size=(4, 3, 3, 3))
        b = nprng.normal(size=4)
        out = ops.conv2d(Tensor(x), Tensor(w), Tensor(b), stride=stride, padding=padding)
        assert np.allclose(out.data, naive_conv2d(x, w, b, stride, padding), atol=1e-12)

    def test_output_shape(self):
        out = ops.conv2d(Tensor(np.ones((1, 2, 7, 7))), Tensor(np.ones((5, 2, 3, 3))), Tensor.zeros((5,)), padding=1)
        assert out.shape == (1, 5, 7, 7)

    def test_channel_mismatch(self):
        with pytest.raises(ShapeError):
            ops.conv2d(Tensor(np.ones((1, 2, 4, 4))), Tensor(np.ones((1, 3, 3, 3))), Tensor.zeros((1,)))

    def test_kernel_larger_than_input(self):
        with pytest.raises(ShapeError):
            ops.conv2d(Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones((1, 1, 3, 3))), Tensor.zeros((1,)))


class TestTape:
    def test_no_recording_without_tape(self):
        x = Tensor([1.0], requires_grad=True)
        assert active_tape() is None
        assert not ops.mul(x, x).requires_grad

    def test_no_tape_suspends_recording(self):
        x = Tensor([1.0], requires_grad=True)
        with Tape() as tape:
            with no_tape():
                ops.mul(x, x)
            assert len(tape) == 0

    def test_reuse_raises(self):
        x = Tensor([2.0], requires_grad=True)
        with Tape() as tape:
            y = ops.sum_all(ops.mul(x, x))
        tape.backward(y)
        with pytest.raises(TapeError):
            tape.backward(y)
        with pytest.raises(TapeError):
            with tape:
                pass

    def test_backward_needs_scalar(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            y = ops.mul(x, x)
        with pytest.raises(TapeError):
            tape.backward(y)

    def test_gradient_accumulates_over_uses(self):
        x = Tensor([1.5], requires_grad=True)
        with Tape() as tape:
            y = ops.sum_all(ops.add(ops.scalar_mul(x, 2.0), ops.scalar_mul(x, 3.0)))
        tape.backward(y)
        assert x.grad.tolist() == [5.0]

    def test_same_ops_same_bits(self, nprng):
        a = nprng.normal(size=(2, 3, 4, 4))
        w = nprng.normal(size=(3, 3, 3, 3))

        def run():
            x = Tensor(a, requires_grad=True)
            with Tape() as tape:
                y = ops.sum_all(ops.relu(ops.conv2d(x, Tensor(w), Tensor.zeros((3,)), padding=1)))
            tape.backward(y)
            return y.item(), x.grad

        (v1, g1), (v2, g2) = run(), run()
        assert v1 == v2
        assert np.array_equal(g1, g2)
