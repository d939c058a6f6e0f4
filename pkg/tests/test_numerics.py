import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ganeq.numerics import (
    SGD,
    Adam,
    MultiStepLR,
    RunningStats,
    Tensor,
    backward,
    batchnorm1d,
    bce_loss,
    conv1d,
    conv_fans,
    dirac_,
    elu,
    glorot_bound,
    glorot_uniform_,
    linear,
    make_rng,
    max_relative_error,
    mse_loss,
    no_grad,
    sigmoid,
    take,
    tsum,
    windows,
)

from gradsuite import LAYERS, case


def leaf(x):
    return Tensor(np.asarray(x, dtype=np.float64), requires_grad=True)


# -- conv1d ----------------------------------------------------------------

def test_conv1d_dirac_is_identity():
    w = Tensor(np.zeros((1, 1, 3)))
    dirac_(w)
    out = conv1d(Tensor([1.0, 2.0, 3.0]), w, stride=1, padding=1)
    assert np.array_equal(out.data, [[1.0, 2.0, 3.0]])


def test_conv1d_strided_hand_convolution():
    x = Tensor([0.407, 0.815, 0.407, 0.815])
    out = conv1d(x, Tensor(np.ones((1, 1, 2))), stride=2, padding=0)
    assert np.allclose(out.data, [[1.222, 1.222]], atol=1e-12)


@pytest.mark.parametrize("length", [2, 8, 20, 200])
def test_conv1d_stride_two_halves_length(length):
    w = Tensor(np.zeros((1, 1, 21)))
    out = conv1d(Tensor(np.ones(length)), w, stride=2)
    assert out.shape == (1, length // 2)


def test_conv1d_matches_numpy_correlate():
    rng = np.random.default_rng(1)
    x, k = rng.normal(size=30), rng.normal(size=5)
    out = conv1d(Tensor(x), Tensor(k[None, None, :]), padding=0)
    assert np.allclose(out.data[0], np.correlate(x, k, mode="valid"), atol=1e-12)


def test_conv1d_channel_mismatch():
    with pytest.raises(ValueError):
        conv1d(Tensor(np.ones((2, 10))), Tensor(np.ones((1, 3, 3))))


def test_conv1d_kernel_too_long():
    with pytest.raises(ValueError):
        conv1d(Tensor(np.ones(4)), Tensor(np.ones((1, 1, 9))), padding=0)


# -- batchnorm -------------------------------------------------------------

def test_batchnorm_constant_channel_gives_zero():
    out = batchnorm1d(Tensor(np.full((1, 5), 3.0)), Tensor([1.0]), Tensor([0.0]))
    assert np.array_equal(out.data, np.zeros((1, 5)))


def test_batchnorm_unit_pair():
    out = batchnorm1d(Tensor([[-1.0, 1.0]]), Tensor([1.0]), Tensor([0.0]))
    expected = 1.0 / math.sqrt(1.0 + 1e-5)
    assert np.allclose(out.data, [[-expected, expected]], atol=1e-15)


def test_batchnorm_affine():
    rng = np.random.default_rng(0)
    out = batchnorm1d(Tensor(rng.normal(size=(2, 500))), Tensor([2.0, 2.0]), Tensor([3.0, 3.0]))
    assert np.allclose(out.data.mean(axis=1), 3.0, atol=1e-10)
    assert np.allclose(out.data.std(axis=1), 2.0, atol=1e-4)


def test_batchnorm_normalizes_per_channel():
    rng = np.random.default_rng(2)
    x = rng.normal(5.0, 3.0, size=(3, 64))
    out = batchnorm1d(Tensor(x), Tensor(np.ones(3)), Tensor(np.zeros(3)))
    assert np.all(np.abs(out.data.mean(axis=1)) < 1e-10)
    assert np.all(np.abs(out.data.var(axis=1) - 1.0) < 1e-4)


def test_batchnorm_running_stats_and_eval():
    stats = RunningStats(1)
    x = np.array([[1.0, 2.0, 3.0, 4.0]])
    batchnorm1d(Tensor(x), Tensor([1.0]), Tensor([0.0]), stats, training=True)
    assert np.isclose(stats.mean[0], 0.1 * 2.5)
    assert np.isclose(stats.var[0], 0.9 + 0.1 * np.var(x, ddof=1))
    out = batchnorm1d(Tensor(x), Tensor([1.0]), Tensor([0.0]), stats, training=False)
    assert np.allclose(out.data, (x - stats.mean[0]) / np.sqrt(stats.var[0] + 1e-5))


def test_batchnorm_needs_two_samples():
    with pytest.raises(ValueError):
        batchnorm1d(Tensor([[1.0]]), Tensor([1.0]), Tensor([0.0]))


def test_batchnorm_length_two_gradient_vanishes():
    # at L=2 the output is +-1/sqrt(1 + eps/var): the input gradient is O(eps)
    x = leaf([[-0.7, 1.3]])
    backward(tsum(batchnorm1d(x, Tensor([1.0]), Tensor([0.0])) * Tensor([[1.0, 2.0]])))
    assert np.all(np.abs(x.grad) < 1e-4)


# -- activations, linear, losses ------------------------------------------

def test_activation_values():
    assert elu(Tensor(0.0)).item() == 0.0
    assert sigmoid(Tensor(0.0)).item() == 0.5
    assert abs(elu(Tensor(-20.0)).item() + 1.0) < 1e-8
    assert math.isclose(sigmoid(Tensor(math.log(3.0))).item(), 0.75, rel_tol=1e-14)


def test_sigmoid_extremes_do_not_overflow():
    with np.errstate(over="raise"):
        out = sigmoid(Tensor([-1000.0, 1000.0])).data
    assert out[0] == 0.0 and out[1] == 1.0


def test_linear_examples():
    x = Tensor([1.0, 2.0, 3.0])
    assert np.array_equal(linear(x, Tensor(np.eye(3)), Tensor(np.zeros(3))).data, x.data)
    assert np.array_equal(linear(x, Tensor(np.ones((1, 3))), Tensor([0.0])).data, [6.0])
    assert np.array_equal(linear(x, Tensor(np.zeros((2, 3))), Tensor([4.0, -1.0])).data, [4.0, -1.0])
    with pytest.raises(ValueError):
        linear(x, Tensor(np.ones((1, 4))), Tensor([0.0]))


def test_bce_values():
    assert math.isclose(bce_loss(Tensor([0.5]), 1.0).item(), math.log(2.0), rel_tol=1e-14)
    assert bce_loss(Tensor([1 - 1e-7]), 1.0).item() < 1e-6
    assert math.isclose(bce_loss(Tensor([0.25]), 0.0).item(), -math.log(0.75), rel_tol=1e-14)
    # clamping keeps hard 0/1 predictions finite
    assert math.isfinite(bce_loss(Tensor([0.0, 1.0]), 1.0).item())


def test_mse_values():
    assert mse_loss(Tensor([1.0, 2.0]), Tensor([1.0, 2.0])).item() == 0.0
    assert mse_loss(Tensor([0.0, 0.0]), Tensor([1.0, 1.0])).item() == 1.0
    assert mse_loss(Tensor([2.0]), Tensor([-2.0])).item() == 16.0
    with pytest.raises(ValueError):
        mse_loss(Tensor([1.0]), Tensor([1.0, 2.0]))


def test_ns_gan_gradients_at_half():
    p = leaf([0.5])
    backward(bce_loss(p, 1.0))
    assert math.isclose(p.grad[0], -2.0, rel_tol=1e-12)
    p = leaf([0.5])
    backward(bce_loss(p, 0.0))
    assert math.isclose(p.grad[0], 2.0, rel_tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(p=st.floats(1e-6, 1 - 1e-6), q=st.floats(1e-6, 1 - 1e-6), label=st.sampled_from([0.0, 1.0]))
def test_bce_nonnegative_and_monotone(p, q, label):
    a, b = bce_loss(Tensor([p]), label).item(), bce_loss(Tensor([q]), label).item()
    assert a >= 0 and b >= 0
    if label == 1.0 and p < q:
        assert a >= b


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 20), elements=st.floats(-1e3, 1e3)),
       arrays(np.float64, st.integers(1, 20), elements=st.floats(-1e3, 1e3)))
def test_mse_nonnegative(a, b):
    n = min(len(a), len(b))
    assert mse_loss(Tensor(a[:n]), Tensor(b[:n])).item() >= 0.0


# -- backward --------------------------------------------------------------

def test_backward_hand_chain_rule():
    w = leaf(1.0)
    backward(mse_loss(w * Tensor(2.0), Tensor(0.0)))
    assert w.grad == 8.0


def test_backward_unused_parameter_stays_zero():
    w, unused = leaf([1.0]), leaf([5.0])
    backward(mse_loss(w, Tensor([0.0])))
    assert unused.grad[0] == 0.0


def test_backward_accumulates():
    w = leaf([1.5])
    backward(mse_loss(w * Tensor([2.0]), Tensor([0.0])))
    once = w.grad.copy()
    backward(mse_loss(w * Tensor([2.0]), Tensor([0.0])))
    assert np.array_equal(w.grad, 2 * once)
    w.zero_grad()
    assert np.all(w.grad == 0.0)


def test_backward_needs_scalar():
    with pytest.raises(ValueError):
        backward(leaf([1.0, 2.0]) * Tensor([1.0, 1.0]))


def test_shared_subexpression_gradient():
    x = leaf([3.0])
    y = x * x
    backward(tsum(y + y))
    assert x.grad[0] == 12.0


def test_no_grad_builds_no_tape():
    x = leaf([1.0])
    with no_grad():
        y = x * Tensor([2.0])
    assert not y.requires_grad


def test_take_scatters_repeated_indices():
    x = leaf([1.0, 2.0, 3.0])
    backward(tsum(take(x, np.array([0, 0, 2]))))
    assert np.array_equal(x.grad, [2.0, 0.0, 1.0])


def test_windows_layout():
    w = windows(Tensor(np.arange(6.0)), 4, 2)
    assert np.array_equal(w.data, [[0, 1, 2, 3], [2, 3, 4, 5]])


@pytest.mark.parametrize("layer", LAYERS)
def test_gradients_match_finite_differences(layer):
    rng = np.random.default_rng(11)
    for _ in range(10):
        assert max_relative_error(*case(layer, rng)) < 1e-5


# -- optimizers ------------------------------------------------------------

def test_adam_first_step_is_lr_times_sign():
    p = leaf([1.0, -2.0, 0.5])
    p.grad[:] = [3.0, -0.01, 100.0]
    Adam([p], lr=0.1).step()
    assert np.allclose(p.data, [0.9, -1.9, 0.4], atol=1e-8)


def test_adam_zero_gradient_is_noop():
    p = leaf([1.0, 2.0])
    opt = Adam([p], lr=0.1)
    opt.step()
    assert np.array_equal(p.data, [1.0, 2.0])
    assert opt.step_count == 1


def test_adam_second_equal_step_not_larger():
    p = leaf([0.0])
    opt = Adam([p], lr=0.01)
    p.grad[:] = 1.0
    opt.step()
    d1 = abs(p.data[0])
    p.grad[:] = 1.0
    opt.step()
    d2 = abs(p.data[0]) - d1
    assert d2 <= d1 + 1e-9


def test_adam_leaves_gradients():
    p = leaf([1.0])
    p.grad[:] = 0.5
    Adam([p]).step()
    assert p.grad[0] == 0.5


def test_sgd_step():
    p = leaf([1.0])
    p.grad[:] = 2.0
    SGD([p], lr=0.25).step()
    assert p.data[0] == 0.5


def test_multistep_lr():
    opt = Adam([leaf([0.0])], lr=1.0)
    sched = MultiStepLR(opt, [10, 20], 0.3)
    sched.update(9)
    assert opt.lr == 1.0
    sched.update(10)
    assert math.isclose(opt.lr, 0.3)
    sched.update(25)
    assert math.isclose(opt.lr, 0.09)
    with pytest.raises(ValueError):
        MultiStepLR(opt, [5, 5])


# -- initializers and rng --------------------------------------------------

def test_glorot_bound_and_range():
    assert math.isclose(glorot_bound(21, 63), math.sqrt(6 / 84))
    t = Tensor(np.zeros((3, 1, 21)))
    glorot_uniform_(t, *conv_fans(t.shape), make_rng(0))
    assert conv_fans(t.shape) == (21, 63)
    assert np.all(np.abs(t.data) <= glorot_bound(21, 63))


def test_glorot_deterministic():
    a, b = Tensor(np.zeros((4, 5))), Tensor(np.zeros((4, 5)))
    glorot_uniform_(a, 5, 4, make_rng(3, "x"))
    glorot_uniform_(b, 5, 4, make_rng(3, "x"))
    assert np.array_equal(a.data, b.data)


def test_dirac_layouts():
    t = Tensor(np.zeros((3, 2, 4)))
    dirac_(t)
    assert t.data[0, 0, 2] == t.data[1, 1, 2] == t.data[2, 0, 2] == 1.0
    assert t.data.sum() == 3.0


def test_rng_streams_independent_and_reproducible():
    a = make_rng(7, "channel").normal(size=5)
    assert np.array_equal(a, make_rng(7, "channel").normal(size=5))
    assert not np.array_equal(a, make_rng(7, "eval").normal(size=5))
    assert not np.array_equal(a, make_rng(8, "channel").normal(size=5))
