"""Autodiff engine: finite-difference checks for every primitive, plus the
spec'd softmax / cross-entropy / layer-norm behaviors."""

import math

import numpy as np
import pytest

from langclust import tensor as T
from langclust.tensor import Tensor


def finite_diff_grad(f, x, h=1e-4):
    """Central differences of a scalar-valued f at x, elementwise."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        gf[i] = (up - down) / (2 * h)
    return g


def analytic_grad(f, x):
    xt = Tensor(x.copy(), requires_grad=True)
    loss = f(xt)
    loss.backward()
    return xt.grad


def rel_err(a, b):
    denom = max(np.abs(a).max(), np.abs(b).max(), 1e-8)
    return np.abs(a - b).max() / denom


def check_grad(f_np, f_t, shape, seed, tol=1e-4):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    num = finite_diff_grad(lambda a: f_np(a), x)
    ana = analytic_grad(f_t, x)
    assert rel_err(ana, num) <= tol, f"gradient mismatch: {rel_err(ana, num)}"


class TestBackwardContract:
    def test_sum_gives_ones(self):
        x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        x.sum().backward()
        assert np.array_equal(x.grad, np.ones((2, 3)))

    def test_square_sum_gradient(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        (x * x).sum().backward()
        assert np.allclose(x.grad, [2.0, 4.0])

    def test_reuse_accumulates(self):
        x = Tensor([3.0], requires_grad=True)
        (x + x).sum().backward()
        assert np.allclose(x.grad, [2.0])

    def test_non_scalar_loss_rejected(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ValueError):
            (x * x).backward()

    def test_nan_input_rejected(self):
        with pytest.raises(ValueError):
            Tensor([1.0, float("nan")])
        with pytest.raises(ValueError):
            Tensor([float("inf")])

    def test_no_grad_disables_recording(self):
        x = Tensor([1.0], requires_grad=True)
        with T.no_grad():
            y = x * 2.0
        assert not y.requires_grad


class TestPrimitiveGradients:
    def test_add_broadcast(self):
        rng = np.random.default_rng(1)
        b = rng.standard_normal(4)
        check_grad(lambda x: (x + b).sum() * 1.7,
                   lambda x: (x + b).sum() * 1.7, (3, 4), seed=2)

    def test_mul_broadcast(self):
        rng = np.random.default_rng(3)
        b = rng.standard_normal((1, 4))
        check_grad(lambda x: ((x * b) * x).sum(),
                   lambda x: ((x * b) * x).sum(), (3, 4), seed=4)

    def test_matmul_2d(self):
        rng = np.random.default_rng(5)
        w = rng.standard_normal((4, 5))
        check_grad(lambda x: (x @ w).sum(),
                   lambda x: T.matmul(x, w).sum(), (3, 4), seed=6)

    def test_matmul_2d_right(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((3, 4))
        check_grad(lambda x: (a @ x).sum(),
                   lambda x: T.matmul(a, x).sum(), (4, 5), seed=8)

    def test_matmul_nd_by_2d(self):
        rng = np.random.default_rng(9)
        w = rng.standard_normal((4, 3))
        check_grad(lambda x: (x @ w).sum(),
                   lambda x: T.matmul(x, w).sum(), (2, 5, 4), seed=10)

    def test_matmul_batched(self):
        rng = np.random.default_rng(11)
        b = rng.standard_normal((2, 4, 3))
        check_grad(lambda x: (x @ b).sum(),
                   lambda x: T.matmul(x, b).sum(), (2, 5, 4), seed=12)

    def test_linear(self):
        rng = np.random.default_rng(13)
        w = rng.standard_normal((4, 6))
        b = rng.standard_normal(6)
        check_grad(lambda x: (x @ w + b).sum(),
                   lambda x: T.linear(x, w, b).sum(), (2, 3, 4), seed=14)

    def test_linear_weight_and_bias_grads(self):
        rng = np.random.default_rng(15)
        x = rng.standard_normal((7, 4))
        w0 = rng.standard_normal((4, 3))
        b0 = rng.standard_normal(3)
        wt = Tensor(w0.copy(), requires_grad=True)
        bt = Tensor(b0.copy(), requires_grad=True)
        T.linear(Tensor(x), wt, bt).sum().backward()
        num_w = finite_diff_grad(lambda w: (x @ w + b0).sum(), w0.copy())
        num_b = finite_diff_grad(lambda b: (x @ w0 + b).sum(), b0.copy())
        assert rel_err(wt.grad, num_w) <= 1e-4
        assert rel_err(bt.grad, num_b) <= 1e-4

    def test_reshape_transpose(self):
        rng = np.random.default_rng(16)
        w = rng.standard_normal((4, 6))
        check_grad(lambda x: (np.transpose(x.reshape(6, 4)) * w).sum(),
                   lambda x: (T.transpose(T.reshape(x, (6, 4))) * w).sum(),
                   (2, 3, 4), seed=16)

    def test_relu(self):
        check_grad(lambda x: (np.maximum(x, 0) * x).sum(),
                   lambda x: (T.relu(x) * x).sum(), (5, 5), seed=17)

    def test_softmax(self):
        w = np.random.default_rng(18).standard_normal((3, 6))
        check_grad(lambda x: (_np_softmax(x) * w).sum(),
                   lambda x: (T.softmax(x, axis=-1) * w).sum(), (3, 6), seed=19)

    def test_layer_norm(self):
        w = np.random.default_rng(20).standard_normal((4, 8))
        check_grad(lambda x: (_np_layer_norm(x) * w).sum(),
                   lambda x: (T.layer_norm(x) * w).sum(), (4, 8), seed=21)

    def test_layer_norm_affine(self):
        rng = np.random.default_rng(22)
        g0 = rng.standard_normal(8)
        b0 = rng.standard_normal(8)
        w = rng.standard_normal((4, 8))
        check_grad(lambda x: ((_np_layer_norm(x) * g0 + b0) * w).sum(),
                   lambda x: (T.layer_norm_affine(x, g0, b0) * w).sum(), (4, 8), seed=23)

    def test_embedding(self):
        rng = np.random.default_rng(24)
        ids = np.array([[0, 2, 1], [2, 2, 0]])
        w = rng.standard_normal((2, 3, 4))

        def f_np(table):
            return (table[ids] * w).sum()

        table0 = rng.standard_normal((3, 4))
        tt = Tensor(table0.copy(), requires_grad=True)
        (T.embedding(tt, ids) * w).sum().backward()
        num = finite_diff_grad(f_np, table0.copy())
        assert rel_err(tt.grad, num) <= 1e-4

    def test_take_rows(self):
        rng = np.random.default_rng(25)
        idx = np.array([3, 0, 2])
        w = rng.standard_normal((3, 4))
        x0 = rng.standard_normal((5, 4))
        xt = Tensor(x0.copy(), requires_grad=True)
        (T.take_rows(xt, idx) * w).sum().backward()
        num = finite_diff_grad(lambda x: (x[idx] * w).sum(), x0.copy())
        assert rel_err(xt.grad, num) <= 1e-4

    def test_cross_entropy(self):
        rng = np.random.default_rng(26)
        targets = np.array([1, 4, 0])
        weights = np.array([1.0, 0.0, 1.0])

        def f_np(logits):
            m = logits.max(axis=1, keepdims=True)
            lse = np.log(np.exp(logits - m).sum(axis=1)) + m[:, 0]
            nll = lse - logits[np.arange(3), targets]
            return (weights * nll).sum() / weights.sum()

        x0 = rng.standard_normal((3, 5))
        xt = Tensor(x0.copy(), requires_grad=True)
        T.cross_entropy(xt, targets, weights).backward()
        num = finite_diff_grad(f_np, x0.copy())
        assert rel_err(xt.grad, num) <= 1e-4

    def test_sum_axis_and_mean(self):
        def sq_rowsum_np(x):
            s = x.sum(axis=1)
            return (s * s).sum()

        def sq_rowsum_t(x):
            s = x.sum(axis=1)
            return (s * s).sum()

        check_grad(sq_rowsum_np, sq_rowsum_t, (3, 4), seed=27)
        check_grad(lambda x: x.mean() * 3.0,
                   lambda x: x.mean() * 3.0, (4, 3), seed=28)


def _np_softmax(x):
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _np_layer_norm(x, eps=1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


class TestSoftmaxContract:
    def test_uniform_on_equal_inputs(self):
        out = T.softmax(Tensor([0.0, 0.0, 0.0]), axis=0)
        assert np.allclose(out.data, [1 / 3] * 3)

    def test_large_inputs_no_overflow(self):
        out = T.softmax(Tensor([1000.0, 0.0]), axis=0)
        assert abs(out.data[0] - 1.0) < 1e-6
        assert abs(out.data[1]) < 1e-6

    def test_matches_extended_precision_formula(self):
        # mpmath-free oracle: direct formula in float128-ish via python floats
        # evaluated with exact exponentials from math
        x = [1.0, 2.0, 3.0]
        exps = [math.exp(v) for v in x]
        expected = [e / sum(exps) for e in exps]
        out = T.softmax(Tensor(x), axis=0)
        assert np.allclose(out.data, expected, atol=1e-12)

    def test_rows_sum_to_one_even_at_1e4(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            x = rng.uniform(-1e4, 1e4, size=(8, 13))
            out = T.softmax(Tensor(x), axis=-1)
            assert np.all(np.abs(out.data.sum(axis=-1) - 1.0) < 1e-6)
            assert np.all(out.data >= 0.0) and np.all(out.data <= 1.0)

    def test_invalid_axis(self):
        with pytest.raises(ValueError):
            T.softmax(Tensor([[1.0, 2.0]]), axis=5)


class TestCrossEntropyContract:
    def test_single_class_vocab_is_zero(self):
        out = T.cross_entropy(Tensor([[3.7], [-1.2]]), np.array([0, 0]))
        assert abs(out.item()) < 1e-12

    def test_uniform_logits_give_log_vocab(self):
        v = 7
        out = T.cross_entropy(Tensor(np.zeros((4, v))), np.array([0, 3, 6, 2]))
        assert abs(out.item() - math.log(v)) < 1e-12

    def test_matches_manual_logsumexp(self):
        rng = np.random.default_rng(30)
        logits = rng.standard_normal((3, 5))
        targets = np.array([4, 1, 2])
        manual = []
        for i in range(3):
            lse = math.log(sum(math.exp(v) for v in logits[i]))
            manual.append(lse - logits[i, targets[i]])
        expected = sum(manual) / 3
        out = T.cross_entropy(Tensor(logits), targets)
        assert abs(out.item() - expected) < 1e-12

    def test_out_of_range_target(self):
        with pytest.raises(IndexError):
            T.cross_entropy(Tensor(np.zeros((2, 3))), np.array([0, 3]))

    def test_nonnegative(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            logits = rng.standard_normal((6, 9)) * 5
            targets = rng.integers(0, 9, 6)
            assert T.cross_entropy(Tensor(logits), targets).item() >= 0.0


class TestLayerNormContract:
    def test_zero_mean_unit_variance(self):
        rng = np.random.default_rng(32)
        x = rng.standard_normal((10, 16)) * 3 + 1
        out = T.layer_norm(Tensor(x)).data
        assert np.all(np.abs(out.mean(axis=-1)) <= 1e-6)
        assert np.all(np.abs(out.var(axis=-1) - 1.0) <= 1e-4)


class TestPrecisionSwitch:
    def test_float32_context(self):
        with T.precision("float32"):
            x = Tensor([1.0, 2.0])
            assert x.data.dtype == np.float32
        assert Tensor([1.0]).data.dtype == np.float64

    def test_rejects_unknown(self):
        with pytest.raises(ValueError):
            T.set_default_dtype("int32")
