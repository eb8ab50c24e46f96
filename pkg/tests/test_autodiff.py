import numpy as np
import pytest

from gclgcn import autodiff as ad


def fd_scalar(make_loss, params, h=1e-5):
    return ad.finite_difference_check(make_loss, params, h=h)


class TestForwardValues:
    def test_matmul_identity(self):
        m = ad.parameter([[1.0, 2.0], [3.0, 4.0]])
        out = ad.matmul(ad.constant(np.eye(2)), m)
        assert np.array_equal(out.value, m.value)
        ad.backward(ad.reduce_sum(out))
        assert np.array_equal(m.grad, np.ones((2, 2)))

    def test_row_softmax_uniform(self):
        out = ad.row_softmax(ad.constant([[0.0, 0.0]]))
        assert np.allclose(out.value, [[0.5, 0.5]], atol=0)

    def test_row_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        x = ad.constant(rng.standard_normal((7, 5)) * 10)
        s = ad.row_softmax(x).value
        assert np.all(np.abs(s.sum(axis=1) - 1.0) <= 1e-12)

    def test_row_softmax_handles_neg_inf(self):
        logits = np.array([[0.0, -np.inf, 1.0]])
        s = ad.row_softmax(ad.constant(logits)).value
        assert s[0, 1] == 0.0
        assert s[0].sum() == pytest.approx(1.0, abs=1e-12)

    def test_mse_self_zero_with_zero_grad(self):
        x = ad.parameter([[1.0, -2.0]])
        loss = ad.mse(x, x)
        assert loss.value[0, 0] == 0.0
        ad.backward(loss)
        assert np.array_equal(x.grad, np.zeros((1, 2)))

    def test_gather_rows_and_concat_cols(self):
        a = ad.parameter([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        picked = ad.gather_rows(a, [2, 0, 2])
        assert np.array_equal(picked.value, [[5, 6], [1, 2], [5, 6]])
        both = ad.concat_cols(picked, ad.scale(picked, 2.0))
        assert both.shape == (3, 4)
        ad.backward(ad.reduce_sum(both))
        # row 2 gathered twice, each contributing 1 + 2 per column
        assert np.array_equal(a.grad, [[3.0, 3.0], [0.0, 0.0], [6.0, 6.0]])

    def test_scalar_coercion(self):
        t = ad.constant(3.5)
        assert t.shape == (1, 1)


class TestShapeErrors:
    def test_errors_name_the_operation(self):
        a = ad.constant(np.zeros((2, 3)))
        b = ad.constant(np.zeros((2, 3)))
        with pytest.raises(ValueError, match="matmul"):
            ad.matmul(a, b)
        with pytest.raises(ValueError, match="hadamard"):
            ad.hadamard(a, ad.constant(np.zeros((3, 2))))
        with pytest.raises(ValueError, match="mse"):
            ad.mse(a, ad.constant(np.zeros((3, 3))))
        with pytest.raises(ValueError, match="add"):
            ad.add(a, ad.constant(np.zeros((4, 4))))

    def test_backward_requires_scalar(self):
        x = ad.parameter(np.ones((2, 2)))
        with pytest.raises(ValueError, match="1x1"):
            ad.backward(ad.square(x))


class TestBackwardContracts:
    def test_sum_of_squares(self):
        x = ad.parameter([[3.0]])
        ad.backward(ad.reduce_sum(ad.square(x)))
        assert x.grad[0, 0] == 6.0

    def test_two_backward_calls_accumulate(self):
        x = ad.parameter([[3.0]])
        loss = ad.reduce_sum(ad.square(x))
        ad.backward(loss)
        ad.backward(loss)
        assert x.grad[0, 0] == 12.0

    def test_shared_subexpression_sums_paths(self):
        x = ad.parameter([[5.0]])
        ad.backward(ad.reduce_sum(ad.add(x, x)))
        assert x.grad[0, 0] == 2.0

    def test_mse_linear_grad_at_zero_weights(self):
        rng = np.random.default_rng(4)
        w = ad.parameter(np.zeros((3, 2)))
        x = ad.constant(rng.standard_normal((2, 1)))
        y = ad.constant(rng.standard_normal((3, 1)))

        def loss(_):
            return ad.mse(ad.matmul(w, x), y)

        ad.backward(loss(None))
        want = -(2.0 / 3.0) * y.value @ x.value.T
        assert np.allclose(w.grad, want, atol=1e-12)
        assert fd_scalar(lambda p: loss(None), [w]) <= 1e-6

    def test_broadcast_add_bias_grad(self):
        rng = np.random.default_rng(8)
        b = ad.parameter(np.zeros((1, 3)))
        x = ad.constant(rng.standard_normal((5, 3)))
        ad.backward(ad.reduce_sum(ad.add(x, b)))
        assert np.array_equal(b.grad, np.full((1, 3), 5.0))
        c = ad.parameter(np.zeros((5, 1)))
        ad.backward(ad.reduce_sum(ad.add(x, c)))
        assert np.array_equal(c.grad, np.full((5, 1), 3.0))


UNARY_OPS = [
    ("square", ad.square, None),
    ("exp", ad.exp, None),
    ("log", ad.log, "positive"),
    ("sqrt", ad.sqrt, "positive"),
    ("sigmoid", ad.sigmoid, None),
    ("relu", ad.relu, None),
    ("leaky_relu", ad.leaky_relu, None),
    ("row_softmax", ad.row_softmax, None),
    ("transpose", ad.transpose, None),
]


class TestFiniteDifferenceSuite:
    @pytest.mark.parametrize("name,op,domain", UNARY_OPS)
    def test_unary_ops(self, name, op, domain):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x = rng.standard_normal((3, 4))
            if domain == "positive":
                x = np.abs(x) + 0.5
            p = ad.parameter(x)
            target = ad.constant(np.full(op(p).shape, 0.3))
            err = fd_scalar(lambda _: ad.mse(op(p), target), [p])
            assert err <= 1e-4, f"{name} seed {seed}: {err}"

    def test_binary_and_reduction_ops(self):
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            a = ad.parameter(rng.standard_normal((3, 4)))
            b = ad.parameter(rng.standard_normal((4, 2)))
            c = ad.parameter(rng.standard_normal((3, 2)))

            def loss(_):
                prod = ad.matmul(a, b)
                mixed = ad.hadamard(prod, c)
                plus = ad.add(mixed, ad.scale(c, -0.7))
                return ad.add(
                    ad.reduce_mean(ad.square(plus)),
                    ad.reduce_sum(ad.scale(ad.concat_cols(prod, mixed), 0.01)),
                )

            assert fd_scalar(loss, [a, b, c]) <= 1e-4

    def test_gather_clamp_signed_pow(self):
        for seed in range(10):
            rng = np.random.default_rng(200 + seed)
            a = ad.parameter(rng.standard_normal((5, 3)) * 2)

            def loss(_):
                picked = ad.gather_rows(a, [0, 2, 2, 4])
                powed = ad.signed_pow(picked, 2.0)
                clamped = ad.clamp_min(powed, -1.5)
                return ad.reduce_mean(ad.square(clamped))

            assert fd_scalar(loss, [a]) <= 1e-4


class TestAdam:
    def test_zero_grad_leaves_params(self):
        p = ad.parameter([[1.0, 2.0]])
        st = ad.AdamState.for_params([p], lr=0.1)
        ad.adam_step([p], [np.zeros((1, 2))], st)
        assert np.array_equal(p.value, [[1.0, 2.0]])
        assert st.step == 1

    def test_first_step_moves_by_lr(self):
        p = ad.parameter([[0.0]])
        st = ad.AdamState.for_params([p], lr=0.1)
        ad.adam_step([p], [np.ones((1, 1))], st)
        assert p.value[0, 0] == pytest.approx(-0.1, abs=1e-8)

    def test_deterministic_trajectory(self):
        def run():
            rng = np.random.default_rng(42)
            p = ad.parameter(rng.standard_normal((3, 3)))
            st = ad.AdamState.for_params([p], lr=0.01)
            for i in range(25):
                g = np.sin(p.value + i)
                ad.adam_step([p], [g], st)
            return p.value.copy()

        assert np.array_equal(run(), run())

    def test_mismatched_state_rejected(self):
        p = ad.parameter([[0.0]])
        st = ad.AdamState.for_params([p, ad.parameter([[0.0]])], lr=0.1)
        with pytest.raises(ValueError, match="parameter list"):
            ad.adam_step([p], [np.zeros((1, 1))], st)


def test_finite_difference_check_on_square():
    x = ad.parameter([[3.0]])
    err = ad.finite_difference_check(
        lambda _: ad.reduce_sum(ad.square(x)), [x]
    )
    assert err <= 1e-6
