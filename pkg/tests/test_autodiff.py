import numpy as np
import pytest

from csasr import autodiff as ad
from csasr.checkpoint import load_arrays, save_arrays

from oracles import central_differences
from op_instances import make_instance


class TestForward:
    def test_add_componentwise(self):
        out = ad.apply("add", ad.Tensor([1.0, 2.0]), ad.Tensor([3.0, 4.0]))
        np.testing.assert_array_equal(out.data, [4.0, 6.0])

    def test_sigmoid_at_zero(self):
        assert ad.sigmoid(ad.Tensor(0.0)).item() == 0.5

    def test_matmul_identity(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(3, 3))
        out = ad.matmul(ad.Tensor(np.eye(3)), ad.Tensor(a))
        np.testing.assert_array_equal(out.data, a)

    def test_shape_mismatch_reports_both_shapes(self):
        with pytest.raises(ad.ShapeError, match=r"\(2, 3\).*\(4, 5\)"):
            ad.matmul(ad.Tensor(np.zeros((2, 3))), ad.Tensor(np.zeros((4, 5))))

    def test_unknown_op_rejected(self):
        with pytest.raises(KeyError, match="fused_gelu"):
            ad.apply("fused_gelu", ad.Tensor(0.0))

    def test_log_softmax_rows_normalize(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            x = rng.normal(scale=5.0, size=(4, 9))
            out = ad.log_softmax(ad.Tensor(x)).data
            lse = np.log(np.sum(np.exp(out), axis=-1))
            np.testing.assert_allclose(lse, 0.0, atol=1e-12)

    def test_forward_deterministic_bitwise(self):
        def run():
            rng = np.random.default_rng(11)
            x = ad.Tensor(rng.normal(size=(4, 4)), requires_grad=True)
            w = ad.Tensor(rng.normal(size=(4, 4)), requires_grad=True)
            y = ad.tsum(ad.tanh(ad.matmul(x, w)) * ad.sigmoid(x))
            ad.backward(y)
            return y.data.copy(), x.grad.copy(), w.grad.copy()

        a = run()
        b = run()
        for u, v in zip(a, b):
            assert np.array_equal(u, v)


class TestBackward:
    def test_sum_of_squares(self):
        x = ad.Tensor([1.0, 2.0, 3.0], requires_grad=True)
        loss = ad.tsum(ad.mul(x, x))
        ad.backward(loss)
        np.testing.assert_array_equal(x.grad, [2.0, 4.0, 6.0])

    def test_sigmoid_of_dot(self):
        w = ad.Tensor(np.zeros((1, 1)), requires_grad=True)
        x = ad.Tensor(np.ones((1, 1)))
        loss = ad.tsum(ad.sigmoid(ad.matmul(w, x)))
        ad.backward(loss)
        np.testing.assert_allclose(w.grad, [[0.25]], atol=1e-15)

    def test_non_scalar_loss_rejected(self):
        x = ad.Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(ad.ShapeError, match="scalar"):
            ad.backward(ad.mul(x, x))

    def test_grad_accumulates_on_reuse(self):
        x = ad.Tensor([2.0], requires_grad=True)
        y = ad.mul(x, x)
        loss = ad.tsum(ad.add(y, y))
        ad.backward(loss)
        np.testing.assert_allclose(x.grad, [8.0])

    def test_random_five_op_graph_matches_central_differences(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=(3, 3))
            w = rng.normal(size=(3, 3))

            def f(ts):
                a = ad.tanh(ad.matmul(ts[0], ts[1]))
                b = ad.sigmoid(ad.add(a, ts[0]))
                return ad.tsum(ad.mul(b, a))

            report = ad.grad_check(f, [x, w], step=1e-5, tol=1e-6)
            assert report.passed, (seed, report)

    def test_inference_mode_records_no_graph(self):
        x = ad.Tensor(np.ones((2, 2)))
        y = ad.tanh(ad.matmul(x, x))
        assert not y.requires_grad and y.parents == ()


class TestGradCheck:
    def test_constant_function_zero_error(self):
        report = ad.grad_check(lambda ts: ad.tsum(ad.mul(ts[0], ad.Tensor(np.zeros(3)))), [np.ones(3)])
        assert report.passed and report.max_rel_err == 0.0

    def test_detects_wrong_gradient(self):
        # tanh forward wired to a deliberately broken vjp
        def broken_tanh(t):
            out = np.tanh(t.data)
            return ad.Tensor(out, requires_grad=True, op="tanh?", parents=(t,), vjp=lambda g: (g * 0.5,))

        report = ad.grad_check(lambda ts: ad.tsum(broken_tanh(ts[0])), [np.array([0.3, -0.4])])
        assert not report.passed

    def test_agrees_with_external_finite_differences(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(2, 3))

        def f_t(ts):
            return ad.tsum(ad.exp(ad.smul(ts[0], 0.5)))

        def f_np(arrays):
            return float(np.sum(np.exp(arrays[0] * 0.5)))

        leaves = [ad.Tensor(x, requires_grad=True)]
        ad.backward(f_t(leaves))
        (fd,) = central_differences(f_np, [x])
        np.testing.assert_allclose(leaves[0].grad, fd, rtol=1e-7, atol=1e-9)


class TestOpCatalogue:
    @pytest.mark.parametrize("op_name", sorted(ad.OPS))
    def test_gradients_match_central_differences(self, op_name):
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            f, arrays = make_instance(op_name, rng)
            report = ad.grad_check(f, arrays, step=1e-5, tol=1e-6)
            assert report.passed, (op_name, seed, report)


class TestCheckpointContainer:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        arrays = {
            "enc.w": rng.normal(size=(4, 3)),
            "dec.b": rng.normal(size=(7,)),
            "scalar": np.asarray(3.5),
        }
        path = tmp_path / "model.ckpt"
        save_arrays(path, arrays)
        loaded = load_arrays(path)
        assert sorted(loaded) == sorted(arrays)
        for k in arrays:
            assert loaded[k].shape == np.asarray(arrays[k]).shape
            assert np.array_equal(loaded[k], arrays[k])

    def test_write_is_deterministic(self, tmp_path):
        arrays = {"b": np.arange(3.0), "a": np.ones((2, 2))}
        save_arrays(tmp_path / "x1.ckpt", arrays)
        save_arrays(tmp_path / "x2.ckpt", dict(reversed(list(arrays.items()))))
        assert (tmp_path / "x1.ckpt").read_bytes() == (tmp_path / "x2.ckpt").read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "junk.ckpt"
        p.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            load_arrays(p)
