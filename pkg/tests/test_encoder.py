import numpy as np
import pytest

from gausset.encoder import (_HEADER, PARAM_NAMES, CheckpointError, backward, encode_set, forward,
                             init_params, load_params, save_params)
from oracles import ref_encode


def _random_params(d, h, seed):
    rng = np.random.default_rng(seed)
    p = init_params(d, h, seed)
    for _, a in p.arrays():
        a[...] = rng.normal(size=a.shape)
    return p


class TestInit:
    def test_deterministic(self):
        assert init_params(4, 2, 7).equals(init_params(4, 2, 7))

    def test_seed_sensitive(self):
        assert not init_params(4, 2, 7).equals(init_params(4, 2, 8))

    @pytest.mark.parametrize("d,h", [(1, 1), (4, 2), (300, 64)])
    def test_shapes_and_zero_biases(self, d, h):
        p = init_params(d, h, 0)
        assert p.W1.shape == (h, d) and p.W2.shape == (h, h)
        assert p.Wmu.shape == (d, h) and p.Ws.shape == (d, h)
        for name in ("b1", "b2", "bmu", "bs"):
            assert not getattr(p, name).any()

    def test_glorot_bounds(self):
        p = init_params(30, 20, 1)
        assert np.abs(p.W1).max() <= np.sqrt(6 / 50)
        assert np.abs(p.W2).max() <= np.sqrt(6 / 40)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            init_params(0, 3)


class TestEncode:
    def test_zero_params(self):
        p = init_params(3, 2, 0).zeros_like()
        enc, _ = encode_set(p, [[1.0, 2.0, 3.0], [0.0, -1.0, 5.0]])
        assert enc.mu.tolist() == [0, 0, 0]
        assert enc.sigma.tolist() == [1, 1, 1]

    def test_shapes_positive(self):
        p = init_params(300, 64, 0)
        enc, _ = encode_set(p, np.random.default_rng(0).normal(size=(3, 300)))
        assert enc.mu.shape == (300,) and enc.sigma.shape == (300,)
        assert np.all(enc.sigma > 0)

    def test_permutation_invariant(self):
        p = _random_params(2, 3, 1)
        a, _ = encode_set(p, [[1, 0], [0, 1]])
        b, _ = encode_set(p, [[0, 1], [1, 0]])
        assert a.mu.tobytes() == b.mu.tobytes() and a.sigma.tobytes() == b.sigma.tobytes()

    def test_matches_reference(self):
        for s in range(20):
            p = _random_params(5, 4, s)
            vecs = np.random.default_rng(s).normal(size=(4, 5))
            enc, _ = encode_set(p, vecs)
            mu, sigma, _ = ref_encode(p, vecs)
            np.testing.assert_allclose(enc.mu, mu, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(enc.sigma, sigma, rtol=1e-12)

    def test_log_sigma_affine_in_trunk(self):
        p = _random_params(4, 3, 2)
        enc, tape = encode_set(p, np.ones((2, 4)))
        np.testing.assert_allclose(2 * np.log(enc.sigma), p.Ws @ tape.z2[0] + p.bs, rtol=1e-12)

    def test_errors(self):
        p = init_params(3, 2, 0)
        with pytest.raises(ValueError):
            encode_set(p, np.zeros((0, 3)))
        with pytest.raises(ValueError):
            encode_set(p, np.zeros((2, 4)))

    def test_deterministic(self):
        p = _random_params(6, 4, 5)
        x = np.random.default_rng(1).normal(size=(3, 6))
        a, _ = encode_set(p, x)
        b, _ = encode_set(p, x)
        assert a.mu.tobytes() == b.mu.tobytes()


class TestBackward:
    def test_zero_upstream(self):
        p = _random_params(3, 2, 0)
        _, tape = encode_set(p, np.ones((2, 3)))
        grads, gin = backward(p, tape, np.zeros(3), np.zeros(3))
        for _, g in grads.arrays():
            assert not g.any()
        assert not gin.any()

    def test_linear_in_upstream(self):
        p = _random_params(3, 2, 0)
        x = np.random.default_rng(0).normal(size=(2, 3))
        gm, gs = np.array([0.3, -1.0, 2.0]), np.array([1.0, 0.5, -0.2])
        _, t1 = encode_set(p, x)
        g1, i1 = backward(p, t1, gm, gs)
        _, t2 = encode_set(p, x)
        g2, i2 = backward(p, t2, 2 * gm, 2 * gs)
        for name in PARAM_NAMES:
            np.testing.assert_allclose(getattr(g2, name), 2 * getattr(g1, name), rtol=1e-14)
        np.testing.assert_allclose(i2, 2 * i1, rtol=1e-14)

    def test_tape_single_use(self):
        p = init_params(3, 2, 0)
        _, tape = encode_set(p, np.ones((1, 3)))
        backward(p, tape, np.ones(3), np.ones(3))
        with pytest.raises(RuntimeError):
            backward(p, tape, np.ones(3), np.ones(3))

    def test_finite_differences(self):
        """Linear functional L = gm.mu + gs.sigma, checked entry by entry."""
        eps = 1e-5
        for s in range(10):
            rng = np.random.default_rng(100 + s)
            d, h = int(rng.integers(1, 6)), int(rng.integers(1, 5))
            p = _random_params(d, h, s)
            x = rng.normal(size=(3, d))
            gm, gs = rng.normal(size=d), rng.normal(size=d)

            def L():
                mu, sigma, pre = ref_encode(p, x)
                return gm @ mu + gs @ sigma, pre > 0

            _, tape = encode_set(p, x)
            grads, gin = backward(p, tape, gm, gs)
            _, pattern = L()
            for name, arr in p.arrays():
                for idx in np.ndindex(arr.shape):
                    orig = arr[idx]
                    arr[idx] = orig + eps
                    lp, pp = L()
                    arr[idx] = orig - eps
                    lm, pm = L()
                    arr[idx] = orig
                    if not (np.array_equal(pp, pattern) and np.array_equal(pm, pattern)):
                        continue
                    num = (lp - lm) / (2 * eps)
                    ana = getattr(grads, name)[idx]
                    assert abs(ana - num) <= 1e-5 * max(abs(ana), abs(num), 1e-5), (name, idx)

    def test_input_gradient(self):
        eps = 1e-6
        p = _random_params(4, 3, 9)
        c = np.random.default_rng(9).normal(size=4)
        gm, gs = np.ones(4), np.full(4, 0.5)
        _, _, tape = forward(p, c)
        _, gin = backward(p, tape, gm, gs)
        for i in range(4):
            e = np.zeros(4)
            e[i] = eps
            mp, sp, _ = ref_encode(p, [c + e])
            mm, sm, _ = ref_encode(p, [c - e])
            num = (gm @ (mp - mm) + gs @ (sp - sm)) / (2 * eps)
            assert gin[0, i] == pytest.approx(num, rel=1e-5, abs=1e-8)


class TestCheckpoint:
    def test_round_trip(self):
        p = _random_params(5, 3, 4)
        p.seed = -12345
        assert load_params(save_params(p)).equals(p)

    def test_truncated(self):
        data = save_params(init_params(4, 2, 0))
        with pytest.raises(CheckpointError, match="length mismatch"):
            load_params(data[:-8])

    def test_header_payload_disagree(self):
        n = _HEADER.size
        good = save_params(init_params(3, 2, 0))
        bad_header = save_params(init_params(4, 2, 0))[:n]
        with pytest.raises(CheckpointError, match="length mismatch"):
            load_params(bad_header + good[n:])

    def test_bad_magic(self):
        data = bytearray(save_params(init_params(2, 2, 0)))
        data[0:4] = b"XXXX"
        with pytest.raises(CheckpointError, match="magic"):
            load_params(bytes(data))

    def test_short(self):
        with pytest.raises(CheckpointError):
            load_params(b"GS")
