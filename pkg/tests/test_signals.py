import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import ihtkit as kit
from ihtkit.signals import CompressibleSpec

finite_vectors = arrays(
    np.float64,
    st.integers(1, 10),
    elements=st.floats(-100, 100, allow_nan=False, allow_infinity=False),
)


class TestHardThreshold:
    def test_unambiguous_magnitudes(self):
        np.testing.assert_array_equal(
            kit.hard_threshold([3.0, -1.0, 0.0, 2.0], 2), [3.0, 0.0, 0.0, 2.0]
        )

    def test_tie_keeps_lowest_index(self):
        np.testing.assert_array_equal(kit.hard_threshold([1.0, -1.0], 1), [1.0, 0.0])

    def test_full_sparsity_is_identity(self):
        v = np.array([0.5, -2.0, 3.0])
        np.testing.assert_array_equal(kit.hard_threshold(v, 3), v)

    def test_invalid_sparsity(self):
        with pytest.raises(ValueError):
            kit.hard_threshold([1.0, 2.0], -1)
        with pytest.raises(ValueError):
            kit.hard_threshold([1.0, 2.0], 3)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            kit.hard_threshold([1.0, np.nan], 1)

    @given(v=finite_vectors, s=st.integers(0, 10))
    def test_idempotent(self, v, s):
        s = min(s, v.size)
        once = kit.hard_threshold(v, s)
        np.testing.assert_array_equal(kit.hard_threshold(once, s), once)

    @given(v=finite_vectors, s=st.integers(0, 10))
    def test_at_most_s_nonzeros(self, v, s):
        s = min(s, v.size)
        assert kit.support(kit.hard_threshold(v, s)).size <= s

    @settings(max_examples=30)
    @given(v=finite_vectors, s=st.integers(0, 10))
    def test_optimal_among_all_supports(self, v, s):
        # every s-sparse vector is at least as far from v in l2
        s = min(s, v.size)
        best = np.linalg.norm(v - kit.hard_threshold(v, s))
        for combo in itertools.combinations(range(v.size), s):
            w = np.zeros_like(v)
            w[list(combo)] = v[list(combo)]
            assert best <= np.linalg.norm(v - w) + 1e-12


class TestBestSError:
    def test_simple_residual(self):
        assert kit.best_s_error([3.0, -1.0, 0.0, 2.0], 2, "l2") == pytest.approx(1.0)

    def test_exact_representation(self):
        v = [3.0, -1.0, 0.0, 2.0]
        assert kit.best_s_error(v, 4, "l2") == 0.0
        assert kit.best_s_error(v, 4, "l1") == 0.0

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(7)
        for n, s in [(6, 2), (8, 3), (10, 4)]:
            v = rng.standard_normal(n)
            oracle = min(
                np.linalg.norm(np.delete(v, list(combo)))
                for combo in itertools.combinations(range(n), s)
            )
            assert kit.best_s_error(v, s, "l2") == pytest.approx(oracle, abs=1e-12)

    def test_unknown_norm(self):
        with pytest.raises(ValueError):
            kit.best_s_error([1.0], 1, "linf")


class TestCompressible:
    def test_sorted_magnitudes_follow_power_law(self):
        spec = CompressibleSpec(n=50, p=0.7, r_const=2.5, seed=3)
        y = kit.gen_compressible(spec)
        expected = 2.5 * np.arange(1, 51, dtype=float) ** (-1.0 / 0.7)
        np.testing.assert_allclose(np.sort(np.abs(y))[::-1], expected, atol=1e-12)

    def test_smaller_p_concentrates_energy(self):
        fast = kit.gen_compressible(CompressibleSpec(n=40, p=0.2, seed=11))
        slow = kit.gen_compressible(CompressibleSpec(n=40, p=1.0, seed=11))
        rel_fast = kit.best_s_error(fast, 1, "l2") / np.linalg.norm(fast)
        rel_slow = kit.best_s_error(slow, 1, "l2") / np.linalg.norm(slow)
        assert rel_fast < rel_slow

    def test_deterministic(self):
        spec = CompressibleSpec(n=30, p=0.5, seed=21)
        np.testing.assert_array_equal(kit.gen_compressible(spec), kit.gen_compressible(spec))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            CompressibleSpec(n=10, p=0.0)
        with pytest.raises(ValueError):
            CompressibleSpec(n=10, p=0.5, r_const=-1.0)
        with pytest.raises(ValueError):
            CompressibleSpec(n=0, p=0.5)


class TestTailBounds:
    def test_empty_tail(self):
        spec = CompressibleSpec(n=8, p=0.5)
        assert kit.compressible_tail_bounds(spec, 8) == (0.0, 0.0)

    def test_small_case_by_hand(self):
        spec = CompressibleSpec(n=4, p=1.0, r_const=1.0)
        l2, l1 = kit.compressible_tail_bounds(spec, 2)
        assert l1 == pytest.approx(1 / 3 + 1 / 4, abs=1e-15)
        assert l2 == pytest.approx(np.sqrt(1 / 9 + 1 / 16), abs=1e-15)

    def test_generated_signal_attains_bounds(self):
        spec = CompressibleSpec(n=25, p=0.8, r_const=1.5, seed=5)
        y = kit.gen_compressible(spec)
        for s in (1, 5, 12, 24):
            l2, l1 = kit.compressible_tail_bounds(spec, s)
            assert kit.best_s_error(y, s, "l2") == pytest.approx(l2, rel=1e-12)
            assert kit.best_s_error(y, s, "l1") == pytest.approx(l1, rel=1e-12)

    def test_out_of_range(self):
        spec = CompressibleSpec(n=8, p=0.5)
        with pytest.raises(ValueError):
            kit.compressible_tail_bounds(spec, 0)
        with pytest.raises(ValueError):
            kit.compressible_tail_bounds(spec, 9)


class TestEpsilonTilde:
    def test_sparse_noiseless_vanishes(self):
        y = np.array([0.0, 2.0, 0.0, -1.0])
        assert kit.epsilon_tilde(y, 2, 0.0) == 0.0

    def test_sparse_with_noise(self):
        y = np.array([0.0, 2.0, 0.0, -1.0])
        assert kit.epsilon_tilde(y, 2, 2.0) == 2.0

    def test_example_by_hand(self):
        assert kit.epsilon_tilde([3.0, -1.0, 0.0, 2.0], 2, 0.0) == pytest.approx(
            1.0 + 1.0 / np.sqrt(2), abs=1e-14
        )

    def test_monotone_in_s(self):
        rng = np.random.default_rng(13)
        y = rng.standard_normal(20)
        values = [kit.epsilon_tilde(y, s, 0.3) for s in range(1, 21)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            kit.epsilon_tilde([1.0, 2.0], 0, 0.0)
        with pytest.raises(ValueError):
            kit.epsilon_tilde([1.0, 2.0], 1, -0.5)


class TestSupport:
    def test_basic(self):
        np.testing.assert_array_equal(kit.support([0.0, 5.0, 0.0, -2.0]), [1, 3])

    def test_zero_vector(self):
        assert kit.support(np.zeros(4)).size == 0


class TestSignalIO:
    def test_csv_round_trip(self, tmp_path):
        v = np.random.default_rng(0).standard_normal(17)
        path = tmp_path / "signal.csv"
        kit.save_signal_csv(v, path)
        np.testing.assert_array_equal(kit.load_signal_csv(path), v)

    def test_binary_round_trip(self, tmp_path):
        v = np.random.default_rng(1).standard_normal(33)
        path = tmp_path / "signal.bin"
        kit.save_signal_binary(v, path)
        np.testing.assert_array_equal(kit.load_signal_binary(path), v)

    def test_binary_layout(self, tmp_path):
        path = tmp_path / "two.bin"
        kit.save_signal_binary([1.0, -2.0], path)
        raw = path.read_bytes()
        assert raw[:8] == (2).to_bytes(8, "little")
        np.testing.assert_array_equal(np.frombuffer(raw[8:], dtype="<f8"), [1.0, -2.0])

    def test_truncated_binary_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        kit.save_signal_binary(np.ones(5), path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError):
            kit.load_signal_binary(path)
