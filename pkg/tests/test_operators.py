import json

import numpy as np
import pytest

import ihtkit as kit
from ihtkit.operators import DimensionMismatchError, ShapeWarning


def dct2_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix straight from the cosine definition."""
    j = np.arange(n)
    mat = np.sqrt(2.0 / n) * np.cos(np.pi * np.outer(j, 2 * j + 1) / (2 * n))
    mat[0] /= np.sqrt(2.0)
    return mat


class TestApply:
    def test_identity(self):
        op = kit.DenseOperator(np.eye(2))
        np.testing.assert_array_equal(op.apply([3.0, 4.0]), [3.0, 4.0])

    def test_zero_payload(self):
        op = kit.DenseOperator(np.zeros((3, 5)))
        np.testing.assert_array_equal(op.apply(np.arange(5.0)), np.zeros(3))

    def test_dimension_mismatch(self):
        op = kit.build_gaussian(4, 8, 0)
        with pytest.raises(DimensionMismatchError):
            op.apply(np.zeros(7))
        with pytest.raises(DimensionMismatchError):
            op.apply_adjoint(np.zeros(8))

    def test_subsampled_matches_dense_submatrix(self):
        op = kit.build_partial_orthonormal(6, 16, 5)
        sub = np.sqrt(16 / 6) * dct2_matrix(16)[op.row_indices, :]
        v = np.random.default_rng(1).standard_normal(16)
        np.testing.assert_allclose(op.apply(v), sub @ v, atol=1e-10)

    def test_subsampled_adjoint_matches_submatrix_transpose(self):
        op = kit.build_partial_orthonormal(6, 16, 5)
        sub = np.sqrt(16 / 6) * dct2_matrix(16)[op.row_indices, :]
        x = np.random.default_rng(2).standard_normal(6)
        np.testing.assert_allclose(op.apply_adjoint(x), sub.T @ x, atol=1e-10)


class TestAdjointConsistency:
    @pytest.mark.parametrize("build", [kit.build_gaussian, kit.build_bernoulli])
    def test_dense_kinds(self, build):
        op = build(9, 20, 3)
        rng = np.random.default_rng(0)
        for _ in range(100):
            v = rng.standard_normal(20)
            x = rng.standard_normal(9)
            a, b = np.dot(op.apply(v), x), np.dot(v, op.apply_adjoint(x))
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))

    def test_identity_adjoint(self):
        op = kit.DenseOperator(np.eye(2))
        np.testing.assert_array_equal(op.apply_adjoint([3.0, 4.0]), [3.0, 4.0])

    def test_structured_kind(self):
        op = kit.build_partial_orthonormal(7, 32, 11)
        rng = np.random.default_rng(4)
        for _ in range(100):
            v = rng.standard_normal(32)
            x = rng.standard_normal(7)
            a, b = np.dot(op.apply(v), x), np.dot(v, op.apply_adjoint(x))
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


class TestBuilders:
    def test_gaussian_deterministic(self):
        a = kit.build_gaussian(8, 16, 42)
        b = kit.build_gaussian(8, 16, 42)
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_gaussian_rejects_empty(self):
        with pytest.raises(ValueError):
            kit.build_gaussian(0, 4, 0)
        with pytest.raises(ValueError):
            kit.build_gaussian(4, 0, 0)

    def test_gaussian_column_norms_near_unit(self):
        # E||column||^2 = 1 by construction; 3/sqrt(M) is the allowed spread
        m = 400
        with pytest.warns(ShapeWarning):
            op = kit.build_gaussian(m, 20, 9)
        norms = np.linalg.norm(op.matrix, axis=0)
        assert np.all(np.abs(norms - 1.0) <= 3.0 / np.sqrt(m))

    def test_bernoulli_unit_columns(self):
        op = kit.build_bernoulli(13, 21, 2)
        sq = np.sum(op.matrix**2, axis=0)
        np.testing.assert_allclose(sq, 1.0, atol=1e-12)

    def test_bernoulli_entry_values(self):
        op = kit.build_bernoulli(7, 11, 8)
        magnitudes = np.unique(np.abs(op.matrix))
        np.testing.assert_array_equal(magnitudes, [1 / np.sqrt(7)])

    def test_bernoulli_deterministic(self):
        np.testing.assert_array_equal(
            kit.build_bernoulli(5, 9, 1).matrix, kit.build_bernoulli(5, 9, 1).matrix
        )

    def test_partial_orthonormal_full_size_inverts(self):
        op = kit.build_partial_orthonormal(16, 16, 0)
        v = np.random.default_rng(3).standard_normal(16)
        np.testing.assert_allclose(op.apply_adjoint(op.apply(v)), v, atol=1e-10)

    def test_partial_orthonormal_rows_distinct(self):
        op = kit.build_partial_orthonormal(10, 32, 6)
        assert np.unique(op.row_indices).size == 10

    def test_partial_orthonormal_rejects_tall(self):
        with pytest.raises(ValueError):
            kit.build_partial_orthonormal(33, 32, 0)

    def test_builders_deterministic_across_kinds(self):
        for build in (kit.build_gaussian, kit.build_bernoulli, kit.build_partial_orthonormal):
            a, b = build(6, 12, 77), build(6, 12, 77)
            v = np.random.default_rng(5).standard_normal(12)
            np.testing.assert_array_equal(a.apply(v), b.apply(v))

    def test_shape_warning_only_when_tall(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error", ShapeWarning)
            kit.build_gaussian(8, 8, 0)
            kit.build_gaussian(4, 8, 0)


class TestRestriction:
    def test_full_restriction_is_identity(self):
        op = kit.build_gaussian(5, 8, 1)
        sub = kit.restrict_columns(op, range(8))
        v = np.random.default_rng(0).standard_normal(8)
        np.testing.assert_array_equal(sub.apply(v), op.apply(v))

    def test_identity_single_column(self):
        op = kit.DenseOperator(np.eye(3))
        sub = kit.restrict_columns(op, [1])
        np.testing.assert_array_equal(sub.apply([5.0]), [0.0, 5.0, 0.0])

    def test_out_of_range_rejected(self):
        op = kit.build_gaussian(4, 6, 0)
        with pytest.raises(ValueError):
            kit.restrict_columns(op, [2, 6])

    def test_gram_matches_dense_oracle(self):
        op = kit.build_gaussian(7, 12, 3)
        gamma = [1, 4, 5, 10]
        sub = kit.restrict_columns(op, gamma)
        gram = np.empty((4, 4))
        basis = np.eye(4)
        for j in range(4):
            gram[:, j] = sub.apply_adjoint(sub.apply(basis[j]))
        dense = op.matrix[:, gamma]
        np.testing.assert_allclose(gram, dense.T @ dense, atol=1e-10)

    def test_zero_padding_equivalence(self):
        op = kit.build_partial_orthonormal(9, 16, 4)
        gamma = np.array([0, 3, 7, 12])
        sub = kit.restrict_columns(op, gamma)
        v = np.random.default_rng(8).standard_normal(4)
        padded = np.zeros(16)
        padded[gamma] = v
        np.testing.assert_allclose(sub.apply(v), op.apply(padded), atol=1e-12)

    def test_restriction_adjoint_consistency(self):
        op = kit.build_bernoulli(8, 14, 5)
        sub = kit.restrict_columns(op, [2, 3, 9])
        rng = np.random.default_rng(11)
        for _ in range(50):
            v, x = rng.standard_normal(3), rng.standard_normal(8)
            a, b = np.dot(sub.apply(v), x), np.dot(v, sub.apply_adjoint(x))
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


class TestRescale:
    def test_zero_delta_is_identity(self):
        op = kit.build_gaussian(4, 8, 0)
        same = kit.rescale_for_rip(op, 0.0)
        assert same.scale == op.scale

    def test_composition_multiplies_scales(self):
        op = kit.build_gaussian(4, 8, 0)
        twice = kit.rescale_for_rip(kit.rescale_for_rip(op, 0.5), 0.2)
        assert twice.scale == pytest.approx(1.0 / np.sqrt(1.5 * 1.2), rel=1e-15)

    def test_delta_out_of_range(self):
        op = kit.build_gaussian(4, 8, 0)
        for bad in (-0.1, 1.0, 2.0):
            with pytest.raises(ValueError):
                kit.rescale_for_rip(op, bad)

    def test_upper_bound_holds_after_rescale(self):
        # enumerate every s-sparse direction of a tiny instance whose exact
        # symmetric constant is below one
        import itertools

        with pytest.warns(ShapeWarning):
            op = kit.build_gaussian(24, 8, 21)
        s = 2
        est = kit.exact_beta(op, s)
        assert est.upper_bound_violated
        delta = est.max_singular_sq - 1.0
        assert 0.0 < delta < 1.0
        scaled = kit.rescale_for_rip(op, delta)
        rng = np.random.default_rng(0)
        for combo in itertools.combinations(range(8), s):
            for _ in range(20):
                y = np.zeros(8)
                y[list(combo)] = rng.standard_normal(s)
                y /= np.linalg.norm(y)
                assert np.linalg.norm(scaled.apply(y)) <= 1.0 + 1e-10

    def test_rescale_preserves_payload(self):
        op = kit.build_partial_orthonormal(6, 16, 2)
        scaled = kit.rescale_for_rip(op, 0.3)
        v = np.random.default_rng(1).standard_normal(16)
        np.testing.assert_allclose(scaled.apply(v), op.apply(v) / np.sqrt(1.3), atol=1e-14)


class TestDescriptors:
    @pytest.mark.parametrize(
        "build", [kit.build_gaussian, kit.build_bernoulli, kit.build_partial_orthonormal]
    )
    def test_round_trip(self, build):
        op = kit.rescale_for_rip(build(6, 12, 99), 0.25)
        doc = json.loads(json.dumps(kit.to_descriptor(op)))
        rebuilt = kit.from_descriptor(doc)
        v = np.random.default_rng(0).standard_normal(12)
        np.testing.assert_array_equal(rebuilt.apply(v), op.apply(v))

    def test_descriptor_fields(self):
        doc = kit.to_descriptor(kit.build_gaussian(6, 12, 3))
        assert doc == {"kind": "gaussian", "M": 6, "N": 12, "seed": 3, "scale": 1.0}

    def test_raw_dense_not_serializable(self):
        with pytest.raises(ValueError):
            kit.to_descriptor(kit.DenseOperator(np.eye(3)))

    def test_malformed_descriptor(self):
        with pytest.raises(ValueError):
            kit.from_descriptor({"kind": "gaussian", "M": 4})
        with pytest.raises(ValueError):
            kit.from_descriptor({"kind": "laplace", "M": 4, "N": 8, "seed": 0})


class TestIndexSet:
    def test_sorted_and_distinct(self):
        np.testing.assert_array_equal(kit.as_index_set([5, 1, 3], 8), [1, 3, 5])

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            kit.as_index_set([1, 1, 2], 8)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            kit.as_index_set([-1], 8)
        with pytest.raises(ValueError):
            kit.as_index_set([8], 8)


class TestCounting:
    def test_counts_accumulate(self):
        op = kit.CountingOperator(kit.build_gaussian(4, 8, 0))
        op.apply(np.zeros(8))
        op.apply(np.zeros(8))
        op.apply_adjoint(np.zeros(4))
        assert (op.forward_count, op.adjoint_count) == (2, 1)
        op.reset_counts()
        assert (op.forward_count, op.adjoint_count) == (0, 0)
