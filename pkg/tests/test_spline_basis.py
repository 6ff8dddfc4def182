import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.interpolate import BSpline

from tsspam.exceptions import InputError
from tsspam.spline_basis import (
    BSplineBasis,
    KnotVector,
    auto_q,
    build_design,
    build_uniform_knots,
    center_basis,
    eval_basis,
)


def basis(a, b, K, l):
    return BSplineBasis(build_uniform_knots(a, b, K, l))


class TestKnots:
    def test_piecewise_constant_single_function(self):
        kv = build_uniform_knots(0.0, 1.0, 0, 1)
        assert kv.interior.size == 0
        np.testing.assert_array_equal(kv.full, [0.0, 1.0])
        assert BSplineBasis(kv).q == 1

    def test_quadratic_one_interior_knot(self):
        kv = build_uniform_knots(0.0, 1.0, 1, 3)
        np.testing.assert_array_equal(kv.interior, [0.5])
        assert BSplineBasis(kv).q == 4

    def test_symmetric_interval(self):
        kv = build_uniform_knots(-2.0, 2.0, 3, 2)
        np.testing.assert_allclose(kv.interior, [-1.0, 0.0, 1.0], atol=1e-15)
        assert BSplineBasis(kv).q == 5

    def test_clamped_multiplicity(self):
        kv = build_uniform_knots(0.0, 3.0, 2, 4)
        full = kv.full
        assert np.sum(full == 0.0) == 4 and np.sum(full == 3.0) == 4

    def test_even_spacing(self):
        kv = build_uniform_knots(-1.3, 7.9, 17, 3)
        gaps = np.diff(np.r_[kv.a, kv.interior, kv.b])
        assert gaps.max() - gaps.min() <= 1e-9 * (kv.b - kv.a)

    @pytest.mark.parametrize("a,b,K,l", [(1, 1, 2, 3), (2, 1, 2, 3), (0, 1, 2, 0), (0, 1, -1, 2)])
    def test_invalid_arguments(self, a, b, K, l):
        with pytest.raises(InputError):
            build_uniform_knots(a, b, K, l)

    def test_interior_outside_interval_rejected(self):
        with pytest.raises(InputError):
            KnotVector(0.0, 1.0, np.array([0.5, 1.0]), 2)
        with pytest.raises(InputError):
            KnotVector(0.0, 1.0, np.array([0.6, 0.4]), 2)


class TestEvalBasis:
    def test_indicator_basis(self):
        np.testing.assert_array_equal(eval_basis(basis(0, 1, 1, 1), 0.25), [1.0, 0.0])

    def test_hat_functions_at_span_midpoint(self):
        np.testing.assert_allclose(eval_basis(basis(0, 1, 1, 2), 0.25), [0.5, 0.5, 0.0], atol=1e-15)

    def test_right_endpoint_belongs_to_last_span(self):
        out = eval_basis(basis(0, 1, 2, 3), 1.0)
        np.testing.assert_allclose(out, [0, 0, 0, 0, 1.0])

    def test_clamps_outside_points(self):
        b = basis(0, 1, 2, 3)
        np.testing.assert_array_equal(eval_basis(b, -5.0), eval_basis(b, 0.0))
        np.testing.assert_array_equal(eval_basis(b, 9.0), eval_basis(b, 1.0))

    def test_nan_rejected(self):
        with pytest.raises(InputError):
            eval_basis(basis(0, 1, 2, 3), [0.1, np.nan])

    def test_shapes(self):
        b = basis(0, 1, 3, 4)
        assert eval_basis(b, 0.3).shape == (7,)
        assert eval_basis(b, np.linspace(0, 1, 11)).shape == (11, 7)

    @pytest.mark.parametrize("K,l", [(0, 1), (1, 2), (3, 3), (5, 4), (8, 5)])
    def test_matches_scipy_design_matrix(self, K, l):
        b = basis(-1.5, 2.0, K, l)
        x = np.random.default_rng(K * 10 + l).uniform(-1.5, 2.0, 200)
        ref = BSpline.design_matrix(x, b.knots.full, l - 1).toarray()
        np.testing.assert_allclose(eval_basis(b, x), ref, atol=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(
        K=st.integers(0, 12),
        l=st.integers(1, 6),
        a=st.floats(-50, 50),
        width=st.floats(1e-3, 100),
        u=st.lists(st.floats(0, 1), min_size=1, max_size=30),
    )
    def test_partition_of_unity_and_local_support(self, K, l, a, width, u):
        b = basis(a, a + width, K, l)
        x = a + width * np.asarray(u)
        vals = eval_basis(b, x)
        assert np.all(vals >= 0)
        np.testing.assert_allclose(vals.sum(axis=1), 1.0, atol=1e-10)
        assert np.all((vals > 0).sum(axis=1) <= l)


class TestCenterBasis:
    def test_indicator_means(self):
        cb = center_basis(basis(0, 1, 1, 1), [0.25, 0.75])
        np.testing.assert_allclose(cb.offsets, [0.5, 0.5])

    def test_constant_sample_centers_to_zero(self):
        b = basis(0, 2, 2, 3)
        cb = center_basis(b, np.full(7, 0.8))
        np.testing.assert_allclose(cb.offsets, eval_basis(b, 0.8))
        np.testing.assert_allclose(cb(0.8), 0.0, atol=1e-15)

    def test_centered_sums_vanish(self):
        x = np.random.default_rng(3).normal(size=400)
        cb = center_basis(basis(x.min(), x.max(), 4, 3), x)
        assert np.all(np.abs(cb(x).sum(axis=0)) <= 1e-9 * x.size)

    def test_drop_last(self):
        x = np.linspace(0, 1, 9)
        cb = center_basis(basis(0, 1, 1, 3), x, drop_last=True)
        assert cb.n_columns == 3 and cb(x).shape == (9, 3)

    def test_empty_sample(self):
        with pytest.raises(InputError):
            center_basis(basis(0, 1, 1, 2), [])


class TestBuildDesign:
    def test_replication_shape(self):
        X = np.random.default_rng(0).normal(size=(500, 300))
        design, y = build_design(X, 0, q=3)
        assert design.Z.shape == (499, 900)
        assert y.shape == (499,)

    def test_small_shape_with_full_basis(self):
        X = np.array([[0.1], [0.5], [0.2], [0.9], [0.4]])
        design, y = build_design(X, 0, q=2, order=1, drop_redundant=False)
        assert design.Z.shape == (4, 2) and y.shape == (4,)
        # indicator basis centered over X[0:4]: two points in each half
        np.testing.assert_allclose(design.bases[0].offsets, [0.5, 0.5])

    def test_response_is_centered_lead(self):
        X = np.random.default_rng(1).normal(size=(30, 3))
        design, y = build_design(X, 2, q=3)
        np.testing.assert_allclose(y, X[1:, 2] - X[1:, 2].mean())
        assert design.response_mean == pytest.approx(X[1:, 2].mean())

    def test_blocks_equal_centered_basis_at_lagged_inputs(self):
        X = np.random.default_rng(2).normal(size=(40, 4))
        design, _ = build_design(X, 1, q=4, order=3)
        for j in range(4):
            np.testing.assert_allclose(design.block(j), design.bases[j](X[:-1, j]))
            assert np.all(np.abs(design.block(j).sum(axis=0)) <= 1e-9 * design.n)

    def test_blocks_full_rank_when_redundant_column_dropped(self):
        X = np.random.default_rng(4).normal(size=(200, 2))
        design, _ = build_design(X, 0, q=3)
        assert np.linalg.matrix_rank(design.block(1)) == 3
        design_full, _ = build_design(X, 0, q=3, drop_redundant=False)
        assert np.linalg.matrix_rank(design_full.block(1)) == 2

    def test_constant_column_flagged(self):
        X = np.random.default_rng(5).normal(size=(20, 3))
        X[:, 1] = 4.0
        design, _ = build_design(X, 0, q=3)
        assert design.degenerate == (1,)
        assert not design.block(1).any()

    def test_group_of(self):
        design, _ = build_design(np.random.default_rng(6).normal(size=(20, 3)), 0, q=3)
        assert [design.group_of(c) for c in (0, 2, 3, 8)] == [0, 0, 1, 2]
        with pytest.raises(IndexError):
            design.group_of(9)

    def test_transform_reproduces_training_rows(self):
        X = np.random.default_rng(7).normal(size=(50, 3))
        for std in (False, True):
            design, _ = build_design(X, 0, q=4, standardize=std)
            np.testing.assert_allclose(design.transform(X[:-1]), design.Z, atol=1e-12)

    def test_standardized_columns_have_unit_sd(self):
        X = np.random.default_rng(8).normal(size=(80, 2))
        design, _ = build_design(X, 0, q=3, standardize=True)
        np.testing.assert_allclose(design.Z.std(axis=0), 1.0)

    def test_auto_q(self):
        assert auto_q(500, 3) == 6
        assert auto_q(2000, 3) == 8
        assert auto_q(32, 2, smoothness=2.0) == 4

    @pytest.mark.parametrize(
        "X,kw",
        [
            (np.ones((4, 2)), dict(q=3)),
            (np.array([[1.0, np.inf]] * 10), dict(q=3)),
            (np.zeros((10, 2)), dict(q=3, order=5)),
        ],
    )
    def test_invalid_inputs(self, X, kw):
        with pytest.raises(InputError):
            build_design(X, 0, **kw)

    def test_target_out_of_range(self):
        with pytest.raises(InputError):
            build_design(np.zeros((10, 2)), 2, q=3)
