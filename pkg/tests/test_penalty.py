import numpy as np
import pytest
from hypothesis import given, strategies as st

from tsspam.exceptions import InputError
from tsspam.penalty import (
    PenaltyKind,
    PenaltyParams,
    concave_derivative,
    concave_grad,
    concave_value,
    penalty_value,
)

MCP = PenaltyKind.MCP
GL = PenaltyKind.GROUP_LASSO


class TestPenaltyValue:
    def test_inside_region(self):
        assert penalty_value(PenaltyParams(1.0, 2.0), 1.0) == pytest.approx(0.75)

    def test_flat_region(self):
        assert penalty_value(PenaltyParams(1.0, 2.0), 5.0) == pytest.approx(1.0)

    def test_zero(self):
        assert penalty_value(PenaltyParams(0.7, 3.0), 0.0) == 0.0

    def test_group_lasso_is_linear(self):
        assert penalty_value(PenaltyParams(0.5, 1.0, GL), 3.0) == pytest.approx(1.5)

    def test_vectorized(self):
        out = penalty_value(PenaltyParams(1.0, 2.0), np.array([0.0, 1.0, 5.0]))
        np.testing.assert_allclose(out, [0.0, 0.75, 1.0])

    def test_negative_norm_rejected(self):
        with pytest.raises(InputError):
            penalty_value(PenaltyParams(1.0), -0.1)

    @pytest.mark.parametrize("lam,gamma", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_invalid_params(self, lam, gamma):
        with pytest.raises(InputError):
            PenaltyParams(lam, gamma)


class TestConcavePart:
    def test_values(self):
        p = PenaltyParams(1.0, 2.0)
        assert concave_value(p, 1.0) == pytest.approx(-0.25)
        assert concave_value(p, 5.0) == pytest.approx(-4.0)

    def test_derivative(self):
        p = PenaltyParams(1.0, 2.0)
        assert concave_derivative(p, 1.0) == pytest.approx(-0.5)
        assert concave_derivative(p, 5.0) == pytest.approx(-1.0)

    def test_group_gradient_outside(self):
        np.testing.assert_allclose(concave_grad(PenaltyParams(1.0, 1.0), [3.0, 4.0]), [-0.6, -0.8])

    def test_group_gradient_inside_and_zero(self):
        p = PenaltyParams(10.0, 1.0)
        np.testing.assert_allclose(concave_grad(p, [3.0, 4.0]), [-3.0, -4.0])
        np.testing.assert_array_equal(concave_grad(p, [0.0, 0.0]), [0.0, 0.0])

    def test_group_lasso_has_no_concave_part(self):
        p = PenaltyParams(1.0, 1.0, GL)
        assert concave_value(p, 3.0) == 0.0
        np.testing.assert_array_equal(concave_grad(p, [1.0, 2.0]), [0.0, 0.0])

    @given(
        lam=st.floats(0.01, 10),
        gamma=st.floats(0.05, 20),
        z=st.floats(0, 100),
    )
    def test_split_identity(self, lam, gamma, z):
        p = PenaltyParams(lam, gamma)
        assert penalty_value(p, z) == pytest.approx(lam * z + concave_value(p, z), rel=1e-12, abs=1e-12)

    @given(
        lam=st.floats(0.01, 10),
        gamma=st.floats(0.05, 20),
        z=st.floats(0, 100),
    )
    def test_penalty_is_bounded_and_nondecreasing(self, lam, gamma, z):
        p = PenaltyParams(lam, gamma)
        r = penalty_value(p, z)
        assert 0 <= r <= 0.5 * lam * lam * gamma * (1 + 1e-12)
        assert penalty_value(p, z * 1.01 + 1e-9) >= r - 1e-12

    @given(lam=st.floats(0.01, 5), gamma=st.floats(0.1, 10), z=st.floats(0.001, 50))
    def test_derivative_matches_finite_difference(self, lam, gamma, z):
        p = PenaltyParams(lam, gamma)
        h = 1e-6 * max(z, 1.0)
        if abs(z - lam * gamma) < 2 * h:
            return
        fd = (concave_value(p, z + h) - concave_value(p, z - h)) / (2 * h)
        assert concave_derivative(p, z) == pytest.approx(fd, rel=1e-5, abs=1e-7)
