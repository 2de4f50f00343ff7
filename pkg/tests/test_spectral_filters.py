import numpy as np
import pytest

from src.filters.spectral_filters import (
    ContinuousFilter,
    DiscreteFilter,
    Representation,
    chebyshev_T,
    chebyshev_T_derivative,
    chebyshev_q,
    continuous_filter,
    continuous_residual_factor,
    discrete_filter,
    discrete_residual_factor,
    filter_sup,
    h_sequence,
    p_sequence,
    qualification_bound,
    trajectory_filter,
    trajectory_residual_factor,
)
from src.utils.errors import ConfigurationError


LAMBDA_GRID = np.logspace(-12, 4, 2000)


class TestContinuousFilter:
    @pytest.mark.parametrize("T", [0.5, 1.0, 10.0])
    def test_value_at_zero(self, T):
        assert continuous_filter(T, 0.0) == 0.5 * T * T

    def test_direct_value(self):
        assert continuous_filter(2.0, 1.0) == pytest.approx(1.0 - 1.0 / np.cosh(2.0), rel=1e-12)
        assert continuous_filter(2.0, 1.0) == pytest.approx(0.7342, abs=1e-4)

    def test_small_lambda_limit(self):
        np.testing.assert_allclose(
            continuous_filter(3.0, np.array([1e-14, 1e-10])),
            4.5,
            rtol=1e-8,
        )

    @pytest.mark.parametrize("T", [0.5, 3.0, 50.0])
    def test_regularization_bounds(self, T):
        values = LAMBDA_GRID * continuous_filter(T, LAMBDA_GRID)
        assert np.all(values >= 0.0)
        assert np.all(values <= 1.0 + 1e-12)
        curve = continuous_filter(T, LAMBDA_GRID)
        assert np.all(np.diff(curve) <= 1e-12 * curve[:-1])

    def test_residual_factor(self):
        lam = np.array([0.0, 0.5, 2.0, 1e4])
        np.testing.assert_allclose(
            continuous_residual_factor(1.5, lam),
            1.0 - lam * continuous_filter(1.5, lam),
            atol=1e-14,
        )
        assert np.isfinite(continuous_residual_factor(1e3, 1e6))

    def test_converges_to_inverse(self):
        lam = 0.3
        T = 1.0
        while abs(lam * continuous_filter(T, lam) - 1.0) > 0.01:
            T *= 2.0
            assert T < 1e4
        assert continuous_filter(T, lam) == pytest.approx(1.0 / lam, rel=0.01)

    def test_trajectory_filter_endpoints(self):
        lam = np.array([0.0, 0.1, 1.0, 25.0])
        np.testing.assert_allclose(trajectory_filter(0.0, 2.0, lam), 0.0, atol=1e-15)
        np.testing.assert_allclose(
            trajectory_filter(2.0, 2.0, lam),
            continuous_filter(2.0, lam),
            rtol=1e-12,
        )

    def test_trajectory_weights_sum_to_one(self):
        lam = np.concatenate([[0.0], np.logspace(-8, 3, 200)])
        for t in (0.0, 1.3, 4.0):
            np.testing.assert_allclose(
                lam * trajectory_filter(t, 4.0, lam) + trajectory_residual_factor(t, 4.0, lam),
                1.0,
                atol=1e-12,
            )
        np.testing.assert_allclose(
            trajectory_residual_factor(4.0, 4.0, lam),
            continuous_residual_factor(4.0, lam),
            rtol=1e-12,
        )

    def test_invalid_time(self):
        with pytest.raises(ConfigurationError):
            continuous_filter(0.0, 1.0)
        with pytest.raises(ConfigurationError):
            continuous_filter(1.0, -1.0)


class TestRecursion:
    def test_single_step(self):
        np.testing.assert_allclose(h_sequence(1, 1.0), [2.0])

    def test_two_steps(self):
        np.testing.assert_allclose(h_sequence(2, 1.0), [2.0, 2.5])

    def test_zero_lambda_fixed_point(self):
        np.testing.assert_array_equal(h_sequence(6, 0.0), np.ones(6))

    def test_values_at_least_one(self):
        assert np.all(h_sequence(12, np.array([0.0, 1e-6, 0.3, 40.0])) >= 1.0)

    def test_p_sequence(self):
        lam = 0.7
        np.testing.assert_allclose(
            p_sequence(2, lam),
            [1.0, lam + 1.0, lam**2 + 3.0 * lam + 1.0],
        )

    @pytest.mark.parametrize("N", [1, 2, 3, 5])
    def test_residual_factor_is_inverse_product(self, N):
        lam = np.array([0.0, 0.01, 0.5, 3.0])
        np.testing.assert_allclose(
            discrete_residual_factor(N, lam),
            1.0 / np.prod(h_sequence(N, lam), axis=0),
            rtol=1e-12,
        )
        np.testing.assert_allclose(
            np.prod(h_sequence(N, lam), axis=0),
            p_sequence(N, lam)[-1],
            rtol=1e-12,
        )


class TestDiscreteFilter:
    @pytest.mark.parametrize("N", range(1, 21))
    def test_value_at_zero(self, N):
        expected = ((2 * N + 1) ** 2 - 1) / 8.0
        assert discrete_filter(N, 0.0) == pytest.approx(expected, rel=1e-10)
        assert expected == N * (N + 1) / 2

    def test_hand_values(self):
        assert discrete_filter(1, 0.0) == 1.0
        assert discrete_filter(1, 1.0) == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("N", range(1, 31))
    def test_representations_agree(self, N):
        reference = discrete_filter(N, LAMBDA_GRID, Representation.RECURSION)
        for representation in (Representation.CHEBYSHEV, Representation.COSH):
            np.testing.assert_allclose(
                discrete_filter(N, LAMBDA_GRID, representation),
                reference,
                rtol=1e-9,
            )
        if N <= 8:
            small = LAMBDA_GRID[LAMBDA_GRID <= 10.0]
            np.testing.assert_allclose(
                discrete_filter(N, small, Representation.POLY),
                discrete_filter(N, small, Representation.RECURSION),
                rtol=1e-9,
            )

    @pytest.mark.parametrize("N", [100, 200, 400])
    def test_large_lambda_and_horizon(self, N):
        for representation in Representation:
            value = discrete_filter(N, 1e4, representation)
            assert value == pytest.approx(1e-4, rel=1e-12)
        lam = np.logspace(-6, 4, 200)
        np.testing.assert_allclose(
            discrete_filter(N, lam, Representation.CHEBYSHEV),
            discrete_filter(N, lam, Representation.RECURSION),
            rtol=1e-8,
        )

    def test_second_order_polynomial(self):
        lam = np.linspace(0.1, 5.0, 20)
        np.testing.assert_allclose(
            discrete_filter(2, lam, "chebyshev"),
            (1.0 - 1.0 / (lam**2 + 3.0 * lam + 1.0)) / lam,
            rtol=1e-11,
        )

    @pytest.mark.parametrize("N", [1, 4, 30])
    def test_regularization_bounds(self, N):
        values = LAMBDA_GRID * discrete_filter(N, LAMBDA_GRID)
        assert np.all(values >= 0.0)
        assert np.all(values <= 1.0 + 1e-12)

    def test_converges_to_inverse(self):
        lam = 0.05
        N = 1
        while abs(lam * discrete_filter(N, lam) - 1.0) > 0.01:
            N *= 2
            assert N < 2**12
        assert discrete_filter(N, lam) == pytest.approx(1.0 / lam, rel=0.01)

    def test_invalid_arguments(self):
        with pytest.raises(ConfigurationError):
            discrete_filter(0, 1.0)
        with pytest.raises(ConfigurationError):
            discrete_filter(2, 1.0, "tridiagonal")
        with pytest.raises(ConfigurationError):
            DiscreteFilter(0)


class TestChebyshev:
    def test_low_orders(self):
        x = np.linspace(-3.0, 3.0, 61)
        np.testing.assert_allclose(chebyshev_T(0, x), 1.0)
        np.testing.assert_allclose(chebyshev_T(1, x), x)
        np.testing.assert_allclose(
            chebyshev_T(3, x),
            4.0 * x**3 - 3.0 * x,
            rtol=1e-10,
            atol=1e-12,
        )

    @pytest.mark.parametrize("n", [1, 2, 5, 11])
    def test_values_at_one(self, n):
        assert chebyshev_T(n, 1.0) == 1.0
        assert chebyshev_T_derivative(n, 1.0) == n * n

    def test_cosine_form(self):
        theta = np.linspace(0.0, np.pi, 50)
        np.testing.assert_allclose(
            chebyshev_T(7, np.cos(theta)),
            np.cos(7 * theta),
            atol=1e-12,
        )

    @pytest.mark.parametrize("N", range(1, 11))
    def test_product_identity(self, N):
        lam = np.logspace(-6, 2, 200)
        np.testing.assert_allclose(
            p_sequence(N, lam)[-1],
            chebyshev_q(N, lam),
            rtol=1e-9,
        )


class TestQualification:
    def test_continuous_explicit_bound(self):
        flt = ContinuousFilter(10.0)
        bound = qualification_bound(flt, 1.0, 1e4)
        assert bound <= 2.0 * 4.0 * np.exp(-2.0) * 1e-2
        assert bound <= flt.qualification_rate(1.0)

    @pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("T", [1.0, 4.0, 16.0])
    def test_continuous_rate(self, mu, T):
        flt = ContinuousFilter(T)
        assert qualification_bound(flt, mu, 1e4) <= flt.qualification_rate(mu)

    @pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
    def test_discrete_rate(self, mu):
        scaled = [
            qualification_bound(DiscreteFilter(N), mu, 1e4) * (2 * N) ** (2 * mu)
            for N in (4, 8, 16, 32)
        ]
        for previous, current in zip(scaled, scaled[1:]):
            assert current <= 1.1 * previous

    def test_zero_exponent(self):
        assert qualification_bound(DiscreteFilter(5), 0.0, 1e4) <= 1.0
        assert qualification_bound(ContinuousFilter(5.0), 0.0, 1e4) <= 1.0


class TestFilterSup:
    def test_continuous(self):
        assert filter_sup(ContinuousFilter(3.0)) == pytest.approx(4.5)

    @pytest.mark.parametrize("N", [1, 2, 7, 20])
    def test_discrete(self, N):
        flt = DiscreteFilter(N)
        sup = filter_sup(flt)
        assert sup == pytest.approx(flt.value_at_zero)
        assert sup <= flt.sup_bound
