import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from auctioncc.distributions import EqualRevenue, Exponential, GeneralizedPareto, ShiftedExponential, TwoPoint, Uniform
from auctioncc.order_stats import (
    expected_order_stat,
    expected_order_stat_quadrature,
    harmonic,
    order_stat_density,
    three_interval_crossings,
)


def gp_closed_form(alpha, k, n):
    """E[k-th largest of n] under GP(alpha) via Beta functions."""
    logc = special.gammaln(n + 1) - special.gammaln(k) - special.gammaln(n - k + 1)
    return math.exp(logc + special.betaln(n - k + 1, k - 1 + alpha)) - 1.0


class TestDensity:
    def test_known_value(self):
        # xi_{2:4}(q) = 12 q^2 (1 - q) -> 1.5 at q = 1/2
        assert order_stat_density(2, 4, 0.5) == pytest.approx(1.5)

    @pytest.mark.parametrize("k,n", [(1, 1), (1, 5), (2, 5), (5, 5), (3, 9)])
    def test_integrates_to_one(self, k, n):
        val, _ = integrate.quad(lambda q: order_stat_density(k, n, q), 0, 1)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_rank_validation(self):
        with pytest.raises(ValueError):
            order_stat_density(0, 3, 0.5)
        with pytest.raises(ValueError):
            order_stat_density(4, 3, 0.5)


class TestExpectedOrderStat:
    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.75, 0.9])
    @pytest.mark.parametrize("k,n", [(2, 2), (2, 7), (3, 10), (2, 50)])
    def test_gp_quadrature_matches_beta_closed_form(self, alpha, k, n):
        q = expected_order_stat_quadrature(GeneralizedPareto(alpha), k, n)
        assert q == pytest.approx(gp_closed_form(alpha, k, n), rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("n", [1, 3, 20])
    def test_gp_max_quadrature_matches_closed_form(self, alpha, n):
        q = expected_order_stat_quadrature(GeneralizedPareto(alpha), 1, n)
        assert q == pytest.approx(gp_closed_form(alpha, 1, n), rel=1e-10)

    @pytest.mark.parametrize("k,n", [(1, 1), (1, 8), (2, 8), (8, 8)])
    def test_exponential_harmonic_vs_quadrature(self, k, n):
        exact = sum(1.0 / i for i in range(k, n + 1))
        assert expected_order_stat(Exponential(1.0), k, n) == pytest.approx(exact, rel=1e-14)
        assert expected_order_stat_quadrature(Exponential(1.0), k, n) == pytest.approx(exact, rel=1e-10)

    def test_shifted_exponential(self):
        assert expected_order_stat(ShiftedExponential(1.0, 1.0), 1, 3) == pytest.approx(1.0 + harmonic(3))

    @pytest.mark.parametrize("k,n", [(2, 2), (2, 5), (3, 6)])
    def test_equal_revenue_closed_form_vs_quadrature(self, k, n):
        a = expected_order_stat(EqualRevenue(), k, n)
        b = expected_order_stat_quadrature(EqualRevenue(), k, n)
        assert a == pytest.approx(b, rel=1e-9)

    def test_equal_revenue_second_of_n(self):
        for n in (2, 3, 5, 10):
            assert expected_order_stat(EqualRevenue(), 2, n) == pytest.approx(n, rel=1e-12)

    def test_heavy_max_diverges(self):
        assert math.isinf(expected_order_stat(EqualRevenue(), 1, 3))
        assert math.isinf(expected_order_stat(GeneralizedPareto(0.0), 1, 3))

    def test_uniform(self):
        assert expected_order_stat(Uniform(0.0, 1.0), 2, 4) == pytest.approx(3 / 5)

    def test_two_point(self):
        assert expected_order_stat(TwoPoint(2.0, 0.5), 1, 2) == pytest.approx(1.5)

    def test_second_of_one_is_zero(self):
        assert expected_order_stat(Exponential(1.0), 2, 1) == 0.0

    @given(st.floats(0.05, 0.95), st.integers(2, 30))
    @settings(max_examples=40, deadline=None)
    def test_gp_second_is_expected_virtual_value_of_max(self, alpha, N):
        gp = GeneralizedPareto(alpha)
        f1 = expected_order_stat(gp, 1, N)
        f2 = expected_order_stat(gp, 2, N)
        assert f2 == pytest.approx(alpha * f1 - (1 - alpha), rel=1e-8, abs=1e-10)

    def test_monotone_in_n(self):
        gp = GeneralizedPareto(0.5)
        vals = [expected_order_stat(gp, 1, n) for n in range(2, 20)]
        assert np.all(np.diff(vals) > 0)


class TestCrossings:
    def test_adjacent_closed_form(self):
        lo, hi = three_interval_crossings(3, 4)
        assert lo == 0.0
        assert hi == pytest.approx(1 - 3 / 12)

    @pytest.mark.parametrize("n,N", [(1, 3), (2, 6), (4, 11), (6, 12)])
    def test_roots_are_zeros_of_difference(self, n, N):
        lo, hi = three_interval_crossings(n, N)
        for q in (lo, hi):
            if 0.0 < q < 1.0:
                d = order_stat_density(1, n, q) - order_stat_density(2, N, q)
                assert abs(d) < 1e-8
        assert lo <= hi
