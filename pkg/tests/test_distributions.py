import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auctioncc.distributions import (
    EqualRevenue,
    Exponential,
    GeneralizedPareto,
    ProductPrior,
    ShiftedExponential,
    TwoPoint,
    Uniform,
    gamma_alpha,
    is_regular,
    make_marginal,
    monopoly,
    strong_regularity_coefficient,
    two_point_auxiliary,
    virtual_value,
)

DENSITY_FAMILIES = [
    Exponential(1.0),
    Exponential(2.5),
    ShiftedExponential(1.0, 1.0),
    GeneralizedPareto(0.0),
    GeneralizedPareto(0.3),
    GeneralizedPareto(0.7),
    GeneralizedPareto(1.0),
    EqualRevenue(),
    Uniform(0.0, 1.0),
    Uniform(0.5, 2.0),
]


class TestQuantiles:
    @pytest.mark.parametrize("mg", DENSITY_FAMILIES, ids=repr)
    def test_isf_inverts_sf(self, mg):
        s = np.logspace(-9, 0, 200)[:-1]
        np.testing.assert_allclose(mg.sf(mg.isf(s)), s, rtol=1e-10, atol=1e-15)

    @pytest.mark.parametrize("mg", DENSITY_FAMILIES, ids=repr)
    def test_pdf_matches_sf_derivative(self, mg):
        lo, hi = mg.support
        hi = min(hi, lo + 20.0)
        v = np.linspace(lo, hi, 41)[1:-1]
        h = 1e-6
        np.testing.assert_allclose(mg.pdf(v), -(mg.sf(v + h) - mg.sf(v - h)) / (2 * h), rtol=1e-5, atol=1e-10)

    def test_quantile_one_is_infinite_for_unbounded(self):
        with pytest.raises(ValueError, match="infinite quantile"):
            Exponential(1.0).quantile(1.0)
        assert Uniform(0.0, 2.0).quantile(1.0) == 2.0

    def test_quantile_out_of_range(self):
        with pytest.raises(ValueError):
            Exponential(1.0).quantile(1.5)

    def test_gp_closed_forms(self):
        # alpha = 0 is the unit equal-revenue shape shifted to 0; alpha = 1 is Exp(1)
        v = np.linspace(0.0, 10.0, 11)
        np.testing.assert_allclose(GeneralizedPareto(0.0).sf(v), 1.0 / (1.0 + v))
        np.testing.assert_allclose(GeneralizedPareto(1.0).sf(v), np.exp(-v), rtol=1e-14)
        np.testing.assert_allclose(GeneralizedPareto(0.5).sf(v), (1.0 + v) ** -2.0)

    def test_equal_revenue_curve_is_flat(self):
        s = np.linspace(1e-6, 1.0, 50)
        np.testing.assert_array_equal(EqualRevenue().revenue_curve(s), np.ones_like(s))
        assert EqualRevenue().tail_revenue == 1.0

    def test_sampling_uses_inverse_survival(self):
        rng = np.random.default_rng(3)
        x = Exponential(2.0).sample(rng, 200_000)
        assert abs(x.mean() - 0.5) < 4 * 0.5 / math.sqrt(x.size)


class TestVirtualValues:
    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.75])
    def test_gp_virtual_value_is_affine(self, alpha):
        v = np.linspace(0.0, 30.0, 61)
        np.testing.assert_allclose(virtual_value(GeneralizedPareto(alpha), v), alpha * v - (1 - alpha), atol=1e-12)

    def test_gp_one_is_exponential(self):
        v = np.linspace(0.0, 30.0, 61)
        np.testing.assert_allclose(virtual_value(GeneralizedPareto(1.0), v), v - 1.0, atol=1e-12)
        assert virtual_value(GeneralizedPareto(0.5), 3.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 0.9])
    def test_strong_regularity_coefficient(self, alpha):
        assert strong_regularity_coefficient(GeneralizedPareto(alpha)) == pytest.approx(alpha, abs=1e-9)

    def test_exponential_is_mhr(self):
        assert strong_regularity_coefficient(Exponential(1.0)) == pytest.approx(1.0, abs=1e-12)
        assert is_regular(Uniform(0.0, 1.0))

    def test_two_point_has_no_density(self):
        tp = TwoPoint(3.0, 0.25)
        with pytest.raises(ValueError, match="no density"):
            virtual_value(tp, 1.0)

    def test_hazard_undefined_outside_support(self):
        with pytest.raises(ValueError, match="hazard undefined"):
            virtual_value(Uniform(0.0, 1.0), 2.0)


class TestMonopoly:
    def test_exponential(self):
        price, rev = monopoly(Exponential(1.0))
        assert price == pytest.approx(1.0, abs=1e-9)
        assert rev == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_uniform(self):
        price, rev = monopoly(Uniform(0.0, 1.0))
        assert price == pytest.approx(0.5, abs=1e-9)
        assert rev == pytest.approx(0.25, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    def test_gp_root_of_virtual_value(self, alpha):
        # phi = alpha v - (1 - alpha) vanishes at (1 - alpha) / alpha
        price, rev = monopoly(GeneralizedPareto(alpha))
        p = (1 - alpha) / alpha
        assert price == pytest.approx(p, rel=1e-9)
        assert rev == pytest.approx(p * (1 + p) ** (-1 / (1 - alpha)), rel=1e-12)

    def test_two_point(self):
        assert monopoly(TwoPoint(4.0, 0.3)) == (4.0, pytest.approx(1.2))

    def test_auxiliary_two_point(self):
        mg = Exponential(1.0)
        tp = two_point_auxiliary(mg)
        assert tp.high_value == monopoly(mg)[1]
        assert tp.high_prob == 0.5


class TestGammaAlpha:
    @given(st.floats(0.05, 1.0), st.floats(0.0, 50.0))
    @settings(max_examples=60, deadline=None)
    def test_inverse_roundtrip(self, alpha, x):
        y = gamma_alpha(alpha, x)
        assert gamma_alpha(alpha, y, inverse=True) == pytest.approx(x, rel=1e-8, abs=1e-10)


class TestSpecs:
    def test_roundtrip(self):
        for mg in DENSITY_FAMILIES + [TwoPoint(2.0, 0.5)]:
            assert make_marginal(mg.to_spec()) == mg

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            make_marginal({"family": "Cauchy", "params": {}})

    def test_unknown_param(self):
        with pytest.raises(ValueError):
            make_marginal({"family": "Exponential", "params": {"scale": 1.0}})

    @pytest.mark.parametrize("spec", [
        {"family": "GeneralizedPareto", "params": {"alpha": 1.5}},
        {"family": "Exponential", "params": {"rate": -1.0}},
        {"family": "Uniform", "params": {"lo": 2.0, "hi": 1.0}},
        {"family": "TwoPoint", "params": {"high_value": 1.0, "high_prob": 0.0}},
    ])
    def test_invalid_params(self, spec):
        with pytest.raises(ValueError):
            make_marginal(spec)

    def test_product_prior(self):
        p = ProductPrior.from_spec({"marginal": {"family": "Exponential", "params": {"rate": 1.0}}, "m": 3})
        assert p.m == 3 and p.is_iid
        x = p.sample(np.random.default_rng(0), (5,))
        assert x.shape == (5, 3)
        q = ProductPrior.from_spec(p.to_spec())
        assert q.marginals == p.marginals
