import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from auctioncc.distributions import EqualRevenue, Exponential, ProductPrior, Uniform
from auctioncc.mechanisms import eval_simple
from auctioncc.quantile_game import (
    as_quantile_matrix,
    case_counts,
    case_probabilities,
    cdw_of_matrix,
    dominance_report,
    game_value,
    mixture_weights_m3,
    sorted_rows,
)
from auctioncc.sampling import SampleConfig

EXP2 = ProductPrior.iid(Exponential(1.0), 2)
UNI2 = ProductPrior.iid(Uniform(0.0, 1.0), 2)


def brute_force_value(Q, prior):
    """Full enumeration over tau and every sigma, no symmetry reduction."""
    m = Q.shape[0]
    V = np.stack([prior.marginals[i].quantile(Q) for i in range(m)])
    perms = list(itertools.permutations(range(m + 1)))
    vals = []
    for tau in itertools.permutations(range(m)):
        for sig in itertools.product(perms, repeat=m):
            cols = np.zeros(m + 1)
            for i in range(m):
                row = V[i, tau[i]]
                cols += row[list(sig[tau[i]])]
            vals.append(np.sort(cols)[-2])
    return math.fsum(vals) / len(vals)


class TestMatrices:
    def test_shape_validation(self):
        with pytest.raises(ValueError, match="m x \\(m\\+1\\)"):
            as_quantile_matrix(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            as_quantile_matrix([[0.1, 0.2, 1.2], [0.1, 0.2, 0.3]])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            game_value(np.full((3, 4), 0.5), EXP2)

    def test_sorted_rows(self):
        np.testing.assert_array_equal(sorted_rows([[0.1, 0.9, 0.5]]), [[0.9, 0.5, 0.1]])

    def test_exact_rejects_large_m(self):
        p = ProductPrior.iid(Exponential(1.0), 4)
        with pytest.raises(ValueError, match="enumeration too large"):
            game_value(np.full((4, 5), 0.5), p)


class TestGameValue:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_brute_force_m2(self, seed):
        Q = np.random.default_rng(seed).random((2, 3))
        assert game_value(Q, EXP2).mean == pytest.approx(brute_force_value(Q, EXP2), rel=1e-13)

    def test_matches_brute_force_m3(self):
        p = ProductPrior.iid(Uniform(0.0, 1.0), 3)
        Q = np.random.default_rng(4).random((3, 4))
        assert game_value(Q, p).mean == pytest.approx(brute_force_value(Q, p), rel=1e-13)

    def test_relabel_invariance(self):
        rng = np.random.default_rng(8)
        p = ProductPrior.iid(Exponential(1.0), 3)
        Q = rng.random((3, 4))
        base = game_value(Q, p).mean
        for _ in range(5):
            R = Q[rng.permutation(3)][:, rng.permutation(4)]
            R = np.stack([row[rng.permutation(4)] for row in R])
            assert game_value(R, p).mean == pytest.approx(base, rel=1e-14)

    def test_monte_carlo_agrees_with_exact(self):
        Q = np.random.default_rng(5).random((3, 4))
        p = ProductPrior.iid(Exponential(1.0), 3)
        exact = game_value(Q, p).mean
        mc = game_value(Q, p, "monte_carlo", SampleConfig(seed=1, samples=1_000_000))
        assert abs(mc.mean - exact) <= 4 * mc.stderr

    def test_constant_matrix(self):
        # every column sums to the same value
        Q = np.full((2, 3), 0.5)
        assert game_value(Q, UNI2).mean == pytest.approx(1.0)

    def test_average_matches_bspa(self):
        rng = np.random.default_rng(12)
        vals = [game_value(rng.random((2, 3)), UNI2).mean for _ in range(3000)]
        target = eval_simple("BSPA", UNI2, 3, SampleConfig(seed=3, samples=400_000))
        se = math.hypot(np.std(vals, ddof=1) / math.sqrt(len(vals)), target.stderr)
        assert abs(np.mean(vals) - target.mean) <= 4 * se


class TestCdwOfMatrix:
    def test_hand_computed_uniform(self):
        Q = np.array([[0.9, 0.6, 0.3], [0.8, 0.2, 0.4]])
        # rows sorted: (0.9, 0.6, 0.3), (0.8, 0.4, 0.2); uniform quantile is identity
        expected = (2 * 0.6 + 0.3 + 2 * 0.4 + 0.2) / 3
        assert cdw_of_matrix(Q, UNI2) == pytest.approx(expected)


class TestDominance:
    @pytest.mark.parametrize("mg", [Exponential(1.0), EqualRevenue()], ids=lambda x: x.family)
    def test_no_violations(self, mg):
        r = dominance_report(ProductPrior.iid(mg, 2), 200, seed=3)
        assert r.ok and r.violations == 0 and r.min_gap >= -1e-12
        assert r.violating_matrix is None


class TestCombinatorics:
    def test_case_probabilities(self):
        assert case_probabilities(3) == (Fraction(17, 36), Fraction(1, 9), Fraction(1, 12), Fraction(1, 3))
        assert case_probabilities(2) == (Fraction(1, 3), Fraction(2, 3))

    def test_tuple_counts(self):
        assert case_counts(3)[1] == 13824
        assert case_counts(2)[1] == 36

    def test_mixture_weights(self):
        mw = mixture_weights_m3()
        assert mw.weights == (Fraction(505, 972), Fraction(491, 1944), Fraction(443, 1944))
        assert sum(mw.weights) == 1
        assert mw.dominates_cdw

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            case_probabilities(4)
