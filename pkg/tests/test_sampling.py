import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auctioncc.distributions import Exponential, GeneralizedPareto, ProductPrior
from auctioncc.mechanisms import eval_cdw, eval_simple
from auctioncc.sampling import Estimate, SampleConfig, derive_seed, monte_carlo


def uniform_stat(rng, size):
    return rng.random(size)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"seed": -1}, {"samples": 0}, {"chunks": 0}, {"method": "qmc"},
                                    {"workers": 0}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            SampleConfig(**kw)

    @given(st.integers(1, 10**6), st.integers(1, 64))
    @settings(max_examples=50)
    def test_chunk_sizes_partition(self, samples, chunks):
        sizes = SampleConfig(samples=samples, chunks=chunks).chunk_sizes()
        assert sum(sizes) == samples
        assert max(sizes) - min(sizes) <= 1

    def test_derived_seeds_are_stable_and_distinct(self):
        assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
        assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
        assert derive_seed(1, "a") != derive_seed(2, "a")


class TestMonteCarlo:
    def test_uniform_mean(self):
        est = monte_carlo(uniform_stat, SampleConfig(seed=1, samples=100_000))
        assert abs(est.mean - 0.5) < 4 * est.stderr
        assert est.stderr == pytest.approx(np.sqrt(1 / 12 / 100_000), rel=0.02)

    def test_same_seed_same_answer(self):
        a = monte_carlo(uniform_stat, SampleConfig(seed=5, samples=50_000))
        b = monte_carlo(uniform_stat, SampleConfig(seed=5, samples=50_000))
        assert a == b

    def test_workers_do_not_change_result(self):
        p = ProductPrior.iid(Exponential(1.0), 3)
        one = eval_cdw(p, 1, SampleConfig(seed=9, samples=80_000, workers=1))
        four = eval_cdw(p, 1, SampleConfig(seed=9, samples=80_000, workers=4))
        assert one.mean == four.mean and one.stderr == four.stderr

    def test_chunks_are_independent_streams(self):
        cfg = SampleConfig(seed=3)
        assert cfg.chunk_rng(0).random() != cfg.chunk_rng(1).random()

    def test_auxiliary_columns(self):
        def stat(rng, size):
            u = rng.random(size)
            return np.column_stack([u, u * u])

        est = monte_carlo(stat, SampleConfig(seed=0, samples=100_000), names=("second_moment",))
        assert est.details["second_moment"] == pytest.approx(1 / 3, abs=0.01)

    def test_median_of_means_on_heavy_tail(self):
        p = ProductPrior.iid(GeneralizedPareto(0.0), 1)
        est = eval_simple("VCG", p, 2, SampleConfig(seed=0, samples=100_000, method="monte_carlo"))
        assert "median_of_means" in est.flags and "infinite_variance" in est.flags


class TestEstimate:
    def test_exact(self):
        e = Estimate.exact(2.0)
        assert e.stderr == 0.0 and e.method == "closed_form"

    def test_scaling(self):
        e = Estimate(2.0, 0.5, 10, 0, "monte_carlo")
        assert e.scaled(2.0).mean == 4.0 and e.scaled(2.0).stderr == 1.0
        assert e.shifted(1.0).mean == 3.0 and e.shifted(1.0).stderr == 0.5
        assert e.lower(4) == 0.0 and e.upper(2) == 3.0
