"""Acceptance criteria 1-13, one test each.

Each test prints a PASS/FAIL line; the session summary repeats them.
Tolerances and sample sizes are fixed here and must not be loosened to
make a criterion pass.
"""

import time

import pytest

from auctioncc import suites


def _timed(fn, budget: float):
    t0 = time.perf_counter()
    records = fn()
    elapsed = time.perf_counter() - t0
    records.append(suites.CheckRecord(f"runtime <= {budget:g} s", "pass" if elapsed <= budget else "fail",
                                      round(elapsed, 3), budget, "wall clock"))
    return records


def test_criterion_01_single_item_constant(report):
    suites.check_cc_single_item()  # warm imports and caches
    recs = _timed(suites.check_cc_single_item, 1e-3)
    assert report(1, recs, "C(1,1) = 3")


def test_criterion_02_asymptotic_constant(report):
    recs = _timed(suites.check_cc_asymptotic, 1.0)
    assert report(2, recs, "C(1e4,1)/1e4 in [1.716, 1.720]")


def test_criterion_03_constant_bounds(report):
    recs = _timed(suites.check_cc_bounds, 120.0)
    assert report(3, recs, "max(1/a-1,1) n < C(n,a) <= 11 n/a, n in [1,20], a in {0.1..1.0}")


def test_criterion_04_gp_identity(report):
    recs = _timed(suites.check_gp_identity, 30.0)
    assert report(4, recs, "F_2:N = a F_1:N - (1-a) to 1e-8")


@pytest.mark.slow
def test_criterion_05_vcg_competition(report):
    recs = _timed(lambda: suites.check_vcg_cc(samples=10_000_000, seed=2024), 600.0)
    assert report(5, recs, "VCG_{n+C} >= WEL_n and VCG_{n+C-1} < WEL_n on GP(a)^m, 1e7 samples")


def test_criterion_06_er_anchors(report):
    recs = suites.check_fig1b_anchors()
    assert report(6, recs, "equal-revenue anchors CDW_1=1, BSPA_3=3, VCG_5=5")


def test_criterion_07_case_probabilities(report):
    recs = _timed(suites.check_qgame_exact, 5.0)
    assert report(7, recs, "exact case probabilities and mixture weights")


def test_criterion_08_matrix_dominance(report):
    recs = _timed(lambda: suites.check_dominance(seed=11, trials2=1000, trials3=200), 180.0)
    assert report(8, recs, "game_value(Q) >= cdw_of_matrix(Q) - 1e-12")


@pytest.mark.slow
def test_criterion_09_coupling(report):
    recs = _timed(lambda: suites.check_coupling(matrices=10_000, seed=5), 300.0)
    assert report(9, recs, "quantile-game coupling with BSPA_(m+1) and CDW_1")


def test_criterion_10_approximations(report):
    recs = _timed(lambda: suites.check_approx_regular(200_000, 17) + suites.check_approx_mhr(200_000, 19), 900.0)
    assert report(10, recs, "constant-factor approximations on regular and MHR grids")


@pytest.mark.slow
def test_criterion_11_two_part_tariff(report):
    recs = _timed(lambda: suites.check_tariff(seed=29), 300.0)
    assert report(11, recs, "two-part tariff within 10% (m=100) / 5% (m=1000) of F_1:2")


def test_criterion_12_bundling_gap(report):
    recs = _timed(lambda: suites.check_bundling_gap(100_000, 31), 120.0)
    assert report(12, recs, "BSPA_100 per item <= 0.58 < WEL_2 per item on Uniform^50")


def test_criterion_13_three_intervals(report):
    recs = _timed(suites.check_crossings, 10.0)
    assert report(13, recs, "at most two sign changes, crossings match to 1e-4")
