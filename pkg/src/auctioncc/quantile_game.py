"""Quantile matrices, the bundle second-price game and its combinatorics.

A quantile matrix Q is m x (m+1): row r holds m+1 quantiles. The game
permutes each row (sigma), assigns rows to items (tau) and sums values
column-wise; the expected second-highest column sum is the BSPA revenue
with m+1 bidders conditioned on Q.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .distributions import ProductPrior
from .sampling import Estimate, SampleConfig, monte_carlo

__all__ = [
    "as_quantile_matrix",
    "random_quantile_matrix",
    "sorted_rows",
    "cdw_of_matrix",
    "game_value",
    "DominanceReport",
    "dominance_report",
    "case_counts",
    "case_probabilities",
    "MixtureWeights",
    "mixture_weights_m3",
    "EXACT_MAX_M",
]

EXACT_MAX_M = 3


def _prior(prior) -> ProductPrior:
    return prior if isinstance(prior, ProductPrior) else ProductPrior.from_spec(prior)


def as_quantile_matrix(Q, m: int | None = None) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[1] != Q.shape[0] + 1:
        raise ValueError(f"quantile matrix must be m x (m+1), got shape {Q.shape}")
    if m is not None and Q.shape[0] != m:
        raise ValueError(f"dimension mismatch: matrix has {Q.shape[0]} rows, prior has {m} items")
    if np.any(np.isnan(Q)) or np.any((Q < 0.0) | (Q > 1.0)):
        raise ValueError("quantile matrix entries must lie in [0, 1]")
    return Q


def random_quantile_matrix(m: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random((m, m + 1))


def sorted_rows(Q) -> np.ndarray:
    """Q*: each row sorted in decreasing order; ties keep column order."""
    Q = np.asarray(Q, dtype=float)
    order = np.argsort(-Q, axis=1, kind="stable")
    return np.take_along_axis(Q, order, axis=1)


def _value_table(Q: np.ndarray, prior: ProductPrior) -> np.ndarray:
    """V[i, r, c] = F_i^{-1}(Q[r, c])."""
    m = Q.shape[0]
    return np.stack([prior.marginals[i].quantile(Q) for i in range(m)])


def cdw_of_matrix(Q, prior) -> float:
    """(1/(m+1)) sum_i (2 g(Q*[i,2]) + sum_{k>=3} g(Q*[i,k])), g = item-average quantile."""
    prior = _prior(prior)
    Q = as_quantile_matrix(Q, prior.m)
    m = prior.m
    Qs = sorted_rows(Q)[:, 1:]  # drop each row's top quantile
    g = np.mean([prior.marginals[j].quantile(Qs) for j in range(m)], axis=0)
    weights = np.ones(m)
    weights[0] = 2.0
    return float(math.fsum((g * weights).ravel()) / (m + 1))


@lru_cache(maxsize=None)
def _perms(k: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(k))), dtype=np.intp)


def _exact_value(V: np.ndarray) -> float:
    # Relabeling all columns at once leaves s_2 unchanged, so the first
    # item's row permutation is pinned to the identity.
    m = V.shape[0]
    P = _perms(m + 1)
    n_p = P.shape[0]
    seconds = []
    for tau in itertools.permutations(range(m)):
        S = V[0, tau[0]][None, :]
        for i in range(1, m):
            A = V[i, tau[i]][P]  # (n_p, m+1): item i's value in column j, per sigma
            S = S[..., None, :] + A.reshape((1,) * i + (n_p, m + 1))
        seconds.append(np.partition(S, m - 1, axis=-1)[..., m - 1].ravel())
    return math.fsum(np.concatenate(seconds)) / (len(seconds) * n_p ** (m - 1))


def game_value(Q, prior, mode: str = "exact", cfg: SampleConfig | None = None) -> Estimate:
    """Expected second-highest column sum over uniform (sigma, tau).

    ``exact`` enumerates the m! ((m+1)!)^m relabelings (m <= 3), modulo
    joint column relabeling, and averages with ``math.fsum``; the result is
    exactly invariant to any relabeling of Q.
    ``monte_carlo`` samples relabelings with ``cfg``.
    """
    prior = _prior(prior)
    Q = as_quantile_matrix(Q, prior.m)
    m = prior.m
    V = _value_table(Q, prior)
    if mode == "exact":
        if m > EXACT_MAX_M:
            raise ValueError(f"enumeration too large for exact mode (m={m} > {EXACT_MAX_M})")
        return Estimate.exact(_exact_value(V), method="closed_form")
    if mode != "monte_carlo":
        raise ValueError(f"mode must be exact or monte_carlo: {mode!r}")
    cfg = cfg or SampleConfig()
    rows = np.arange(m)

    def stat(rng, size):
        tau = np.argsort(rng.random((size, m)), axis=1)
        sigma = np.argsort(rng.random((size, m, m + 1)), axis=2)
        # vals[b, i, j] = V[i, tau_b(i), sigma_b[tau_b(i)](j)]
        sig_rows = np.take_along_axis(sigma, tau[:, :, None], axis=1)
        vals = V[rows[None, :, None], tau[:, :, None], sig_rows]
        s = vals.sum(axis=1)
        return np.partition(s, m - 1, axis=1)[:, m - 1]

    return monte_carlo(stat, cfg, cost=3 * m * (m + 1))


@dataclass(frozen=True)
class DominanceReport:
    m: int
    trials: int
    seed: int
    min_gap: float
    violating_matrix: np.ndarray | None
    violations: int
    asserted: bool

    @property
    def ok(self) -> bool:
        return not self.asserted or self.violations == 0


def dominance_report(prior, trials: int, seed: int, tol: float = 1e-12,
                     cfg: SampleConfig | None = None) -> DominanceReport:
    """min over random Q of game_value(Q) - cdw_of_matrix(Q).

    Exact enumeration and a violation threshold of -tol for m in {2, 3};
    other m use Monte Carlo game values and only report.
    """
    prior = _prior(prior)
    m = prior.m
    asserted = m in (2, 3)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    min_gap, worst, violations = math.inf, None, 0
    for t in range(int(trials)):
        Q = random_quantile_matrix(m, rng)
        if m <= EXACT_MAX_M:
            gv = game_value(Q, prior, "exact").mean
        else:
            sub = cfg or SampleConfig(seed=int(seed), samples=2000, chunks=1)
            gv = game_value(Q, prior, "monte_carlo", sub.derive(t)).mean
        gap = gv - cdw_of_matrix(Q, prior)
        if gap < -tol:
            violations += 1
        if gap < min_gap:
            min_gap, worst = gap, Q
    return DominanceReport(m, int(trials), int(seed), float(min_gap),
                           worst if (asserted and violations) else None, violations, asserted)


# -- combinatorics -----------------------------------------------------------------


def _top2_columns(perm: tuple[int, ...]) -> frozenset:
    """Columns that receive the row's two largest entries.

    ``perm[j]`` is the rank (0 = largest) placed in column j.
    """
    return frozenset(j for j, r in enumerate(perm) if r < 2)


def _classify_m3(perms) -> int:
    tops = [_top2_columns(p) for p in perms]
    load = [sum(j in t for t in tops) for j in range(4)]
    if max(load) == 3:
        return 1
    occupied = sum(1 for x in load if x > 0)
    if occupied == 3:
        return 2
    if tops[0] == tops[1] or tops[0] == tops[2] or tops[1] == tops[2]:
        return 3
    return 4


def _classify_m2(perms) -> int:
    third = [p.index(2) for p in perms]
    return 1 if third[0] == third[1] else 2


def case_counts(m: int) -> tuple[tuple[int, ...], int]:
    """Counts of each case over all ((m+1)!)^m row-permutation tuples."""
    if m not in (2, 3):
        raise ValueError(f"case classification defined for m in {{2, 3}}, got {m}")
    classify = _classify_m2 if m == 2 else _classify_m3
    n_cases = 2 if m == 2 else 4
    counts = [0] * n_cases
    row_perms = list(itertools.permutations(range(m + 1)))
    total = 0
    for tup in itertools.product(row_perms, repeat=m):
        counts[classify(tup) - 1] += 1
        total += 1
    return tuple(counts), total


def case_probabilities(m: int) -> tuple[Fraction, ...]:
    counts, total = case_counts(m)
    return tuple(Fraction(c, total) for c in counts)


# Per-case rates at which the optimizer's chosen column holds the row's
# second, third and fourth order statistic.
CASE_SELECTION_RATES_M3 = (
    (Fraction(17, 27), Fraction(13, 54), Fraction(7, 54)),
    (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)),
    (Fraction(2, 3), Fraction(0), Fraction(1, 3)),
    (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),
)
CDW_WEIGHTS_M3 = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))


@dataclass(frozen=True)
class MixtureWeights:
    weights: tuple[Fraction, Fraction, Fraction]
    dominates_cdw: bool


def mixture_weights_m3() -> MixtureWeights:
    probs = case_probabilities(3)
    w = tuple(
        sum((p * rates[k] for p, rates in zip(probs, CASE_SELECTION_RATES_M3)), Fraction(0))
        for k in range(3)
    )
    prefix = list(itertools.accumulate(w))
    target = list(itertools.accumulate(CDW_WEIGHTS_M3))
    return MixtureWeights(w, all(a >= b for a, b in zip(prefix, target)))
