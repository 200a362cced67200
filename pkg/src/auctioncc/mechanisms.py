"""Revenue and welfare of simple and optimal-benchmark mechanisms.

All evaluators take a ``ProductPrior`` (independent items, additive i.i.d.
bidders), a bidder count and a ``SampleConfig`` and return an ``Estimate``.
Monte Carlo draws happen in survival space: a value is ``isf(s)`` with
``s`` uniform, which keeps heavy tails accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    Marginal,
    ProductPrior,
    is_regular,
    monopoly,
)
from .order_stats import expected_order_stat, expected_order_stat_quadrature
from .sampling import Estimate, SampleConfig, monte_carlo

__all__ = [
    "SampleConfig",
    "Estimate",
    "eval_simple",
    "eval_srev",
    "eval_brev",
    "eval_cdw",
    "eval_core",
    "two_part_tariff",
    "bundling_gap_experiment",
    "BundlingGap",
    "posted_bundle_revenue",
    "bundle_hazard_profile",
    "top_two_survivals",
]

INFINITE_VARIANCE = "infinite_variance"


def _as_prior(prior) -> ProductPrior:
    if isinstance(prior, ProductPrior):
        return prior
    if isinstance(prior, Marginal):
        return ProductPrior((prior,))
    return ProductPrior.from_spec(prior)


def _check_bidders(bidders: int) -> int:
    if int(bidders) != bidders or bidders < 1:
        raise ValueError(f"bidders out of range (integer >= 1): {bidders}")
    return int(bidders)


def _check_regular(prior: ProductPrior, what: str) -> None:
    for mg in prior.marginals:
        if not mg.has_density:
            raise ValueError(f"{what}: {mg.family} has no density (atoms only)")
        if not is_regular(mg):
            raise ValueError(f"{what}: non-regular marginal {mg!r}")


def _min_tail(prior: ProductPrior) -> float:
    return min(mg.tail_index for mg in prior.marginals)


def top_two_survivals(rng: np.random.Generator, n: int, shape) -> tuple[np.ndarray, np.ndarray]:
    """Survival probabilities of the largest and second largest of n draws.

    Uses U_(1) = V1^(1/n) and U_(2) = U_(1) V2^(1/(n-1)), computed in
    survival space so both are accurate near 0. Cost is independent of n.
    """
    l1 = np.log(rng.random(shape)) / n
    s1 = -np.expm1(l1)
    if n == 1:
        return s1, np.ones_like(s1)
    s2 = -np.expm1(l1 + np.log(rng.random(shape)) / (n - 1))
    return s1, s2


def _isf_columns(prior: ProductPrior, s: np.ndarray) -> np.ndarray:
    return prior.isf(s)


# -- WEL / VCG / BSPA ----------------------------------------------------------


def _resolve(cfg: SampleConfig, heavy: bool, quad_ok: bool, what: str) -> str:
    if cfg.method == "quadrature":
        if not quad_ok:
            raise ValueError(f"{what}: no quadrature path for this instance")
        return "quadrature"
    if cfg.method == "monte_carlo":
        return "monte_carlo"
    return "quadrature" if (heavy and quad_ok) else "monte_carlo"


def eval_simple(kind: str, prior, bidders: int, cfg: SampleConfig) -> Estimate:
    """WEL, VCG or BSPA with ``bidders`` i.i.d. additive bidders.

    WEL = E[sum_j max_i v_ij], VCG = E[sum_j second_i v_ij],
    BSPA = E[second_i sum_j v_ij]. Quadrature is available for WEL and VCG
    at any m (they are sums of per-item order statistics) and for BSPA at
    m = 1.
    """
    kind = str(kind).upper()
    if kind not in ("WEL", "VCG", "BSPA"):
        raise ValueError(f"kind must be WEL, VCG or BSPA: {kind!r}")
    prior = _as_prior(prior)
    n = _check_bidders(bidders)
    m = prior.m
    if kind != "WEL" and n == 1:
        return Estimate.exact(0.0, seed=cfg.seed, flags=("no_competitor",))
    if kind == "BSPA" and m == 1:
        kind = "VCG"
    k = 1 if kind == "WEL" else 2
    if kind == "WEL" and _min_tail(prior) <= 1.0:
        return Estimate.exact(math.inf, method="quadrature", seed=cfg.seed, flags=("infinite",))
    # The k-th largest of n draws has tail index k * (marginal tail index).
    heavy = k * _min_tail(prior) <= 2.0
    quad_ok = kind in ("WEL", "VCG")
    method = _resolve(cfg, heavy, quad_ok, kind)
    flags = (INFINITE_VARIANCE,) if heavy else ()
    if method == "quadrature":
        cache: dict = {}
        total = 0.0
        for mg in prior.marginals:
            if mg not in cache:
                cache[mg] = expected_order_stat(mg, k, n)
            total += cache[mg]
        return Estimate.exact(total, method="quadrature", seed=cfg.seed, flags=flags)

    if kind in ("WEL", "VCG"):
        def stat(rng, size):
            s1, s2 = top_two_survivals(rng, n, (size, m))
            return _isf_columns(prior, s1 if k == 1 else s2).sum(axis=1)

        return monte_carlo(stat, cfg, cost=2 * m, robust=heavy, flags=flags)

    def stat(rng, size):
        sums = prior.sample(rng, (size, n)).sum(axis=2)
        return np.partition(sums, n - 2, axis=1)[:, n - 2]

    return monte_carlo(stat, cfg, cost=n * m, robust=heavy, flags=flags)


# -- SRev --------------------------------------------------------------------


def _positive_virtual(mg: Marginal):
    def h(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(invalid="ignore"):
            phi = v - mg.inverse_hazard(v)
        return np.where(np.isfinite(v), np.maximum(phi, 0.0), 0.0)

    return h


def eval_srev(prior, bidders: int, cfg: SampleConfig) -> Estimate:
    """Separate Myerson auctions, one per item.

    With a single bidder this is the sum of monopoly revenues. With more
    bidders it is E[sum_j max(max_i phi_j(v_ij), 0)] plus, for tails as heavy
    as 1/v, the contribution n * lim_{s->0} R_j(s) of the top quantile that
    the virtual surplus misses.
    """
    prior = _as_prior(prior)
    n = _check_bidders(bidders)
    if n == 1:
        for mg in prior.marginals:
            if mg.has_density and not is_regular(mg):
                raise ValueError(f"SRev: non-regular marginal {mg!r}")
        total = math.fsum(monopoly(mg)[1] for mg in prior.marginals)
        return Estimate.exact(total, seed=cfg.seed)
    _check_regular(prior, "SRev")
    boundary = n * math.fsum(mg.tail_revenue for mg in prior.marginals)
    # phi+ grows like alpha*v, so the statistic inherits the value tail.
    heavy = any(mg.tail_index <= 2.0 and mg.tail_revenue == 0.0 for mg in prior.marginals)
    method = _resolve(cfg, heavy, True, "SRev")
    flags = (INFINITE_VARIANCE,) if heavy else ()
    if method == "quadrature":
        total = math.fsum(
            expected_order_stat_quadrature(mg, 1, n, transform=_positive_virtual(mg))
            for mg in prior.marginals
        )
        return Estimate.exact(total + boundary, method="quadrature", seed=cfg.seed, flags=flags)
    m = prior.m
    phis = [_positive_virtual(mg) for mg in prior.marginals]

    def stat(rng, size):
        s1, _ = top_two_survivals(rng, n, (size, m))
        v = _isf_columns(prior, s1)
        out = np.zeros(size)
        for j, h in enumerate(phis):
            out += h(v[:, j])
        return out

    return monte_carlo(stat, cfg, cost=2 * m, robust=heavy, flags=flags).shifted(boundary)


# -- BRev ----------------------------------------------------------------------


def _bundle_sums(prior: ProductPrior, rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    batch = max(1, (1 << 22) // (n * prior.m))
    parts = []
    done = 0
    while done < size:
        b = min(batch, size - done)
        parts.append(prior.sample(rng, (b, n)).sum(axis=2))
        done += b
    return np.concatenate(parts, axis=0)


def _best_posted_price(sums: np.ndarray) -> tuple[float, float]:
    """Empirically optimal price among sample points with >= sqrt(N) sales."""
    x = np.sort(sums)[::-1]
    N = x.size
    k_min = max(1, int(math.isqrt(N)))
    sales = np.arange(1, N + 1)
    rev = x * sales / N
    rev[: k_min - 1] = -np.inf
    i = int(np.argmax(rev))
    return float(x[i]), float(rev[i])


def _best_reserve(sums: np.ndarray) -> float:
    """Reserve maximizing empirical second-price-with-reserve revenue."""
    n = sums.shape[1]
    top2 = np.sort(np.partition(sums, n - 2, axis=1)[:, n - 2:], axis=1)
    second, first = top2[:, 0], top2[:, 1]
    cands = np.unique(np.concatenate([[0.0], np.quantile(sums[:, 0], np.linspace(0.0, 0.995, 400))]))
    best_r, best_rev = 0.0, -np.inf
    for r in cands:
        rev = float(np.mean(np.where(first >= r, np.maximum(second, r), 0.0)))
        if rev > best_rev:
            best_r, best_rev = float(r), rev
    return best_r


def posted_bundle_revenue(prior, price: float, cfg: SampleConfig) -> Estimate:
    """E[price * 1{sum_j v_j >= price}] for a single bidder."""
    prior = _as_prior(prior)
    price = float(price)
    if not price >= 0.0:
        raise ValueError(f"price out of range (>= 0): {price}")

    def stat(rng, size):
        return price * (prior.sample(rng, (size,)).sum(axis=1) >= price)

    est = monte_carlo(stat, cfg, cost=prior.m)
    return Estimate(est.mean, est.stderr, est.samples, est.seed, est.method, est.flags, {"price": price})


def eval_brev(prior, bidders: int, cfg: SampleConfig) -> Estimate:
    """Myerson auction for the grand bundle, fitted on one half, scored on the other.

    The training half (its own substream) picks a posted price for one
    bidder, or a reserve for a second-price auction with several. The
    evaluation half then estimates that mechanism's revenue, so the result is
    an unbiased estimate of a feasible mechanism's revenue.
    """
    prior = _as_prior(prior)
    n = _check_bidders(bidders)
    n_train = max(cfg.samples // 2, 1)
    n_eval = max(cfg.samples - n_train, 1)
    train_rng = cfg.chunk_rng(cfg.chunks)
    sums = _bundle_sums(prior, train_rng, n_train, n)
    eval_cfg = cfg.with_samples(n_eval)
    if n == 1:
        price, _ = _best_posted_price(sums[:, 0])
        est = posted_bundle_revenue(prior, price, eval_cfg)
        return Estimate(est.mean, est.stderr, est.samples, cfg.seed, est.method, est.flags,
                        {"price": price, "train_samples": n_train})
    reserve = _best_reserve(sums)
    heavy = 2.0 * _min_tail(prior) <= 2.0
    flags = (INFINITE_VARIANCE,) if heavy else ()

    def stat(rng, size):
        s = prior.sample(rng, (size, n)).sum(axis=2)
        top2 = np.sort(np.partition(s, n - 2, axis=1)[:, n - 2:], axis=1)
        return np.where(top2[:, 1] >= reserve, np.maximum(top2[:, 0], reserve), 0.0)

    est = monte_carlo(stat, eval_cfg, cost=n * prior.m, robust=heavy, flags=flags)
    return Estimate(est.mean, est.stderr, est.samples, cfg.seed, est.method, est.flags,
                    {"reserve": reserve, "train_samples": n_train})


# -- CDW -----------------------------------------------------------------------


def eval_cdw(prior, bidders: int, cfg: SampleConfig) -> Estimate:
    """Quantile-based duality upper bound on optimal revenue.

    For each bidder the item with the highest quantile contributes its
    positive virtual value and every other item its raw value; each item
    then takes the max over bidders. Families whose revenue curve does not
    vanish at s -> 0 (tails like 1/v) carry an extra n * R_j(0+) per item
    from the top quantile, which the pointwise virtual value misses.
    """
    prior = _as_prior(prior)
    n = _check_bidders(bidders)
    _check_regular(prior, "CDW")
    m = prior.m
    if m == 1 and n == 1:
        return Estimate.exact(monopoly(prior.marginals[0])[1], seed=cfg.seed)
    boundary = n * math.fsum(mg.tail_revenue for mg in prior.marginals)
    if m == 1:
        # Single item: the benchmark is the Myerson revenue itself.
        return eval_srev(prior, n, cfg)
    heavy = _min_tail(prior) <= 2.0
    flags = (INFINITE_VARIANCE,) if heavy else ()
    phis = [_positive_virtual(mg) for mg in prior.marginals]

    def stat(rng, size):
        s = 1.0 - rng.random((size, n, m))
        v = _isf_columns(prior, s)
        top = np.argmin(s, axis=2)[..., None] == np.arange(m)
        contrib = v.copy()
        for j, h in enumerate(phis):
            col = top[..., j]
            contrib[..., j] = np.where(col, h(v[..., j]), v[..., j])
        return contrib.max(axis=1).sum(axis=1)

    return monte_carlo(stat, cfg, cost=3 * n * m, robust=heavy, flags=flags).shifted(boundary)


# -- CORE ----------------------------------------------------------------------


def eval_core(prior, cfg: SampleConfig, variant: str = "truncated") -> Estimate:
    """Value below the threshold t = SRev_1 for a single bidder.

    ``truncated``: E[sum_j v_j 1{v_j <= t}].
    ``conditional``: E[sum_j v_j | v_j <= t for all j], sampled exactly by
    drawing each item from its distribution conditioned on v_j <= t.
    """
    prior = _as_prior(prior)
    if variant not in ("truncated", "conditional"):
        raise ValueError(f"variant must be truncated or conditional: {variant!r}")
    t = eval_srev(prior, 1, cfg).mean
    m = prior.m
    if variant == "truncated":
        def stat(rng, size):
            v = prior.sample(rng, (size,))
            return np.where(v <= t, v, 0.0).sum(axis=1)

        est = monte_carlo(stat, cfg, cost=m)
    else:
        mass = np.array([float(mg.cdf(t)) for mg in prior.marginals])
        if np.any(mass <= 0.0):
            raise ValueError(f"degenerate core: P(v_j <= {t:g}) = 0 for some item")

        def stat(rng, size):
            # F^{-1}(U F(t)) is exactly distributed as v | v <= t
            q = rng.random((size, m)) * mass
            return _isf_columns(prior, 1.0 - q).sum(axis=1)

        est = monte_carlo(stat, cfg, cost=m)
    return Estimate(est.mean, est.stderr, est.samples, est.seed, est.method, est.flags,
                    {"threshold": t, "variant": variant})


# -- two-part tariff -------------------------------------------------------------


def two_part_tariff(prior, bidders: int, epsilon: float, cfg: SampleConfig) -> Estimate:
    """Entry fee m (z_n / n - eps)^+ plus per-item second price among entrants.

    z_n = F_{1:n} - F_{2:n} is a bidder's expected per-item surplus times n
    in the VCG auction. A bidder enters iff its realized VCG surplus
    sum_j (v_ij - max_{i' != i} v_i'j)^+ covers the fee. The estimate is
    total revenue; ``details`` carries the fee and the mean entry rate.
    """
    prior = _as_prior(prior)
    n = _check_bidders(bidders)
    epsilon = float(epsilon)
    if not epsilon > 0.0:
        raise ValueError(f"epsilon out of range (> 0): {epsilon}")
    if not prior.is_iid:
        raise ValueError("two-part tariff needs identical marginals across items")
    mg = prior.marginals[0]
    m = prior.m
    z = expected_order_stat(mg, 1, n) - expected_order_stat(mg, 2, n)
    if not math.isfinite(z):
        raise ValueError("two-part tariff: expected surplus z_n is infinite")
    fee = max(0.0, m * (z / n - epsilon))
    heavy = mg.tail_index <= 2.0
    flags = (INFINITE_VARIANCE,) if heavy else ()

    def stat(rng, size):
        v = prior.sample(rng, (size, n))  # (size, n, m)
        if n == 1:
            surplus = v.sum(axis=2)
        else:
            top2 = np.partition(v, n - 2, axis=1)[:, n - 2:, :]
            gap = top2.max(axis=1) - top2.min(axis=1)
            winner = np.argmax(v, axis=1)  # (size, m)
            surplus = np.stack([np.where(winner == i, gap, 0.0).sum(axis=1) for i in range(n)], axis=1)
        enter = surplus >= fee
        revenue = fee * enter.sum(axis=1)
        if n >= 2:
            masked = np.where(enter[:, :, None], v, -np.inf)
            second = np.partition(masked, n - 2, axis=1)[:, n - 2, :]
            revenue = revenue + np.where(np.isfinite(second), second, 0.0).sum(axis=1)
        return np.column_stack([revenue, enter.mean(axis=1)])

    est = monte_carlo(stat, cfg, cost=3 * n * m, robust=heavy, flags=flags, names=("entry_rate",))
    details = {"fee": fee, "z_n": z, "epsilon": epsilon, **est.details}
    return Estimate(est.mean, est.stderr, est.samples, est.seed, est.method, est.flags, details)


# -- bundling gap ----------------------------------------------------------------


@dataclass(frozen=True)
class BundlingGap:
    bspa_per_item: Estimate
    wel_per_item: Estimate


def bundling_gap_experiment(m: int, base_bidders: int, extra_bidders: int, cfg: SampleConfig) -> BundlingGap:
    """BSPA with base+extra bidders vs WEL with base bidders, on Uniform(0,1)^m."""
    from .distributions import Uniform

    if int(base_bidders) != base_bidders or base_bidders < 2:
        raise ValueError(f"base_bidders out of range (>= 2): {base_bidders}")
    if int(extra_bidders) != extra_bidders or extra_bidders < 0:
        raise ValueError(f"extra_bidders out of range (>= 0): {extra_bidders}")
    prior = ProductPrior.iid(Uniform(0.0, 1.0), m)
    mc = SampleConfig(cfg.seed, cfg.samples, cfg.chunks, "monte_carlo", cfg.workers)
    bspa = eval_simple("BSPA", prior, base_bidders + extra_bidders, mc.derive("bspa"))
    wel = eval_simple("WEL", prior, base_bidders, mc.derive("wel"))
    return BundlingGap(bspa.scaled(1.0 / m), wel.scaled(1.0 / m))


# -- MHR closure diagnostic ----------------------------------------------------------


def bundle_hazard_profile(prior, cfg: SampleConfig, bins: int = 40, upper_quantile: float = 0.99):
    """Histogram hazard of the bundle sum for one bidder.

    Returns (edges, hazard, stderr): hazard_b = d_b / (r_b * width) with d_b
    the count in bin b and r_b the count at or above its left edge; the
    standard error is the binomial one of d_b / r_b.
    """
    prior = _as_prior(prior)
    sizes = cfg.chunk_sizes()
    sums = np.concatenate(
        [_bundle_sums(prior, cfg.chunk_rng(c), s, 1)[:, 0] for c, s in enumerate(sizes)]
    )
    hi = float(np.quantile(sums, upper_quantile))
    lo = float(sums.min())
    edges = np.linspace(lo, hi, bins + 1)
    width = edges[1] - edges[0]
    counts, _ = np.histogram(sums, bins=edges)
    at_risk = np.array([(sums >= e).sum() for e in edges[:-1]], dtype=float)
    p = counts / at_risk
    hazard = p / width
    stderr = np.sqrt(p * (1.0 - p) / at_risk) / width
    return edges, hazard, stderr
