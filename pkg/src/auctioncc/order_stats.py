"""Expected order statistics and their quantile densities.

F_{k:n} is the expected k-th largest of n i.i.d. draws (k=1 is the maximum).
In quantile space F_{k:n} = int_0^1 xi_{k:n}(q) F^{-1}(q) dq, where xi_{k:n}
is the Beta(n-k+1, k) density.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize, special, stats

from .distributions import (
    EqualRevenue,
    Exponential,
    GeneralizedPareto,
    Marginal,
    ShiftedExponential,
    TwoPoint,
    Uniform,
    make_marginal,
)

__all__ = [
    "OrderStatQuery",
    "CrossingPair",
    "order_stat_density",
    "expected_order_stat",
    "expected_order_stat_quadrature",
    "harmonic",
    "three_interval_crossings",
]


class OrderStatQuery(NamedTuple):
    marginal: Marginal
    k: int
    n: int


class CrossingPair(NamedTuple):
    q_dagger: float
    q_ddagger: float


def _check_rank(k: int, n: int) -> None:
    if int(k) != k or int(n) != n:
        raise ValueError(f"rank out of range: k={k}, n={n} must be integers")
    if n < 1 or k < 1 or k > n:
        raise ValueError(f"rank out of range: need 1 <= k <= n, got k={k}, n={n}")


def _log_coef(k: int, n: int) -> float:
    # log of n! / ((k-1)! (n-k)!)
    return math.lgamma(n + 1) - math.lgamma(k) - math.lgamma(n - k + 1)


def order_stat_density(k: int, n: int, q):
    """xi_{k:n}(q) = n!/((k-1)!(n-k)!) (1-q)^(k-1) q^(n-k)."""
    _check_rank(k, n)
    q_arr = np.asarray(q, dtype=float)
    if np.any((q_arr < 0.0) | (q_arr > 1.0)):
        raise ValueError("order_stat_density: q outside [0, 1]")
    out = stats.beta.pdf(q_arr, n - k + 1, k)
    return float(out) if out.ndim == 0 else out


def harmonic(n: int) -> float:
    """H_n by direct summation (exact enough for n up to ~1e7)."""
    return math.fsum(1.0 / i for i in range(1, n + 1))


def _divergent(marginal: Marginal, k: int) -> bool:
    return k == 1 and marginal.tail_index <= 1.0


def expected_order_stat_quadrature(marginal: Marginal, k: int, n: int, tol: float = 1e-11,
                                   transform=None) -> float:
    """Adaptive quadrature of xi_{k:n}(q) F^{-1}(q) over [0, 1].

    With ``transform`` the integrand is xi_{k:n}(q) h(F^{-1}(q)) instead,
    i.e. the expectation of h applied to the k-th largest draw.

    The lower half [0, 1/2] is integrated directly. The upper half, where
    F^{-1} may blow up, is mapped through q = 1 - e^{-t} so the integrand
    decays like a power of e^{-t} on [log 2, inf).
    """
    marginal = make_marginal(marginal)
    _check_rank(k, n)
    if isinstance(marginal, TwoPoint):
        raise ValueError("TwoPoint: no density (atoms only); use expected_order_stat")
    if transform is None:
        if _divergent(marginal, k):
            return math.inf
        value = lambda s: float(marginal.isf(s))
    else:
        value = lambda s: float(transform(marginal.isf(s)))
    lc = _log_coef(k, n)

    def lower(q):
        if q <= 0.0:
            return 0.0 if n > k else math.exp(lc) * value(1.0)
        lw = lc + (k - 1) * math.log1p(-q) + (n - k) * math.log(q)
        return math.exp(lw) * value(1.0 - q)

    def upper(t):
        # survival s = e^{-t}; dq = e^{-t} dt
        s = math.exp(-t)
        lw = lc + (k - 1) * (-t) + (n - k) * math.log1p(-s) - t
        w = math.exp(lw)
        if w == 0.0:
            return 0.0
        return w * value(s)

    opts = dict(epsabs=tol, epsrel=tol, limit=500)
    a, _ = integrate.quad(lower, 0.0, 0.5, **opts)
    # Break the tail at the bulk of the k-th order statistic so quad sees it.
    t_peak = max(math.log(2.0), math.log((n + 1.0) / k))
    breaks = sorted({math.log(2.0), t_peak, t_peak + 4.0, t_peak + 16.0, t_peak + 64.0})
    b = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        part, _ = integrate.quad(upper, lo, hi, **opts)
        b += part
    tail, _ = integrate.quad(upper, breaks[-1], math.inf, **opts)
    return a + b + tail


def expected_order_stat(marginal: Marginal, k: int, n: int, tol: float = 1e-11) -> float:
    """E[k-th largest of n i.i.d. draws]; ``math.inf`` if the integral diverges.

    F_{2:1} is defined as 0 (no competitor). Closed forms cover the
    exponential, uniform and two-point families; the rest use quadrature.
    """
    marginal = make_marginal(marginal)
    if k == 2 and n == 1:
        return 0.0
    _check_rank(k, n)
    if isinstance(marginal, (Exponential, ShiftedExponential)) or (
        isinstance(marginal, GeneralizedPareto) and marginal.alpha == 1.0
    ):
        rate = getattr(marginal, "rate", 1.0)
        shift = getattr(marginal, "shift", 0.0)
        return shift + math.fsum(1.0 / i for i in range(k, n + 1)) / rate
    if isinstance(marginal, Uniform):
        return marginal.lo + (marginal.hi - marginal.lo) * (n - k + 1) / (n + 1)
    if isinstance(marginal, TwoPoint):
        return marginal.high_value * float(stats.binom.sf(k - 1, n, marginal.high_prob))
    if isinstance(marginal, EqualRevenue) and k >= 2:
        # E = n!/((k-1)!(n-k)!) B(n-k+1, k-1): the survival integral in closed form
        return math.exp(_log_coef(k, n) + special.betaln(n - k + 1, k - 1))
    return expected_order_stat_quadrature(marginal, k, n, tol=tol)


def three_interval_crossings(n: int, N: int) -> CrossingPair:
    """Roots of xi_{2:N}(q) = xi_{1:n}(q), bracketing where xi_{2:N} dominates.

    Dividing by n q^{n-1} reduces the comparison to
    N(N-1)(1-q) q^{N-n-1} >= n, a single-peaked function of q.
    """
    if int(n) != n or int(N) != N or not (N > n >= 1):
        raise ValueError(f"need integers N > n >= 1, got n={n}, N={N}")
    d = N - n - 1
    c = N * (N - 1)

    def g(q):
        return c * (1.0 - q) * q**d - n

    if d == 0:
        # g is decreasing from c - n > 0 at q = 0
        return CrossingPair(0.0, 1.0 - n / c)
    peak = d / (d + 1.0)
    if g(peak) <= 0.0:
        return CrossingPair(peak, peak)
    lo = optimize.brentq(g, 0.0, peak, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    hi = optimize.brentq(g, peak, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return CrossingPair(float(lo), float(hi))
