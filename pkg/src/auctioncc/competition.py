"""The VCG competition-complexity constant C(n, alpha).

C(n, alpha) is the least integer C such that, for generalized Pareto values,
the second-highest of n + C draws beats the highest of n draws in
expectation. Via the GP identity F_{2:N} = alpha F_{1:N} - (1 - alpha) this
is alpha F_{1:n+C} - (1 - alpha) >= F_{1:n}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .distributions import GeneralizedPareto
from .order_stats import expected_order_stat

__all__ = ["CompetitionResult", "competition_constant", "competition_constant_bounds"]

# Near-ties are recomputed at a tighter quadrature tolerance and then
# resolved toward the larger constant.
_TIE_BAND = 1e-7
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class CompetitionResult:
    n: int
    alpha: float
    c: int
    f1n: float
    f1nc: float
    f2nc: float

    @property
    def certificate(self) -> tuple[float, float, float]:
        return (self.f1n, self.f1nc, self.f2nc)


def _validate(n: int, alpha: float) -> tuple[int, float]:
    if int(n) != n or n < 1:
        raise ValueError(f"n out of range (integer >= 1): {n}")
    alpha = float(alpha)
    if alpha <= 0.0:
        raise ValueError("alpha <= 0: regular case has unbounded constant")
    if alpha > 1.0:
        raise ValueError(f"alpha out of range (0, 1]: {alpha}")
    return int(n), alpha


def competition_constant_bounds(n: int, alpha: float) -> tuple[float, float]:
    """(exclusive lower, inclusive upper) bounds on C(n, alpha)."""
    n, alpha = _validate(n, alpha)
    return (max(1.0 / alpha - 1.0, 1.0) * n, 11.0 * n / alpha)


def _harmonic_constant(n: int) -> CompetitionResult:
    gap = 0.0  # H_{n+c} - H_n
    c = 0
    while True:
        c += 1
        gap += 1.0 / (n + c)
        if gap >= 1.0 + 1e-12:
            break
        if gap > 1.0 - 1e-9:
            # Float sum too close to call; settle it exactly.
            exact = sum((Fraction(1, n + i) for i in range(1, c + 1)), Fraction(0))
            if exact >= 1:
                break
    h_n = math.fsum(1.0 / i for i in range(1, n + 1))
    h_nc = h_n + math.fsum(1.0 / (n + i) for i in range(1, c + 1))
    return CompetitionResult(n=n, alpha=1.0, c=c, f1n=h_n, f1nc=h_nc, f2nc=h_nc - 1.0)


def _gp_constant(n: int, alpha: float) -> CompetitionResult:
    gp = GeneralizedPareto(alpha)
    f1n = expected_order_stat(gp, 1, n)
    cache: dict[int, float] = {}

    def f1(N: int, tol: float = 1e-11) -> float:
        if tol < 1e-11 or N not in cache:
            cache[N] = expected_order_stat(gp, 1, N, tol=tol)
        return cache[N]

    def holds(c: int) -> bool:
        gap = alpha * f1(n + c) - (1.0 - alpha) - f1n
        if abs(gap) < _TIE_BAND:
            tight_f1n = expected_order_stat(gp, 1, n, tol=1e-13)
            gap = alpha * f1(n + c, tol=1e-13) - (1.0 - alpha) - tight_f1n
            return gap > _TIE_TOL
        return gap > 0.0

    # F_{1:N} is increasing in N, so the predicate is monotone in c.
    hi = 1
    while not holds(hi):
        hi *= 2
    lo = hi // 2  # fails (or is 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    f1nc = f1(n + hi)
    return CompetitionResult(
        n=n, alpha=alpha, c=hi, f1n=f1n, f1nc=f1nc, f2nc=alpha * f1nc - (1.0 - alpha)
    )


def competition_constant(n: int, alpha: float) -> CompetitionResult:
    """Smallest C with F_{2:n+C} >= F_{1:n} under GeneralizedPareto(alpha)."""
    n, alpha = _validate(n, alpha)
    if alpha == 1.0:
        return _harmonic_constant(n)
    return _gp_constant(n, alpha)
