"""Parametric value distributions and single-item revenue machinery.

Every family works in quantile space. ``isf(s)`` returns the value whose
survival probability is ``s`` and is the primitive all samplers and
quadratures are built on, since it stays accurate deep in heavy tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize

__all__ = [
    "Marginal",
    "Exponential",
    "ShiftedExponential",
    "GeneralizedPareto",
    "EqualRevenue",
    "Uniform",
    "TwoPoint",
    "ProductPrior",
    "RevenueCurvePoint",
    "make_marginal",
    "quantile",
    "virtual_value",
    "strong_regularity_coefficient",
    "gamma_alpha",
    "monopoly",
    "two_point_auxiliary",
    "is_regular",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Marginal:
    """Base class for one-dimensional value distributions.

    Subclasses implement ``sf``, ``isf``, ``pdf`` and ``support``; everything
    else is derived here. Instances are immutable.
    """

    family: str = ""
    has_density: bool = True
    # Tail index of the survival function (P(V > v) ~ v^-tail_index);
    # infinite for light or bounded tails.
    tail_index: float = math.inf

    # -- interface --------------------------------------------------------
    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def sf(self, v):
        raise NotImplementedError

    def isf(self, s):
        raise NotImplementedError

    def pdf(self, v):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    # -- derived ------------------------------------------------------------
    def cdf(self, v):
        return 1.0 - self.sf(v)

    def quantile(self, q):
        """Smallest v with F(v) >= q."""
        q_arr = np.asarray(q, dtype=float)
        if np.any((q_arr < 0.0) | (q_arr > 1.0)) or np.any(np.isnan(q_arr)):
            raise ValueError("quantile: q outside [0, 1]")
        if math.isinf(self.support[1]) and np.any(q_arr == 1.0):
            raise ValueError("infinite quantile: q=1 on unbounded support")
        out = self.isf(1.0 - q_arr)
        return float(out) if np.ndim(out) == 0 else out

    def inverse_hazard(self, v):
        """(1 - F(v)) / f(v)."""
        v = np.asarray(v, dtype=float)
        return self.sf(v) / self.pdf(v)

    def revenue_curve(self, s):
        """R(s) = s * F^{-1}(1 - s): revenue from selling with probability s."""
        s = np.asarray(s, dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            r = np.where(s > 0.0, s * self.isf(np.where(s > 0.0, s, 1.0)), 0.0)
        return float(r) if r.ndim == 0 else r

    @property
    def tail_revenue(self) -> float:
        """lim_{s -> 0} R(s); nonzero only for tails as heavy as 1/v."""
        return 0.0

    @property
    def mean(self) -> float:
        if self.tail_index <= 1.0:
            return math.inf
        from .order_stats import expected_order_stat

        return expected_order_stat(self, 1, 1)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        # 1 - random() lies in (0, 1], so isf never sees 0.
        return self.isf(1.0 - rng.random(size))

    def to_spec(self) -> dict:
        return {"family": self.family, "params": self.params()}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


def _check_positive(name: str, field: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0) or math.isinf(value):
        raise ValueError(f"{name}: {field} out of range (must be > 0): {value}")
    return value


@dataclass(frozen=True, repr=False)
class Exponential(Marginal):
    rate: float = 1.0

    family = "Exponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _check_positive("Exponential", "rate", self.rate))

    @property
    def support(self):
        return (0.0, math.inf)

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 0.0, 1.0, np.exp(-self.rate * np.maximum(v, 0.0)))

    def isf(self, s):
        return -np.log(s) / self.rate

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 0.0, 0.0, self.rate * np.exp(-self.rate * np.maximum(v, 0.0)))

    def inverse_hazard(self, v):
        v = np.asarray(v, dtype=float)
        return np.full_like(v, 1.0 / self.rate)

    @property
    def mean(self):
        return 1.0 / self.rate

    def params(self):
        return {"rate": self.rate}


@dataclass(frozen=True, repr=False)
class ShiftedExponential(Marginal):
    rate: float = 1.0
    shift: float = 0.0

    family = "ShiftedExponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _check_positive("ShiftedExponential", "rate", self.rate))
        shift = float(self.shift)
        if not math.isfinite(shift):
            raise ValueError(f"ShiftedExponential: shift out of range: {shift}")
        object.__setattr__(self, "shift", shift)

    @property
    def support(self):
        return (self.shift, math.inf)

    def sf(self, v):
        x = np.asarray(v, dtype=float) - self.shift
        return np.where(x < 0.0, 1.0, np.exp(-self.rate * np.maximum(x, 0.0)))

    def isf(self, s):
        return self.shift - np.log(s) / self.rate

    def pdf(self, v):
        x = np.asarray(v, dtype=float) - self.shift
        return np.where(x < 0.0, 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)))

    def inverse_hazard(self, v):
        v = np.asarray(v, dtype=float)
        return np.full_like(v, 1.0 / self.rate)

    @property
    def mean(self):
        return self.shift + 1.0 / self.rate

    def params(self):
        return {"rate": self.rate, "shift": self.shift}


@dataclass(frozen=True, repr=False)
class GeneralizedPareto(Marginal):
    """Survival (1+v)^(-1/(1-alpha)) on [0, inf); alpha=1 is Exponential(1).

    This is the extremal alpha-strongly regular family: for alpha < 1 its
    virtual value is exactly alpha*v - (1 - alpha). alpha=1 is taken as the
    exponential limit (phi = v - 1), not the pointwise limit of the formula.
    """

    alpha: float = 0.5

    family = "GeneralizedPareto"

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 <= a <= 1.0):
            raise ValueError(f"GeneralizedPareto: alpha out of range [0, 1]: {a}")
        object.__setattr__(self, "alpha", a)

    @property
    def tail_index(self):  # type: ignore[override]
        return math.inf if self.alpha == 1.0 else 1.0 / (1.0 - self.alpha)

    @property
    def support(self):
        return (0.0, math.inf)

    def sf(self, v):
        v = np.maximum(np.asarray(v, dtype=float), 0.0)
        if self.alpha == 1.0:
            return np.exp(-v)
        return (1.0 + v) ** (-1.0 / (1.0 - self.alpha))

    def isf(self, s):
        s = np.asarray(s, dtype=float)
        if self.alpha == 1.0:
            return -np.log(s)
        # expm1 keeps small values accurate when s is close to 1.
        with np.errstate(divide="ignore", over="ignore"):
            return np.expm1(-(1.0 - self.alpha) * np.log(s))

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        vv = np.maximum(v, 0.0)
        if self.alpha == 1.0:
            d = np.exp(-vv)
        else:
            k = 1.0 / (1.0 - self.alpha)
            d = k * (1.0 + vv) ** (-k - 1.0)
        return np.where(v < 0.0, 0.0, d)

    def inverse_hazard(self, v):
        v = np.asarray(v, dtype=float)
        return (1.0 + v) * (1.0 - self.alpha) if self.alpha < 1.0 else np.ones_like(v)

    @property
    def tail_revenue(self):
        return 1.0 if self.alpha == 0.0 else 0.0

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True, repr=False)
class EqualRevenue(Marginal):
    """CDF 1 - 1/v on [1, inf); every posted price earns exactly 1."""

    family = "EqualRevenue"
    tail_index = 1.0

    @property
    def support(self):
        return (1.0, math.inf)

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(v < 1.0, 1.0, 1.0 / np.maximum(v, 1.0))

    def isf(self, s):
        with np.errstate(divide="ignore"):
            return 1.0 / np.asarray(s, dtype=float)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 1.0, 0.0, 1.0 / np.maximum(v, 1.0) ** 2)

    def inverse_hazard(self, v):
        return np.asarray(v, dtype=float).copy()

    def revenue_curve(self, s):
        s = np.asarray(s, dtype=float)
        r = np.where(s > 0.0, 1.0, 0.0)
        return float(r) if r.ndim == 0 else r

    @property
    def tail_revenue(self):
        return 1.0

    def params(self):
        return {}


@dataclass(frozen=True, repr=False)
class Uniform(Marginal):
    lo: float = 0.0
    hi: float = 1.0

    family = "Uniform"

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise ValueError(f"Uniform: lo/hi out of range (need finite lo < hi): {lo}, {hi}")
        if lo < 0.0:
            raise ValueError(f"Uniform: lo out of range (values are nonnegative): {lo}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def support(self):
        return (self.lo, self.hi)

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        return np.clip((self.hi - v) / (self.hi - self.lo), 0.0, 1.0)

    def isf(self, s):
        return self.hi - np.asarray(s, dtype=float) * (self.hi - self.lo)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v >= self.lo) & (v <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def inverse_hazard(self, v):
        return self.hi - np.asarray(v, dtype=float)

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def params(self):
        return {"lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, repr=False)
class TwoPoint(Marginal):
    """Atoms at 0 (probability 1-p) and ``high_value`` (probability p)."""

    high_value: float = 1.0
    high_prob: float = 0.5

    family = "TwoPoint"
    has_density = False

    def __post_init__(self):
        h = float(self.high_value)
        if not (h >= 0.0) or math.isinf(h):
            raise ValueError(f"TwoPoint: high_value out of range (finite, >= 0): {h}")
        p = float(self.high_prob)
        if not (0.0 < p <= 1.0):
            raise ValueError(f"TwoPoint: high_prob out of range (0, 1]: {p}")
        object.__setattr__(self, "high_value", h)
        object.__setattr__(self, "high_prob", p)

    @property
    def support(self):
        return (0.0, self.high_value)

    def sf(self, v):
        # P(V > v)
        v = np.asarray(v, dtype=float)
        return np.where(v < 0.0, 1.0, np.where(v < self.high_value, self.high_prob, 0.0))

    def isf(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s < self.high_prob, self.high_value, 0.0)

    def pdf(self, v):
        raise ValueError("TwoPoint: no density (atoms only)")

    def inverse_hazard(self, v):
        raise ValueError("TwoPoint: no density (atoms only)")

    @property
    def mean(self):
        return self.high_value * self.high_prob

    def params(self):
        return {"high_value": self.high_value, "high_prob": self.high_prob}


_FAMILIES = {
    cls.family: cls
    for cls in (Exponential, ShiftedExponential, GeneralizedPareto, EqualRevenue, Uniform, TwoPoint)
}


def make_marginal(spec: Mapping[str, Any] | Marginal) -> Marginal:
    """Build a validated marginal from ``{"family": ..., "params": {...}}``."""
    if isinstance(spec, Marginal):
        return spec
    try:
        family = spec["family"]
    except (KeyError, TypeError):
        raise ValueError("family spec must be a mapping with a 'family' key") from None
    cls = _FAMILIES.get(family)
    if cls is None:
        raise ValueError(f"family: unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    params = dict(spec.get("params") or {})
    allowed = set(cls.__dataclass_fields__)
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"{family}: unknown parameter(s) {sorted(extra)}")
    return cls(**params)


@dataclass(frozen=True)
class RevenueCurvePoint:
    quantile: float
    revenue: float


@dataclass(frozen=True)
class ProductPrior:
    """Independent item values, one marginal per item."""

    marginals: tuple[Marginal, ...]

    def __post_init__(self):
        ms = tuple(make_marginal(x) for x in self.marginals)
        if len(ms) < 1:
            raise ValueError("ProductPrior: marginals must be non-empty (m >= 1)")
        object.__setattr__(self, "marginals", ms)

    @classmethod
    def iid(cls, marginal: Marginal | Mapping, m: int) -> "ProductPrior":
        if int(m) < 1:
            raise ValueError(f"ProductPrior: m out of range (m >= 1): {m}")
        return cls((make_marginal(marginal),) * int(m))

    @classmethod
    def from_spec(cls, spec: Mapping | Sequence) -> "ProductPrior":
        """Accept a list of family specs or ``{"marginal": spec, "m": m}``."""
        if isinstance(spec, Mapping):
            if "marginals" in spec:
                return cls(tuple(make_marginal(s) for s in spec["marginals"]))
            return cls.iid(make_marginal(spec["marginal"]), spec["m"])
        return cls(tuple(make_marginal(s) for s in spec))

    @property
    def m(self) -> int:
        return len(self.marginals)

    @property
    def is_iid(self) -> bool:
        return all(mg == self.marginals[0] for mg in self.marginals)

    def isf(self, s: np.ndarray) -> np.ndarray:
        """Apply each item's inverse survival along the last axis."""
        s = np.asarray(s, dtype=float)
        if self.is_iid:
            return self.marginals[0].isf(s)
        out = np.empty_like(s)
        for j, mg in enumerate(self.marginals):
            out[..., j] = mg.isf(s[..., j])
        return out

    def quantile(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        out = np.empty_like(q)
        for j, mg in enumerate(self.marginals):
            out[..., j] = mg.quantile(q[..., j])
        return out

    def sample(self, rng: np.random.Generator, shape: Iterable[int] = ()) -> np.ndarray:
        shape = tuple(shape) + (self.m,)
        return self.isf(1.0 - rng.random(shape))

    def to_spec(self) -> list[dict]:
        return [mg.to_spec() for mg in self.marginals]


def _as_marginal(m) -> Marginal:
    return make_marginal(m)


def quantile(m: Marginal, q):
    return _as_marginal(m).quantile(q)


def virtual_value(m: Marginal, v):
    """phi(v) = v - (1 - F(v)) / f(v)."""
    m = _as_marginal(m)
    if not m.has_density:
        raise ValueError(f"{m.family}: no density (atoms only)")
    v_arr = np.asarray(v, dtype=float)
    lo, hi = m.support
    if np.any(v_arr < lo) or np.any(v_arr > hi) or np.any(np.isnan(v_arr)):
        raise ValueError(f"{m.family}: hazard undefined (density zero outside support [{lo}, {hi}])")
    out = v_arr - m.inverse_hazard(v_arr)
    return float(out) if out.ndim == 0 else out


def _default_grid(m: Marginal, points: int = 512) -> np.ndarray:
    s = np.logspace(np.log10(0.999), -6.0, points)
    grid = np.unique(m.isf(s))
    return grid[np.isfinite(grid)]


def strong_regularity_coefficient(m: Marginal, grid: Sequence[float] | None = None) -> float:
    """Smallest slope of the virtual value between consecutive grid points."""
    m = _as_marginal(m)
    g = _default_grid(m) if grid is None else np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("grid: need at least 2 points")
    if np.any(np.diff(g) <= 0.0):
        raise ValueError("grid: points must be strictly increasing")
    phi = virtual_value(m, g)
    return float(np.min(np.diff(phi) / np.diff(g)))


def is_regular(m: Marginal, tol: float = 1e-9) -> bool:
    try:
        return strong_regularity_coefficient(m) >= -tol
    except ValueError:
        return False


def gamma_alpha(alpha: float, x, inverse: bool = False):
    """Tail envelope (1 + (1-alpha) v)^(-1/(1-alpha)), or e^-v at alpha=1."""
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha out of range [0, 1]: {alpha}")
    x_arr = np.asarray(x, dtype=float)
    if inverse:
        if np.any((x_arr <= 0.0) | (x_arr > 1.0)):
            raise ValueError("gamma_alpha inverse: x outside (0, 1]")
        if alpha == 1.0:
            out = -np.log(x_arr)
        else:
            out = np.expm1(-(1.0 - alpha) * np.log(x_arr)) / (1.0 - alpha)
    else:
        if np.any(x_arr < 0.0):
            raise ValueError("gamma_alpha: x must be >= 0")
        if alpha == 1.0:
            out = np.exp(-x_arr)
        else:
            out = np.exp(-np.log1p((1.0 - alpha) * x_arr) / (1.0 - alpha))
    return float(out) if out.ndim == 0 else out


def _golden_max(f, a: float, b: float, tol: float = 1e-13, max_iter: int = 200) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return c if fc >= fd else d


def monopoly(m: Marginal) -> tuple[float, float]:
    """Optimal posted price for a single buyer: (reserve, revenue).

    Maximizes R(s) = s * F^{-1}(1-s) over the sale probability s. A log grid
    locates the peak, golden-section search refines it. Ties go to the larger
    sale probability, i.e. the lower reserve.
    """
    m = _as_marginal(m)
    if isinstance(m, TwoPoint):
        return (m.high_value, m.high_value * m.high_prob)
    s = np.logspace(-12.0, 0.0, 241)
    r = m.revenue_curve(s)
    if not np.all(np.isfinite(r)):
        raise ValueError(f"{m.family}: revenue unbounded")
    i = len(r) - 1 - int(np.argmax(r[::-1]))
    a = s[max(i - 1, 0)]
    b = s[min(i + 1, len(s) - 1)]
    s_star = _golden_max(lambda x: float(m.revenue_curve(x)), a, b)
    best = float(m.revenue_curve(s_star))
    if r[i] >= best:
        s_star, best = float(s[i]), float(r[i])
    reserve = float(m.isf(s_star))
    # Golden section pins the flat peak only to ~sqrt(eps); where the virtual
    # value changes sign inside the bracket its root is the exact reserve.
    v_lo, v_hi = float(m.isf(b)), float(m.isf(a))
    if m.has_density and m.tail_revenue == 0.0 and np.isfinite(v_hi):
        phi = lambda v: float(v - m.inverse_hazard(v))
        if phi(v_lo) < 0.0 < phi(v_hi):
            reserve = optimize.brentq(phi, v_lo, v_hi, xtol=1e-15, rtol=1e-15)
            best = max(best, float(reserve * m.sf(reserve)))
    return reserve, best


def two_point_auxiliary(m: Marginal) -> TwoPoint:
    """Two-point distribution with atoms at 0 and OPT_1(F), each w.p. 1/2."""
    _, revenue = monopoly(m)
    return TwoPoint(high_value=revenue, high_prob=0.5)
