"""Reproducible chunked Monte Carlo.

Samples are split into ``chunks`` independent substreams, each seeded from
``SeedSequence(seed, spawn_key=(chunk,))``. Chunk results are merged in
chunk order, so the output does not depend on how many threads ran them.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = ["SampleConfig", "Estimate", "monte_carlo", "derive_seed", "MOM_GROUPS"]

METHODS = ("monte_carlo", "quadrature", "closed_form")
MOM_GROUPS = 32
# Upper bound on array elements materialised per batch.
_BATCH_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class SampleConfig:
    """Sampling budget and seed.

    ``method`` selects between Monte Carlo and quadrature where an evaluator
    offers both; ``auto`` uses quadrature only when the Monte Carlo
    statistic has infinite variance.
    """

    seed: int = 0
    samples: int = 100_000
    chunks: int = 8
    method: str = "auto"
    workers: int = 1

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed out of range (64-bit unsigned): {self.seed}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError(f"samples out of range (>= 1): {self.samples}")
        if int(self.chunks) != self.chunks or self.chunks < 1:
            raise ValueError(f"chunks out of range (>= 1): {self.chunks}")
        if self.method not in ("auto", "monte_carlo", "quadrature"):
            raise ValueError(f"method must be auto, monte_carlo or quadrature: {self.method!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers out of range (>= 1): {self.workers}")

    def chunk_rng(self, chunk: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(int(self.seed), spawn_key=(int(chunk),)))

    def chunk_sizes(self) -> list[int]:
        chunks = min(self.chunks, self.samples)
        base, extra = divmod(self.samples, chunks)
        return [base + (1 if c < extra else 0) for c in range(chunks)]

    def derive(self, *labels) -> "SampleConfig":
        """Same budget, seed derived from this seed and ``labels``."""
        return replace(self, seed=derive_seed(self.seed, *labels))

    def with_samples(self, samples: int) -> "SampleConfig":
        return replace(self, samples=int(samples))


def derive_seed(seed: int, *labels) -> int:
    """Stable 64-bit child seed from a parent seed and string/int labels."""
    key = tuple(zlib.crc32(str(lab).encode()) for lab in labels)
    state = np.random.SeedSequence(int(seed), spawn_key=key).generate_state(2, np.uint32)
    return (int(state[0]) << 32) | int(state[1])


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    method: str
    flags: tuple[str, ...] = ()
    details: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}: {self.method!r}")
        if not self.stderr >= 0.0:
            raise ValueError(f"stderr must be >= 0: {self.stderr}")
        object.__setattr__(self, "flags", tuple(self.flags))

    @classmethod
    def exact(cls, value: float, method: str = "closed_form", seed: int = 0, flags=(), **details):
        return cls(float(value), 0.0, 0, seed, method, tuple(flags), details)

    def scaled(self, factor: float) -> "Estimate":
        return replace(self, mean=self.mean * factor, stderr=self.stderr * abs(factor))

    def shifted(self, offset: float) -> "Estimate":
        return replace(self, mean=self.mean + offset)

    def lower(self, z: float = 4.0) -> float:
        return self.mean - z * self.stderr

    def upper(self, z: float = 4.0) -> float:
        return self.mean + z * self.stderr


@dataclass
class _Moments:
    n: int
    mean: np.ndarray
    m2: np.ndarray

    def merge(self, other: "_Moments") -> "_Moments":
        if self.n == 0:
            return other
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.n * other.n / n)
        return _Moments(n, mean, m2)


Statistic = Callable[[np.random.Generator, int], np.ndarray]


def _run_chunk(statistic: Statistic, cfg: SampleConfig, chunk: int, size: int, offset: int,
               cost: int, groups: int):
    rng = cfg.chunk_rng(chunk)
    batch = max(1, _BATCH_ELEMENTS // max(1, cost))
    acc: _Moments | None = None
    gsum = np.zeros(groups)
    done = 0
    while done < size:
        b = min(batch, size - done)
        x = np.asarray(statistic(rng, b), dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        mom = _Moments(b, x.mean(axis=0), ((x - x.mean(axis=0)) ** 2).sum(axis=0))
        acc = mom if acc is None else acc.merge(mom)
        idx = (offset + done + np.arange(b)) * groups // cfg.samples
        gsum += np.bincount(idx, weights=x[:, 0], minlength=groups)
        done += b
    return acc, gsum


def monte_carlo(statistic: Statistic, cfg: SampleConfig, *, cost: int = 1, robust: bool = False,
                flags: Sequence[str] = (), names: Sequence[str] = ()) -> Estimate:
    """Estimate E[statistic] from ``cfg.samples`` draws.

    ``statistic(rng, size)`` returns ``size`` i.i.d. values, or a
    ``(size, k)`` array whose first column is the target and whose other
    columns are auxiliary means reported under ``names`` in ``details``.
    ``cost`` is the number of array elements one draw touches. With
    ``robust`` the mean and standard error come from median-of-means over
    ``MOM_GROUPS`` contiguous groups.
    """
    sizes = cfg.chunk_sizes()
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    groups = min(MOM_GROUPS, cfg.samples) if robust else 1
    jobs = [(statistic, cfg, c, s, int(o), cost, groups) for c, (s, o) in enumerate(zip(sizes, offsets))]
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda a: _run_chunk(*a), jobs))
    else:
        parts = [_run_chunk(*a) for a in jobs]
    acc = parts[0][0]
    gsum = parts[0][1].copy()
    for mom, g in parts[1:]:
        acc = acc.merge(mom)
        gsum += g
    n = acc.n
    details = {name: float(acc.mean[i + 1]) for i, name in enumerate(names)}
    if robust and groups >= 2:
        counts = np.bincount(np.arange(n) * groups // n, minlength=groups)
        gmeans = gsum / counts
        mean = float(np.median(gmeans))
        stderr = float(math.sqrt(math.pi / 2.0) * np.std(gmeans, ddof=1) / math.sqrt(groups))
        flags = tuple(flags) + ("median_of_means",)
    else:
        mean = float(acc.mean[0])
        var = float(acc.m2[0]) / (n - 1) if n > 1 else 0.0
        stderr = math.sqrt(max(var, 0.0) / n)
    return Estimate(mean, stderr, n, cfg.seed, "monte_carlo", tuple(flags), details)
