"""Monte Carlo sampling of the Poisson unit-disk graph and k-hop counting.

Random streams
--------------
All randomness comes from numpy's PCG64. The stream for sample batch ``b``
under seed ``s`` is ``PCG64(SeedSequence(entropy=s, spawn_key=(b,)))``.
Batches have a fixed size (:data:`BATCH_SIZE`), so the result of
:func:`run_simulation` depends only on ``(seed, n_samples)`` and not on the
number of worker threads.

Inside a batch, :func:`run_simulation` only draws the points that can carry a
path: by the restriction property of the Poisson process the points of cell
``j`` falling in its lens ``[jr - tau, jr]`` form a Poisson process of
intensity ``lambda_j`` on the lens. Positions are drawn as integers on a grid
of ``2**50`` steps per lens, which keeps the chain comparisons exact.
"""
from __future__ import annotations

import bisect
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .exactpoly import to_fraction

__all__ = [
    "SimConfig",
    "GraphSample",
    "SampleStats",
    "BATCH_SIZE",
    "stream",
    "sample_points",
    "count_khops_bruteforce",
    "count_khops_lens",
    "simulate_counts",
    "run_simulation",
    "write_samples",
]

BATCH_SIZE = 4096
KEY_BITS = 50
BRUTE_FORCE_LIMIT = 1000


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator number ``index`` derived from ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a simulation run.

    ``intensities`` is a scalar or a per-cell vector. A vector of length
    ``k - 1`` is extended to cell ``k`` with its last value; cell ``k`` never
    holds a path vertex, so this only affects :func:`sample_points`.
    """

    k: int
    r: Fraction
    t: Fraction
    intensities: tuple[float, ...]
    n_samples: int = 0
    seed: int = 0
    threads: int = 1

    def __init__(self, k, r=1, t=None, intensities=1.0, n_samples=0, seed=0, threads=1):
        k = int(k)
        if k < 2:
            raise ValueError("k must be at least 2")
        r = to_fraction(r)
        if r <= 0:
            raise ValueError("r must be positive")
        t = (k - 1) * r if t is None else to_fraction(t)
        if not (k - 1) * r <= t < k * r:
            raise ValueError(f"t must lie in [{(k - 1) * r}, {k * r}) for the lens regime")
        if isinstance(intensities, (int, float, Fraction, str)):
            lam = (float(to_fraction(intensities)),) * k
        else:
            lam = tuple(float(to_fraction(x)) for x in intensities)
            if len(lam) == k - 1:
                lam = lam + (lam[-1],)
            if len(lam) != k:
                raise ValueError(f"expected 1, {k - 1} or {k} intensities")
        if any(x < 0 or not math.isfinite(x) for x in lam):
            raise ValueError("intensities must be finite and nonnegative")
        if n_samples < 0:
            raise ValueError("n_samples must be nonnegative")
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "intensities", lam)
        object.__setattr__(self, "n_samples", int(n_samples))
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "threads", max(1, int(threads)))

    @property
    def tau(self) -> Fraction:
        return self.k * self.r - self.t


@dataclass
class GraphSample:
    """Sorted vertex positions per cell ``((l-1)r, lr]`` of ``[0, kr]``."""

    cells: list[np.ndarray]
    k: int
    r: float
    t: float

    def all_points(self) -> np.ndarray:
        return np.sort(np.concatenate(self.cells)) if self.cells else np.empty(0)


def sample_points(config: SimConfig, rng: np.random.Generator | None = None, index: int = 0) -> GraphSample:
    """Draw the full Poisson configuration on ``[0, kr]``.

    Without ``rng`` the stream ``stream(config.seed, index)`` is used, so a
    sample is a deterministic function of the seed and its index.
    """
    if rng is None:
        rng = stream(config.seed, index)
    r = float(config.r)
    cells = []
    for l, lam in enumerate(config.intensities, start=1):
        n = rng.poisson(lam * r)
        # uniform on ((l-1)r, lr]
        cells.append(np.sort(l * r - rng.random(n) * r))
    return GraphSample(cells, config.k, r, float(config.t))


def count_khops_bruteforce(sample: GraphSample, k: int, r, t) -> int:
    """Count ordered tuples of distinct points forming a k-hop from 0 to ``t``.

    The tuple ``(s_1, ..., s_{k-1})`` qualifies when
    ``t - r < s_{k-1} < (k-1) r`` and ``s_{j+1} - r < s_j < j r`` for
    ``j = k-2, ..., 1``. Enumeration walks backwards from ``s_{k-1}``.
    """
    r = float(r)
    t = float(t)
    pts = sample.all_points()
    if len(pts) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_LIMIT} points")
    pts = pts.tolist()
    if k < 2:
        raise ValueError("k must be at least 2")
    used: set[int] = set()

    def candidates(lo: float, hi: float):
        i = bisect.bisect_right(pts, lo)
        j = bisect.bisect_left(pts, hi)
        return range(i, j)

    def rec(j: int, upper_point: float) -> int:
        # choose s_j given s_{j+1} = upper_point
        if j == 0:
            return 1
        total = 0
        for i in candidates(upper_point - r, j * r):
            if i in used:
                continue
            used.add(i)
            total += rec(j - 1, pts[i])
            used.discard(i)
        return total

    total = 0
    for i in candidates(t - r, (k - 1) * r):
        used.add(i)
        total += rec(k - 2, pts[i])
        used.discard(i)
    return total


def _lens_keys(sample: GraphSample, k: int, r: float, tau: float) -> list[np.ndarray]:
    """Lens points as exact integer ranks of ``y = x - (jr - tau)``, descending chains."""
    ys = []
    for j in range(1, k):
        x = sample.cells[j - 1] if j - 1 < len(sample.cells) else np.empty(0)
        lo = j * r - tau
        y = x[(x > lo) & (x <= j * r)] - lo
        ys.append(y)
    allv = np.concatenate(ys) if ys else np.empty(0)
    if len(allv) == 0:
        return [np.empty(0, dtype=np.int64) for _ in ys]
    # chains decrease in y, so rank by -y to count increasing chains
    uniq = np.unique(-allv)
    return [np.searchsorted(uniq, -y).astype(np.int64) for y in ys]


def count_khops_lens(sample: GraphSample, k: int, r, tau) -> int:
    """Count k-hops as strictly decreasing chains ``y_1 > ... > y_{k-1}`` across lenses.

    Only valid in the lens regime ``t = kr - tau`` with ``0 < tau <= r``.
    """
    r = float(r)
    tau = float(tau)
    if not 0 < tau <= r:
        raise ValueError("tau must lie in (0, r]")
    keys = _lens_keys(sample, k, r, tau)
    offsets = [np.array([0, len(kk)], dtype=np.int64) for kk in keys]
    return int(kernels.count_chains(keys, offsets, 1)[0])


def _batch_counts(config: SimConfig, batch_index: int, size: int, count_fn) -> np.ndarray:
    rng = stream(config.seed, batch_index)
    tau = float(config.tau)
    keys, offsets = [], []
    for j in range(config.k - 1):
        n = rng.poisson(config.intensities[j] * tau, size=size).astype(np.int64)
        offsets.append(np.concatenate(([0], np.cumsum(n))).astype(np.int64))
        keys.append(rng.integers(0, 1 << KEY_BITS, size=int(n.sum()), dtype=np.int64))
    return count_fn(keys, offsets, size)


def simulate_counts(config: SimConfig, *, threads: int | None = None, count_fn=None) -> np.ndarray:
    """Raw k-hop counts for ``config.n_samples`` independent configurations."""
    count_fn = count_fn or kernels.count_chains
    n = config.n_samples
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if config.tau <= 0:
        raise ValueError("lens simulation needs tau > 0")
    nb = -(-n // BATCH_SIZE)
    sizes = [min(BATCH_SIZE, n - b * BATCH_SIZE) for b in range(nb)]
    threads = threads or config.threads
    if threads <= 1 or nb == 1:
        parts = [_batch_counts(config, b, sizes[b], count_fn) for b in range(nb)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _batch_counts(config, b, sizes[b], count_fn), range(nb)))
    return np.concatenate(parts)


@dataclass
class SampleStats:
    """Streaming statistics of integer counts.

    Power sums ``S_j = sum c^j`` for ``j <= 6`` are exact Python integers, so
    central moments and k-statistics are exact rationals until the final
    float conversion.
    """

    n: int = 0
    power_sums: list[int] = field(default_factory=lambda: [0] * 7)
    _chunks: list[np.ndarray] = field(default_factory=list, repr=False)

    def update(self, counts) -> None:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.size == 0:
            return
        if counts.min() < 0:
            raise ValueError("counts must be nonnegative")
        values, mult = np.unique(counts, return_counts=True)
        for v, c in zip(values.tolist(), mult.tolist()):
            p = 1
            for j in range(7):
                self.power_sums[j] += c * p
                p *= v
        self.n += int(counts.size)
        self._chunks.append(counts)

    def merge(self, other: "SampleStats") -> None:
        self.n += other.n
        self.power_sums = [a + b for a, b in zip(self.power_sums, other.power_sums)]
        self._chunks.extend(other._chunks)

    @property
    def sorted_counts(self) -> np.ndarray:
        if not self._chunks:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(self._chunks))

    @property
    def counts(self) -> np.ndarray:
        if not self._chunks:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(self._chunks)

    # exact summaries -------------------------------------------------
    def raw_moment(self, j: int) -> Fraction:
        return Fraction(self.power_sums[j], self.n)

    def central_moment(self, j: int) -> Fraction:
        """Biased central moment ``(1/n) sum (c - mean)^j``."""
        if self.n == 0:
            raise ValueError("no samples")
        mu = self.raw_moment(1)
        return sum(
            math.comb(j, i) * self.raw_moment(i) * (-mu) ** (j - i) for i in range(j + 1)
        )

    def kstat(self, order: int) -> Fraction:
        """Unbiased cumulant estimate (k-statistic) of order 1 to 4."""
        n = self.n
        if order == 1:
            return self.raw_moment(1)
        m2 = self.central_moment(2)
        if order == 2:
            return m2 * n / (n - 1)
        if order == 3:
            return self.central_moment(3) * n * n / ((n - 1) * (n - 2))
        if order == 4:
            m4 = self.central_moment(4)
            return n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3))
        raise ValueError("orders 1..4 only")

    def mean(self) -> float:
        return float(self.raw_moment(1))

    def variance(self) -> float:
        return float(self.kstat(2))

    def skewness(self) -> float:
        m2 = self.central_moment(2)
        return float(self.central_moment(3)) / float(m2) ** 1.5 if m2 else float("nan")

    def ex_kurtosis(self) -> float:
        m2 = self.central_moment(2)
        return float(self.central_moment(4) / (m2 * m2)) - 3.0 if m2 else float("nan")

    def standard_errors(self) -> dict[str, float]:
        """Large-sample standard errors of the mean, variance and third cumulant."""
        n = self.n
        m2, m3, m4, m6 = (self.central_moment(j) for j in (2, 3, 4, 6))
        return {
            "mean": math.sqrt(m2 / n),
            "variance": math.sqrt(max(m4 - m2 * m2, 0) / n),
            "c3": math.sqrt(max(m6 - m3 * m3 - 6 * m4 * m2 + 9 * m2**3, 0) / n),
        }

    def summary(self) -> dict:
        if self.n == 0:
            return {"n": 0}
        out = {"n": self.n, "mean": self.mean()}
        if self.n > 1:
            out["variance"] = self.variance()
        if self.n > 2:
            out["c3"] = float(self.kstat(3))
        if self.n > 3:
            out["c4"] = float(self.kstat(4))
        out["skewness"] = self.skewness()
        out["ex_kurtosis"] = self.ex_kurtosis()
        return out


def run_simulation(config: SimConfig, *, threads: int | None = None) -> SampleStats:
    """Simulate ``config.n_samples`` counts and accumulate them."""
    stats = SampleStats()
    stats.update(simulate_counts(config, threads=threads))
    return stats


def default_threads() -> int:
    env = os.environ.get("KHOP_THREADS")
    if env:
        return max(1, int(env))
    return 1


def write_samples(path, config: SimConfig, counts: Sequence[int]) -> None:
    """Write one count per line under a ``# khop ...`` header."""
    lam = ",".join(repr(x) for x in config.intensities)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"# khop k={config.k} r={config.r} t={config.t} lambda={lam} "
            f"seed={config.seed} n={len(counts)}\n"
        )
        for c in counts:
            fh.write(f"{int(c)}\n")
