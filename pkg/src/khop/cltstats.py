"""Distances to the standard normal and the log-log rate experiment."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .exactpoly import to_fraction
from .simulator import SimConfig, simulate_counts
from .variance import variance_general

__all__ = [
    "NormalizedSample",
    "RateSeries",
    "normal_cdf",
    "ks_distance",
    "wasserstein1",
    "exact_mean_variance",
    "normalize",
    "rate_fit",
    "rate_experiment",
    "write_rate_csv",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    """Standard normal CDF through ``erfc``, accurate in both tails."""
    if not math.isfinite(x):
        if math.isnan(x):
            raise ValueError("x must be finite")
        return 0.0 if x < 0 else 1.0
    return 0.5 * math.erfc(-x / _SQRT2)


@dataclass
class NormalizedSample:
    """Sorted normalized values with the constants that produced them."""

    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("values must be one-dimensional")
        self.values = np.sort(v)

    def __len__(self) -> int:
        return len(self.values)


def _as_sorted(sample) -> np.ndarray:
    v = sample.values if isinstance(sample, NormalizedSample) else np.sort(np.asarray(sample, float))
    if v.size == 0:
        raise ValueError("empty sample")
    return v


def ks_distance(sample) -> float:
    """``sup_x |F_n(x) - Phi(x)|`` for the empirical CDF ``F_n``.

    Examples
    --------
    >>> ks_distance([0.0])
    0.5
    """
    x = _as_sorted(sample)
    n = x.size
    phi = ndtr(x)
    # with ties, the right limit at x_i is the last index sharing its value,
    # the left limit the first; computing both per point covers that
    last = np.searchsorted(x, x, side="right")
    first = np.searchsorted(x, x, side="left")
    d_plus = last / n - phi
    d_minus = phi - first / n
    return float(max(d_plus.max(), d_minus.max(), 0.0))


def _G(x: np.ndarray) -> np.ndarray:
    """Antiderivative of Phi: ``x Phi(x) + phi(x)`` (vanishes at -inf)."""
    return x * ndtr(x) + _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _H(x: np.ndarray) -> np.ndarray:
    """``int_x^inf (1 - Phi)`` = ``phi(x) - x (1 - Phi(x))``."""
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x) - x * ndtr(-x)


def wasserstein1(sample) -> float:
    """``int |F_n - Phi| dx`` evaluated exactly between order statistics.

    On ``[x_i, x_{i+1})`` the empirical CDF is the constant ``p = i/n``; the
    integral of ``|p - Phi|`` splits at ``Phi^{-1}(p)`` and uses the
    antiderivative ``x Phi(x) + phi(x)``.

    Examples
    --------
    >>> round(wasserstein1([0.0]), 6)
    0.797885
    """
    x = _as_sorted(sample)
    n = x.size
    # tails: (-inf, x_1) where F_n = 0 and [x_n, inf) where F_n = 1
    total = float(_G(x[:1])[0] + _H(x[-1:])[0])
    if n == 1:
        return total
    a = x[:-1]
    b = x[1:]
    p = np.arange(1, n) / n
    c = np.clip(ndtri(p), a, b)
    # int_a^c (p - Phi) + int_c^b (Phi - p)
    left = p * (c - a) - (_G(c) - _G(a))
    right = (_G(b) - _G(c)) - p * (b - c)
    return total + float(np.sum(left + right))


def exact_mean_variance(k: int, lambdas, tau) -> tuple[Fraction, Fraction]:
    """Exact mean and variance of the count from the symbolic engine."""
    from .hopmoments import lambda_assignment, moment_poly

    assign = lambda_assignment(k, list(lambdas) if isinstance(lambdas, (list, tuple)) else lambdas)
    assign["tau1"] = to_fraction(tau)
    mean = moment_poly(k, [1], strict=False).eval(assign)
    assign_v = {n: v for n, v in assign.items() if n != "tau1"}
    assign_v["tau"] = to_fraction(tau)
    var = variance_general(k).eval(assign_v) if k <= 8 else None
    return mean, var


def normalize(counts, k: int, lambdas, t, r=1, provenance: dict | None = None) -> NormalizedSample:
    """Center and scale counts with the exact mean and standard deviation.

    Examples
    --------
    >>> s = normalize([3, 1], 2, 2, "1.5")
    >>> s.values.tolist()
    [0.0, 2.0]
    """
    tau = to_fraction(k) * to_fraction(r) - to_fraction(t)
    if not 0 < tau <= to_fraction(r):
        raise ValueError("t must lie in [(k-1)r, kr)")
    mean, var = exact_mean_variance(k, lambdas, tau)
    if var <= 0:
        raise ValueError("zero variance")
    sd = math.sqrt(var)
    values = (np.asarray(counts, dtype=float) - float(mean)) / sd
    prov = {"k": k, "lambda": lambdas, "t": str(to_fraction(t)), "mean": str(mean), "variance": str(var)}
    prov.update(provenance or {})
    return NormalizedSample(values, prov, float(mean), sd)


@dataclass
class RateSeries:
    """Distances at increasing intensities and the fitted log-log slopes."""

    rows: list[tuple[float, float, float, int]] = field(default_factory=list)
    slope_ks: float | None = None
    slope_w1: float | None = None
    intercept_ks: float | None = None
    intercept_w1: float | None = None

    def add(self, lam: float, ks: float, w1: float, n: int) -> None:
        if self.rows and lam <= self.rows[-1][0]:
            raise ValueError("lambda values must increase strictly")
        self.rows.append((float(lam), float(ks), float(w1), int(n)))

    @property
    def lambdas(self) -> list[float]:
        return [r[0] for r in self.rows]

    def fit(self) -> None:
        lams = self.lambdas
        self.slope_ks, self.intercept_ks = _fit(lams, [r[1] for r in self.rows])
        self.slope_w1, self.intercept_w1 = _fit(lams, [r[2] for r in self.rows])


def _fit(lams: Sequence[float], ds: Sequence[float]) -> tuple[float, float]:
    if len(lams) < 3:
        raise ValueError("a rate fit needs at least 3 points")
    if any(d <= 0 for d in ds) or any(l <= 0 for l in lams):
        raise ValueError("distances and intensities must be positive")
    x = np.log(np.asarray(lams, float))
    y = np.log(np.asarray(ds, float))
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    return slope, float(ym - slope * xm)


def rate_fit(series: RateSeries | Sequence[tuple[float, float]], which: str = "ks") -> float:
    """Least-squares slope of ``log d`` against ``log lambda``.

    ``series`` is a :class:`RateSeries` (``which`` selects ``"ks"`` or
    ``"w1"``) or a plain sequence of ``(lambda, d)`` pairs.
    """
    if isinstance(series, RateSeries):
        col = {"ks": 1, "w1": 2}[which]
        return _fit(series.lambdas, [r[col] for r in series.rows])[0]
    lams, ds = zip(*series) if series else ((), ())
    return _fit(lams, ds)[0]


def rate_experiment(
    k: int,
    r,
    t,
    lambdas: Sequence[float],
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> RateSeries:
    """Simulate at each intensity and record both distances to the normal.

    Intensity ``lambdas[i]`` uses seed ``seed + i`` so the points are
    independent across the series.
    """
    series = RateSeries()
    for i, lam in enumerate(lambdas):
        cfg = SimConfig(k, r, t, lam, n_samples=n_samples, seed=seed + i, threads=threads)
        counts = simulate_counts(cfg)
        ns = normalize(counts, k, lam, t, r, provenance={"seed": seed + i})
        series.add(lam, ks_distance(ns), wasserstein1(ns), n_samples)
    series.fit()
    return series


def write_rate_csv(series: RateSeries, path_or_file) -> None:
    """CSV with ``lambda,n_samples,ks,w1`` and a trailing slope comment."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "n_samples", "ks", "w1"])
        for lam, ks, w1, n in series.rows:
            w.writerow([_g(lam), n, _g(ks), _g(w1)])
        fh.write(f"# slope_ks={_g(series.slope_ks)} slope_w1={_g(series.slope_w1)}\n")
    finally:
        if own:
            fh.close()


def _g(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".17g")
