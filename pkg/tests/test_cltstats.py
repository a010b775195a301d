from __future__ import annotations

import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps
from scipy.integrate import trapezoid

from khop.cltstats import (
    NormalizedSample,
    RateSeries,
    exact_mean_variance,
    ks_distance,
    normal_cdf,
    normalize,
    rate_experiment,
    rate_fit,
    wasserstein1,
    write_rate_csv,
)

finite = st.floats(-6, 6, allow_nan=False)


def test_normal_cdf():
    assert normal_cdf(0) == 0.5
    assert 0 < normal_cdf(-30) < 1e-190
    assert normal_cdf(float("inf")) == 1.0
    with pytest.raises(ValueError):
        normal_cdf(float("nan"))


def test_ks_known_values():
    assert ks_distance([0.0]) == 0.5
    assert ks_distance([-1.0, 1.0]) == pytest.approx(0.341344746, abs=1e-9)


@given(st.lists(finite, min_size=1, max_size=50))
def test_ks_matches_scipy(xs):
    assert ks_distance(xs) == pytest.approx(sps.kstest(xs, "norm").statistic, abs=1e-12)


def test_ks_with_ties():
    # the jump at 0 goes from 0 to 3/4; the left limit gives the sup
    assert ks_distance([0.0, 0.0, 0.0, 1.0]) == pytest.approx(0.5, abs=1e-12)
    assert ks_distance([0.0, 0.0, 0.0, 0.0]) == pytest.approx(0.5, abs=1e-12)
    xs = [-0.3, -0.3, 0.2, 0.2, 0.2, 1.5]
    assert ks_distance(xs) == pytest.approx(sps.kstest(xs, "norm").statistic, abs=1e-12)


@given(st.lists(finite, min_size=1, max_size=40))
def test_w1_matches_quadrature(xs):
    x = np.sort(np.asarray(xs))
    grid = np.linspace(-12, 12, 200_001)
    ecdf = np.searchsorted(x, grid, side="right") / len(x)
    num = trapezoid(np.abs(ecdf - sps.norm.cdf(grid)), grid)
    assert wasserstein1(xs) == pytest.approx(num, abs=2e-4)


def test_w1_point_mass():
    assert wasserstein1([0.0]) == pytest.approx(math.sqrt(2 / math.pi))


def test_w1_quantile_sample_is_close():
    n = 2000
    q = sps.norm.ppf((np.arange(n) + 0.5) / n)
    assert wasserstein1(q) < 2e-3
    assert wasserstein1(q) < wasserstein1(q[::4])


def test_empty_sample():
    with pytest.raises(ValueError):
        ks_distance([])


def test_normalize_uses_exact_constants():
    mean, var = exact_mean_variance(3, 1, 1)
    assert (mean, var) == (Fraction(1, 2), Fraction(7, 6))
    s = normalize([0, 1, 2], 3, 1, 2)
    assert isinstance(s, NormalizedSample)
    assert s.values[0] == pytest.approx(-0.5 / math.sqrt(7 / 6))
    assert s.provenance["variance"] == "7/6"
    with pytest.raises(ValueError):
        normalize([1], 3, 1, 3)


def test_rate_fit_recovers_slope():
    lams = [25, 50, 100, 200, 400]
    assert rate_fit([(l, 3 / math.sqrt(l)) for l in lams]) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        rate_fit([(1, 1), (2, 1)])
    with pytest.raises(ValueError):
        rate_fit([(1, 1), (2, 0), (3, 1)])


def test_series_rejects_non_increasing():
    s = RateSeries()
    s.add(10, 0.1, 0.1, 5)
    with pytest.raises(ValueError):
        s.add(10, 0.1, 0.1, 5)


def test_rate_experiment_small(tmp_path):
    series = rate_experiment(3, 1, Fraction(5, 2), [25, 100, 400], 4000, seed=3)
    assert len(series.rows) == 3
    assert series.slope_ks < 0
    out = io.StringIO()
    write_rate_csv(series, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "lambda,n_samples,ks,w1"
    assert lines[-1].startswith("# slope_ks=")
    assert float(lines[1].split(",")[2]) == series.rows[0][1]
    path = tmp_path / "rate.csv"
    write_rate_csv(series, path)
    assert path.read_text() == out.getvalue()
