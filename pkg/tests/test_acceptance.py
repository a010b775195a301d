"""Acceptance criteria 1 to 10, one summary line each.

Each criterion is evaluated as written. Where a published reference value is
itself inconsistent, the strict reading is recorded as an expected failure
and a companion test checks everything else at the stated tolerance.
"""
from __future__ import annotations

import functools
import time

import pytest

from conftest import ACCEPTANCE_LINES
from khop.checks import run_criterion

TITLES = {
    1: "table reproduction (exact rational equality)",
    2: "cross-path symbolic equality (exact)",
    3: "written-out recursion oracles (exact)",
    4: "asymptotic variance |ratio - 1| <= 2e-3",
    5: "moment and cumulant bounds, strict inequality",
    6: "Monte Carlo mean, variance, c3 within 4 SE",
    7: "lens DP vs brute force, k=2 chi-square",
    8: "Kolmogorov and Wasserstein slopes in [-0.65, -0.35]",
    9: "skewness ratio 2 within 5%",
    10: "simulate output byte-identical for 1, 2, 8 threads",
}

# criteria whose strict reading fails because of the reference value itself
KNOWN = {
    1: "the printed 4-hop entry of the distinct-intensity variance table is not "
       "symmetric under lambda1 <-> lambda3",
    5: "at k=2 the count is Poisson and the moment bound holds with equality",
}


@functools.lru_cache(maxsize=None)
def results(n: int):
    t0 = time.perf_counter()
    res = run_criterion(n)
    return res, time.perf_counter() - t0


def _record(n: int) -> None:
    res, dt = results(n)
    strict = all(r.status == "PASS" for r in res)
    hard_fail = [r for r in res if r.status == "FAIL"]
    if strict:
        status = "PASS"
    elif not hard_fail:
        status = "FAIL (known)"
    else:
        status = "FAIL"
    extra = ""
    if status != "PASS":
        bad = [r for r in res if r.status != "PASS"]
        extra = "; " + "; ".join(f"{r.name}: {r.detail}" for r in bad)
    passed = sum(r.status == "PASS" for r in res)
    line = f"{status} criterion {n}: {TITLES[n]} [{passed}/{len(res)} checks, {dt:.1f}s]{extra}"
    if line not in ACCEPTANCE_LINES:
        ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.mark.parametrize("n", range(1, 11), ids=[f"criterion_{n:02d}" for n in range(1, 11)])
def test_criterion(n):
    """Every check passes, apart from the documented discrepancies."""
    _record(n)
    res, _ = results(n)
    failures = [r.line() for r in res if r.status == "FAIL"]
    assert not failures, failures


@pytest.mark.parametrize(
    "n",
    [pytest.param(n, marks=pytest.mark.xfail(strict=True, reason=KNOWN[n])) for n in sorted(KNOWN)],
    ids=[f"criterion_{n:02d}_as_printed" for n in sorted(KNOWN)],
)
def test_criterion_as_printed(n):
    res, _ = results(n)
    assert all(r.status == "PASS" for r in res), [r.line() for r in res if r.status != "PASS"]


def test_known_discrepancies_are_the_only_ones():
    for n, _ in KNOWN.items():
        res, _ = results(n)
        assert sum(r.status == "XFAIL" for r in res) == 1
