"""Verification suites shared by ``khop check`` and the acceptance tests.

Each check returns :class:`CheckResult` records. Status ``"XFAIL"`` marks a
known discrepancy in a reference value that the engine and an
independent derivation both contradict; it is reported but does not fail
the suite.
"""
from __future__ import annotations

import contextlib
import io
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .exactpoly import MultiPoly, rename, specialize, substitute, tau

__all__ = ["CheckResult", "SUITES", "CRITERIA", "run_suite", "run_criterion"]


@dataclass
class CheckResult:
    criterion: int
    name: str
    status: str  # PASS, FAIL or XFAIL
    detail: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status != "FAIL"

    def line(self) -> str:
        tail = f": {self.detail}" if self.detail else ""
        return f"{self.status} criterion {self.criterion} {self.name}{tail} ({self.seconds:.2f}s)"


def _res(criterion, name, ok, detail="", t0=None, status=None) -> CheckResult:
    st = status or ("PASS" if ok else "FAIL")
    return CheckResult(criterion, name, st, detail, time.perf_counter() - t0 if t0 else 0.0)


# ---------------------------------------------------------------------------
# reference tables, transcribed as canonical polynomial strings

REF_MOMENTS_2 = {
    1: "tau1",
    2: "tau1 + tau1*tau2",
    3: "tau1 + 2*tau1*tau2 + tau1*tau3 + tau1*tau2*tau3",
    4: "tau1 + 4*tau1*tau2 + 2*tau1*tau3 + tau1*tau4 + 3*tau1*tau2*tau3 + 2*tau1*tau2*tau4"
    " + tau1*tau3*tau4 + tau1*tau2*tau3*tau4",
}
REF_MOMENTS_3 = {
    1: "1/2*tau^2",
    2: "1/2*tau^2 + 2/3*tau^3 + 1/4*tau^4",
    3: "1/2*tau^2 + 2*tau^3 + 5/2*tau^4 + tau^5 + 1/8*tau^6",
    4: "1/2*tau^2 + 14/3*tau^3 + 53/4*tau^4 + 66/5*tau^5 + 67/12*tau^6 + tau^7 + 1/16*tau^8",
}
REF_MOMENTS_4 = {
    1: "1/6*tau^3",
    2: "1/6*tau^3 + 1/4*tau^4 + 2/15*tau^5 + 1/36*tau^6",
    3: "1/6*tau^3 + 3/4*tau^4 + 5/4*tau^5 + 59/60*tau^6 + 13/35*tau^7 + 1/15*tau^8 + 1/216*tau^9",
}
REF_CUMULANTS_3 = {
    1: "1/2*tau^2",
    2: "1/2*tau^2 + 2/3*tau^3",
    3: "1/2*tau^2 + 2*tau^3 + 7/4*tau^4",
    4: "1/2*tau^2 + 14/3*tau^3 + 23/2*tau^4 + 36/5*tau^5",
    5: "1/2*tau^2 + 10*tau^3 + 215/4*tau^4 + 86*tau^5 + 41*tau^6",
}
REF_CUMULANTS_4 = {
    1: "1/6*tau^3",
    2: "1/6*tau^3 + 1/4*tau^4 + 2/15*tau^5",
    3: "1/6*tau^3 + 3/4*tau^4 + 5/4*tau^5 + 9/10*tau^6 + 69/280*tau^7",
}
REF_VARIANCE_GENERAL = {
    2: "lambda1",
    3: "1/2*lambda1*lambda2 + 1/3*lambda1^2*lambda2 + 1/3*lambda1*lambda2^2",
    # as printed; the last group carries 4 on lambda1*lambda2^2*lambda3^2
    4: "1/6*lambda1*lambda2*lambda3 + 1/12*lambda1^2*lambda2*lambda3 + 1/12*lambda1*lambda2^2*lambda3"
    " + 1/12*lambda1*lambda2*lambda3^2 + 1/30*lambda1^2*lambda2*lambda3^2"
    " + 1/20*lambda1^2*lambda2^2*lambda3 + 1/30*lambda1*lambda2^2*lambda3^2",
}
# the 4-hop entry with the lambda1 <-> lambda3 symmetric coefficient 6
VARIANCE_GENERAL_4_CORRECTED = (
    "1/6*lambda1*lambda2*lambda3 + 1/12*lambda1^2*lambda2*lambda3 + 1/12*lambda1*lambda2^2*lambda3"
    " + 1/12*lambda1*lambda2*lambda3^2 + 1/30*lambda1^2*lambda2*lambda3^2"
    " + 1/20*lambda1^2*lambda2^2*lambda3 + 1/20*lambda1*lambda2^2*lambda3^2"
)
REF_VARIANCE_EQUAL = {
    2: "tau",
    3: "1/2*tau^2 + 2/3*tau^3",
    4: "1/6*tau^3 + 1/4*tau^4 + 2/15*tau^5",
    5: "1/24*tau^4 + 1/15*tau^5 + 1/24*tau^6 + 4/315*tau^7",
    6: "1/120*tau^5 + 1/72*tau^6 + 1/105*tau^7 + 1/288*tau^8 + 2/2835*tau^9",
}


def _collapse(p: MultiPoly, n: int) -> MultiPoly:
    return rename(p, {tau(i): "tau" for i in range(1, n + 1)})


def _equal_moment(k: int, n: int) -> MultiPoly:
    from .hopmoments import moment_poly

    return specialize(rename(moment_poly(k, [n], strict=False), {tau(1): "tau"}), lambda_equal=1)


def _equal_cumulant(k: int, n: int) -> MultiPoly:
    from .hopcumulants import joint_cumulant_poly

    return specialize(rename(joint_cumulant_poly(k, [n], strict=False), {tau(1): "tau"}), lambda_equal=1)


# ---------------------------------------------------------------------------
# criterion 1


def check_tables() -> Iterator[CheckResult]:
    from .hopmoments import moment_poly
    from .variance import variance_equal, variance_general

    t0 = time.perf_counter()
    for n, s in REF_MOMENTS_2.items():
        got = specialize(moment_poly(2, [1] * n), lambda_equal=1)
        yield _res(1, f"two-hop joint moment n={n}", got == MultiPoly.parse(s), got.to_string(), t0)
        t0 = time.perf_counter()
    for name, table, fn in (
        ("three-hop moment n=", REF_MOMENTS_3, lambda n: _equal_moment(3, n)),
        ("four-hop moment n=", REF_MOMENTS_4, lambda n: _equal_moment(4, n)),
        ("three-hop cumulant n=", REF_CUMULANTS_3, lambda n: _equal_cumulant(3, n)),
        ("four-hop cumulant n=", REF_CUMULANTS_4, lambda n: _equal_cumulant(4, n)),
    ):
        for n, s in table.items():
            got = fn(n)
            yield _res(1, f"{name}{n}", got == MultiPoly.parse(s), got.to_string(), t0)
            t0 = time.perf_counter()
    for k, s in REF_VARIANCE_GENERAL.items():
        got = substitute(variance_general(k), "tau", 1)
        ok = got == MultiPoly.parse(s)
        if k == 4 and not ok:
            corrected = got == MultiPoly.parse(VARIANCE_GENERAL_4_CORRECTED)
            yield _res(1, "distinct-intensity variance k=4 (printed entry)", False,
                       "printed lambda1*lambda2^2*lambda3^2 coefficient 4/120 breaks the lambda1<->lambda3 "
                       "symmetry; engine gives 6/120"
                       + ("" if corrected else " and also differs elsewhere"),
                       t0, status="XFAIL" if corrected else "FAIL")
            yield _res(1, "distinct-intensity variance k=4 (symmetric entry)", corrected, got.to_string(), t0)
        else:
            yield _res(1, f"distinct-intensity variance k={k}", ok, got.to_string(), t0)
        t0 = time.perf_counter()
    for k, s in REF_VARIANCE_EQUAL.items():
        got = variance_equal(k, 1, "tau")
        yield _res(1, f"equal-intensity variance k={k}", got == MultiPoly.parse(s), got.to_string(), t0)
        t0 = time.perf_counter()


# ---------------------------------------------------------------------------
# criteria 2, 3, 4, 9


def check_cross_paths() -> Iterator[CheckResult]:
    from .hopcumulants import cumulant, cumulant_from_moments, cumulant_poly
    from .hopmoments import moment_poly
    from .oracles import moment_via_partitions
    from .variance import variance_equal, variance_general

    t0 = time.perf_counter()
    bad = [(k, n) for k in range(1, 5) for n in range(1, 5)
           if cumulant(k, [1] * n).poly != cumulant_from_moments(k, n).poly]
    yield _res(2, "cumulant vs Moebius inversion of moments (k<=4, n<=4)", not bad, f"mismatch {bad}" if bad else "16 cases", t0)

    t0 = time.perf_counter()
    bad = []
    for k in range(2, 6):
        c = specialize(_collapse(cumulant_poly(k, [1, 1]), 2), lambda_equal="lambda")
        v = variance_equal(k, "lambda", "tau")
        if c != v:
            bad.append(k)
    yield _res(2, "variance_equal vs two-argument cumulant (k<=5)", not bad, f"mismatch {bad}" if bad else "k=2..5", t0)

    t0 = time.perf_counter()
    bad = [k for k in range(2, 7)
           if specialize(variance_general(k), lambda_equal="lambda") != variance_equal(k, "lambda", "tau")]
    yield _res(2, "variance_general specialized vs variance_equal (k<=6)", not bad, f"mismatch {bad}" if bad else "k=2..6", t0)

    t0 = time.perf_counter()
    bad = [(k, n) for k in range(1, 5) for n in range(1, 4)
           if moment_via_partitions(k, n) != moment_poly(k, [1] * n, strict=False)]
    yield _res(2, "moments vs partition-tuple oracle (k<=4, n<=3)", not bad, f"mismatch {bad}" if bad else "12 cases", t0)


def check_written_out_recursions() -> Iterator[CheckResult]:
    from .hopcumulants import cumulant_poly, joint_cumulant_poly
    from .hopmoments import moment_poly
    from .oracles import appendix_cumulant_step, appendix_moment_step

    t0 = time.perf_counter()
    bad = [(k, n) for k in (2, 3) for n in (1, 2, 3)
           if appendix_moment_step(k, n) != moment_poly(k + 1, [1] * n, strict=False)]
    yield _res(3, "written-out moment recursion (n<=3, k=2,3)", not bad, f"mismatch {bad}" if bad else "6 cases", t0)
    t0 = time.perf_counter()
    bad = [n for n in (2, 3) if appendix_cumulant_step(2, n) != cumulant_poly(3, [1] * n, strict=False)]
    four = rename(joint_cumulant_poly(3, [4], strict=False), {tau(1): "tau"})
    if appendix_cumulant_step(2, 4) != four:
        bad.append(4)
    yield _res(3, "written-out cumulant recursion (n<=4, k=2)", not bad, f"mismatch {bad}" if bad else "n=2,3,4", t0)


def check_asymptotic() -> Iterator[CheckResult]:
    from .variance import variance_asymptotic, variance_equal

    for k in (3, 4):
        t0 = time.perf_counter()
        ratio = variance_equal(k, 10**4, 1) / variance_asymptotic(k, 10**4, 1)
        err = abs(ratio - 1)
        yield _res(4, f"asymptotic variance k={k}", err <= Fraction(2, 1000), f"|ratio-1| = {float(err):.3e}", t0)


def check_skewness() -> Iterator[CheckResult]:
    from .hopcumulants import skewness

    t0 = time.perf_counter()
    a = skewness(3, 10**4, 1)
    b = skewness(3, 4 * 10**4, 1)
    # ratio^2 = a.squared / b.squared, compared exactly against [1.9^2, 2.1^2]
    sq = a.squared / b.squared
    ok = Fraction(19, 10) ** 2 <= sq <= Fraction(21, 10) ** 2
    yield _res(9, "skewness halves when lambda quadruples", ok, f"ratio = {a.value / b.value:.6f}", t0)


# ---------------------------------------------------------------------------
# criterion 5


def check_bounds() -> Iterator[CheckResult]:
    from .hopcumulants import cumulant_bound
    from .hopmoments import moment_bound

    t0 = time.perf_counter()
    strict_fail, equal_k2, cum_fail = [], [], []
    for k in (2, 3, 4):
        for n in range(1, 5):
            m = _equal_moment_general(k, n)
            c = _equal_cumulant_general(k, n)
            for lv in (1, 10):
                for tv in (Fraction(1, 10), Fraction(1, 2), Fraction(1)):
                    val = m.eval({"lambda": lv, "tau": tv})
                    mb = moment_bound(k, n, lv, tv)
                    if k == 2:
                        # one cell: the count is Poisson and the bound is its moment
                        if val != mb:
                            strict_fail.append((k, n, lv, tv))
                        else:
                            equal_k2.append((n, lv, tv))
                    elif not val < mb:
                        strict_fail.append((k, n, lv, tv))
                    cv = c.eval({"lambda": lv, "tau": tv})
                    if not abs(cv) < cumulant_bound(k, n, lv, tv):
                        cum_fail.append((k, n, lv, tv))
    yield _res(5, "moment bound strict for k=3,4", not strict_fail, f"fail {strict_fail}" if strict_fail else "48 cases", t0)
    yield _res(5, "moment bound at k=2 (printed as strict)", False,
               f"equality in all {len(equal_k2)} k=2 cases: the 2-hop count is Poisson and the bound is its n-th moment",
               t0, status="XFAIL" if len(equal_k2) == 24 else "FAIL")
    yield _res(5, "cumulant bound strict for k=2,3,4", not cum_fail, f"fail {cum_fail}" if cum_fail else "72 cases", t0)


def _equal_moment_general(k: int, n: int) -> MultiPoly:
    from .hopmoments import moment_poly

    return specialize(rename(moment_poly(k, [n], strict=False), {tau(1): "tau"}), lambda_equal="lambda")


def _equal_cumulant_general(k: int, n: int) -> MultiPoly:
    from .hopcumulants import joint_cumulant_poly

    return specialize(rename(joint_cumulant_poly(k, [n], strict=False), {tau(1): "tau"}), lambda_equal="lambda")


# ---------------------------------------------------------------------------
# criteria 6, 7, 8, 10


def check_monte_carlo(quick: bool = False) -> Iterator[CheckResult]:
    from .simulator import SampleStats, SimConfig, simulate_counts

    t0 = time.perf_counter()
    n = 20_000 if quick else 100_000
    cfg = SimConfig(3, 1, 2, 1, n_samples=n, seed=42)
    stats = SampleStats()
    stats.update(simulate_counts(cfg))
    se = stats.standard_errors()
    checks = [
        ("mean", float(stats.kstat(1)), Fraction(1, 2), se["mean"]),
        ("variance", float(stats.kstat(2)), Fraction(7, 6), se["variance"]),
        ("c3", float(stats.kstat(3)), Fraction(17, 4), se["c3"]),
    ]
    dt = time.perf_counter() - t0
    for name, est, ref, s in checks:
        z = (est - float(ref)) / s
        yield CheckResult(6, f"sample {name} vs exact {ref}", "PASS" if abs(z) <= 4 else "FAIL",
                          f"{est:.5f} (SE {s:.4f}, z={z:+.2f})", dt)


def check_lens_vs_bruteforce(quick: bool = False) -> Iterator[CheckResult]:
    from scipy import stats as sps

    from .simulator import (SimConfig, count_khops_bruteforce, count_khops_lens, sample_points,
                            simulate_counts)

    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    trials = 200 if quick else 1000
    bad = []
    for i in range(trials):
        k = int(rng.integers(2, 6))
        lam_value = Fraction(int(rng.integers(10, 31)), 10)
        tau_value = Fraction(int(rng.integers(1, 100)), 100)
        cfg = SimConfig(k, 1, k - tau_value, lam_value, seed=i)
        sample = sample_points(cfg, index=i)
        a = count_khops_bruteforce(sample, k, 1, k - tau_value)
        b = count_khops_lens(sample, k, 1, tau_value)
        if a != b:
            bad.append((i, k, a, b))
    yield _res(7, f"lens DP equals brute force on {trials} configurations", not bad,
               f"mismatch {bad[:3]}" if bad else "", t0)

    t0 = time.perf_counter()
    n = 100_000
    mu = 2.0
    cfg = SimConfig(2, 1, Fraction(3, 2), 4, n_samples=n, seed=7)  # tau = 1/2, lambda * tau = 2
    counts = simulate_counts(cfg)
    top = 8
    obs = np.bincount(np.minimum(counts, top), minlength=top + 1)
    probs = sps.poisson.pmf(np.arange(top), mu)
    probs = np.append(probs, 1 - probs.sum())
    chi2, p = sps.chisquare(obs, probs * n)
    yield _res(7, "k=2 counts are Poisson(lambda*tau) by chi-square", p > 1e-3, f"chi2={chi2:.2f}, p={p:.3f}", t0)


def check_rate(quick: bool = False) -> Iterator[CheckResult]:
    from .cltstats import rate_experiment

    t0 = time.perf_counter()
    n = 20_000 if quick else 100_000
    series = rate_experiment(3, 1, Fraction(5, 2), [25, 50, 100, 200, 400], n, seed=2024)
    ks = [r[1] for r in series.rows]
    w1 = [r[2] for r in series.rows]
    dt = time.perf_counter() - t0
    yield CheckResult(8, "Kolmogorov distance log-log slope in [-0.65, -0.35]",
                      "PASS" if -0.65 <= series.slope_ks <= -0.35 and ks[-1] < ks[0] else "FAIL",
                      f"slope={series.slope_ks:.3f}, d_K(25)={ks[0]:.4f}, d_K(400)={ks[-1]:.4f}", dt)
    yield CheckResult(8, "Wasserstein distance log-log slope in [-0.65, -0.35]",
                      "PASS" if -0.65 <= series.slope_w1 <= -0.35 and w1[-1] < w1[0] else "FAIL",
                      f"slope={series.slope_w1:.3f}, d_W(25)={w1[0]:.4f}, d_W(400)={w1[-1]:.4f}", dt)


def check_determinism(quick: bool = False) -> Iterator[CheckResult]:
    from .cli import run

    t0 = time.perf_counter()
    n = "20000" if quick else "100000"
    outputs = {}
    for threads in (1, 2, 8):
        buf = io.StringIO()
        run(["simulate", "--k", "3", "--t", "2.25", "--lambda", "3", "--samples", n, "--seed", "11",
             "--threads", str(threads)], out=buf)
        outputs[threads] = buf.getvalue().encode()
    ok = len(set(outputs.values())) == 1 and outputs[1]
    yield _res(10, "simulate output identical for 1, 2 and 8 threads", bool(ok),
               f"{len(outputs[1])} bytes", t0)


# ---------------------------------------------------------------------------
# registry

CRITERIA: dict[int, Callable[..., Iterator[CheckResult]]] = {
    1: lambda quick=False: check_tables(),
    2: lambda quick=False: check_cross_paths(),
    3: lambda quick=False: check_written_out_recursions(),
    4: lambda quick=False: check_asymptotic(),
    5: lambda quick=False: check_bounds(),
    6: check_monte_carlo,
    7: check_lens_vs_bruteforce,
    8: check_rate,
    9: lambda quick=False: check_skewness(),
    10: check_determinism,
}

SUITES: dict[str, list[int]] = {
    "tables": [1],
    "oracles": [2, 3, 4, 9],
    "bounds": [5],
    "mc": [6, 7, 8, 10],
}


def run_criterion(number: int, quick: bool = False) -> list[CheckResult]:
    return list(CRITERIA[number](quick=quick))


def run_suite(name: str, quick: bool = False) -> Iterator[CheckResult]:
    for number in SUITES[name]:
        with contextlib.redirect_stderr(io.StringIO()):
            results = run_criterion(number, quick=quick)
        yield from results
