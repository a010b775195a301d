from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from khop.exactpoly import MultiPoly, rename, tau
from khop.hopcumulants import (
    cumulant,
    cumulant_at,
    cumulant_bound,
    cumulant_from_moments,
    cumulant_poly,
    excess_kurtosis,
    joint_cumulant_poly,
    power_reduce,
    skewness,
)
from khop.hopmoments import moment_at, moment_poly
from khop.partitions import moments_to_cumulants


def powered_cumulant_from_moments(k, powers):
    """Joint cumulant of X_i = sigma(v_i)^{n_i} from moments of subsets."""

    def m(block):
        p = moment_poly(k, [powers[b - 1] for b in block], strict=False)
        return rename(p, {tau(i + 1): tau(b) for i, b in enumerate(block)})

    return moments_to_cumulants(m, len(powers))


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cumulant_matches_inversion(k, n):
    assert cumulant(k, [1] * n).poly == cumulant_from_moments(k, n).poly


@given(st.integers(2, 3), st.lists(st.integers(1, 2), min_size=1, max_size=3))
def test_powered_cumulant_matches_inversion(k, powers):
    assert cumulant_poly(k, powers, strict=False) == powered_cumulant_from_moments(k, powers)


def test_single_powered_argument_is_a_moment():
    for k in (2, 3):
        for n in (1, 2, 3):
            assert cumulant_poly(k, [n]) == moment_poly(k, [n])


def test_two_hop_cumulants_are_poisson():
    # every joint cumulant of nested Poisson counts is lambda * min(tau)
    for n in range(1, 6):
        assert joint_cumulant_poly(2, [n]) == MultiPoly.parse("tau1*lambda1")
        assert cumulant_poly(2, [1] * min(n, 4)) == MultiPoly.parse("tau1*lambda1")


def test_power_reduce():
    # kappa(X^2) = kappa(X, X) + kappa(X) kappa(X)
    assert power_reduce([(0, 2)]) == [(1, [((0, 1), (0, 1))]), (1, [((0, 1),), ((0, 1),)])]
    # kappa(A, X^2): the product rule also splits A between the two factors
    terms = power_reduce([(0, 1), (1, 2)])
    assert terms[0] == (1, [((0, 1), (1, 1), (1, 1))])
    assert len(terms) == 1 + 2
    assert power_reduce([(0, 1), (1, 1)]) == [(1, [((0, 1), (1, 1))])]


@pytest.mark.parametrize("k", [3, 4])
def test_coincident_cumulant_collapse(k):
    c = cumulant(k, [1, 1, 1])
    assert c.collapse() == rename(joint_cumulant_poly(k, [3]), {"tau1": "tau"})


def test_cumulant_at():
    assert cumulant_at(3, [1, 1]) == Fraction(7, 6)
    assert cumulant_at(3, [1]) == Fraction(1, 2)
    v = cumulant_at(3, [Fraction(1, 2), 1], powers=[2, 1])
    expected = moment_at(3, [Fraction(1, 2), Fraction(1, 2), 1]) - moment_at(
        3, [Fraction(1, 2)] * 2) * moment_at(3, [1])
    assert v == expected
    with pytest.raises(ValueError):
        cumulant_at(3, [1, 1], powers=[1, 1])


def test_shape_ratios():
    s = skewness(3, 1, 1)
    assert (s[0], s[1]) == (Fraction(289, 16), Fraction(343, 216))
    assert abs(s.value - 3.3726) < 1e-4
    assert s.value**2 == pytest.approx(float(s.squared))
    e = excess_kurtosis(3, 1, 1)
    assert e.value > 0


def test_skewness_scaling():
    a = skewness(3, 10**4, 1).value
    b = skewness(3, 4 * 10**4, 1).value
    assert a / b == pytest.approx(2, rel=1e-3)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cumulant_bound(k, n):
    p = rename(joint_cumulant_poly(k, [n]), {"tau1": "tau"})
    for lv in (1, 10):
        for tv in (Fraction(1, 10), 1):
            env = {"tau": tv, **{f"lambda{i}": lv for i in range(1, k)}}
            assert abs(p.eval(env)) < cumulant_bound(k, n, lv, tv)
