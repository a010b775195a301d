from __future__ import annotations

import math
from fractions import Fraction

import pytest

from khop.exactpoly import MultiPoly, rename, specialize, substitute
from khop.hopcumulants import joint_cumulant_poly
from khop.hopmoments import moment_poly
from khop.variance import (
    compositions,
    second_moment_equal,
    second_moment_general,
    variance_asymptotic,
    variance_equal,
    variance_general,
)


def test_compositions():
    assert list(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    for total in range(5):
        for parts in range(1, 4):
            assert len(list(compositions(total, parts))) == math.comb(total + parts - 1, parts - 1)


@pytest.mark.parametrize("k", range(2, 9))
def test_general_specializes_to_equal(k):
    assert specialize(variance_general(k), lambda_equal="lambda") == variance_equal(k, "lambda", "tau")


@pytest.mark.parametrize("k", range(2, 9))
def test_reversal_symmetry(k):
    p = variance_general(k)
    flip = {f"lambda{i}": f"lambda{k - i}" for i in range(1, k)}
    assert rename(p, flip) == p


@pytest.mark.parametrize("k", range(2, 6))
def test_matches_cumulant_engine(k):
    assert variance_general(k) == rename(joint_cumulant_poly(k, [2]), {"tau1": "tau"})


@pytest.mark.parametrize("k", range(2, 6))
def test_second_moment(k):
    assert second_moment_general(k) == rename(moment_poly(k, [2]), {"tau1": "tau"})
    m1 = rename(moment_poly(k, [1]), {"tau1": "tau"})
    assert second_moment_general(k) == variance_general(k) + m1 * m1
    assert second_moment_equal(k, 1, 1) == variance_equal(k, 1, 1) + specialize(m1, lambda_equal=1).eval({"tau": 1}) ** 2


def test_values():
    assert variance_equal(5, 1, 1) == Fraction(1, 24) + Fraction(1, 15) + Fraction(1, 24) + Fraction(4, 315)
    assert variance_equal(5, 1, 1) == Fraction(41, 252)
    assert variance_equal(2, 3, Fraction(1, 2)) == Fraction(3, 2)
    assert isinstance(variance_equal(3, "lambda", 1), MultiPoly)


@pytest.mark.parametrize("k", [3, 4, 5])
def test_asymptotic_ratio_tends_to_one(k):
    errs = [abs(variance_equal(k, lv, 1) / variance_asymptotic(k, lv, 1) - 1) for lv in (10**2, 10**3, 10**4)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < Fraction(1, 100)


def test_domain():
    with pytest.raises(ValueError):
        variance_general(9)
    with pytest.raises(ValueError):
        variance_equal(1)
    with pytest.raises(ValueError):
        variance_asymptotic(1, 1, 1)


def test_general_at_tau_one():
    p = substitute(variance_general(3), "tau", 1)
    assert p == MultiPoly.parse("1/2*lambda1*lambda2 + 1/3*lambda1^2*lambda2 + 1/3*lambda1*lambda2^2")
