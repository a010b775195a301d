from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from khop.exactpoly import rename
from khop.hopcumulants import cumulant_poly, joint_cumulant_poly
from khop.hopmoments import moment_poly
from khop.oracles import (
    appendix_cumulant_step,
    appendix_moment_step,
    moment_via_partitions,
    quadrature,
)


@pytest.mark.parametrize("k, n", [(k, n) for k in range(1, 5) for n in range(1, 4)])
def test_partition_oracle(k, n):
    assert moment_via_partitions(k, n) == moment_poly(k, [1] * n, strict=False)


def test_partition_oracle_limits():
    with pytest.raises(ValueError):
        moment_via_partitions(5, 1)
    with pytest.raises(ValueError):
        moment_via_partitions(2, 4)


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_appendix_moment_step(k, n):
    assert appendix_moment_step(k, n) == moment_poly(k + 1, [1] * n)


@pytest.mark.parametrize("n", [2, 3])
def test_appendix_cumulant_step(n):
    assert appendix_cumulant_step(2, n) == cumulant_poly(3, [1] * n)


@pytest.mark.parametrize("k", [2, 3])
def test_appendix_cumulant_fourth_order(k):
    assert appendix_cumulant_step(k, 4) == rename(joint_cumulant_poly(k + 1, [4]), {"tau1": "tau"})
    with pytest.raises(ValueError):
        appendix_cumulant_step(k, 4, ["tau1", "tau2", "tau3", "tau4"])


def test_quadrature():
    assert quadrature(lambda x, y: np.minimum(x, y), [1.0, 1.0], rtol=1e-6) == pytest.approx(1 / 3, abs=1e-4)
    assert quadrature(lambda x: x**2, [2.0]) == pytest.approx(8 / 3, rel=1e-4)
    with pytest.raises(ValueError):
        quadrature(lambda *a: 1.0, [1.0] * 5)


def test_quadrature_against_moment_integral():
    # E[sigma_3(v)] = lambda1 lambda2 * area{0 < u1 < u2 < v}: the engine's chain integral
    v = 0.7
    num = quadrature(lambda a, b: (a < b).astype(float), [v, v], rtol=1e-5)
    exact = moment_poly(3, [1]).eval({"tau1": Fraction(7, 10), "lambda1": 1, "lambda2": 1})
    assert num == pytest.approx(float(exact), rel=1e-2)
