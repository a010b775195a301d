"""Closed-form variance of the k-hop count and its large-intensity limit."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator

from .exactpoly import MultiPoly, lam, to_fraction

__all__ = [
    "compositions",
    "variance_general",
    "second_moment_general",
    "variance_equal",
    "second_moment_equal",
    "variance_asymptotic",
]


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Weak compositions of ``total`` into ``parts`` nonnegative integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _general_sum(k: int, l_min: int, tau_symbol: str) -> MultiPoly:
    if not 2 <= k <= 8:
        raise ValueError("variance_general supports 2 <= k <= 8")
    t = MultiPoly.var(tau_symbol)
    lams = [MultiPoly.var(lam(i)) for i in range(1, k)]
    total = MultiPoly()
    for l in range(l_min, k):
        inner = MultiPoly()
        for js in compositions(k - 1 - l, l + 1):
            # positions i_1 < ... < i_l of the "shared" vertices
            pos, acc = [], 0
            for q in range(l):
                acc += js[q] + 1
                pos.append(acc)
            term = MultiPoly.const(math.prod(math.comb(2 * j, j) for j in js))
            for q in range(1, k):
                term = term * (lams[q - 1] if q in pos else lams[q - 1] ** 2)
            inner = inner + term
        deg = 2 * k - 2 - l
        total = total + inner * (t**deg) * Fraction(1, math.factorial(deg))
    return total


def variance_general(k: int, tau_symbol: str = "tau") -> MultiPoly:
    """Variance with distinct intensities ``lambda1..lambda_{k-1}``.

    Sums over the number ``l >= 1`` of vertices shared by two paths and over
    the gaps between them; each intensity enters squared when the vertex is
    not shared and once when it is.

    Examples
    --------
    >>> str(variance_general(2))
    'tau*lambda1'
    """
    return _general_sum(k, 1, tau_symbol)


def second_moment_general(k: int, tau_symbol: str = "tau") -> MultiPoly:
    """Second moment: the same sum including ``l = 0`` (the squared mean)."""
    return _general_sum(k, 0, tau_symbol)


def _equal_sum(k: int, l_max: int, lam_value, tau_value):
    if not 2 <= k <= 12:
        raise ValueError("variance_equal supports 2 <= k <= 12")
    if isinstance(lam_value, str) or isinstance(tau_value, str):
        lt = (MultiPoly.var(lam_value) if isinstance(lam_value, str)
              else MultiPoly.const(to_fraction(lam_value)))
        lt = lt * (MultiPoly.var(tau_value) if isinstance(tau_value, str)
                   else MultiPoly.const(to_fraction(tau_value)))
    else:
        lt = to_fraction(lam_value) * to_fraction(tau_value)
    total = 0
    for l in range(l_max + 1):
        # Gamma((k-1-l)/2 + 1) / Gamma((k-1+l)/2 + 1), a telescoping product
        ratio = Fraction(1)
        for i in range(1, l + 1):
            ratio /= Fraction(k - 1 - l, 2) + i
        coef = Fraction(math.comb(k - 1, l), math.factorial(k - 1)) * ratio
        total = total + (lt ** (k - 1 + l)) * coef
    return total


def variance_equal(k: int, lam_value=1, tau_value="tau"):
    """Variance when all intensities equal ``lam_value``.

    Either argument may be a symbol name, in which case a polynomial is
    returned; with two rationals the result is a ``Fraction``.

    Examples
    --------
    >>> str(variance_equal(3))
    '1/2*tau^2 + 2/3*tau^3'
    >>> variance_equal(5, 1, 1)
    Fraction(41, 252)
    """
    return _equal_sum(k, k - 2, lam_value, tau_value)


def second_moment_equal(k: int, lam_value=1, tau_value="tau"):
    """Second moment at equal intensities (the sum extended to ``l = k-1``)."""
    return _equal_sum(k, k - 1, lam_value, tau_value)


def variance_asymptotic(k: int, lam_value, tau_value) -> Fraction:
    """Leading term ``(2 lambda tau)^(2k-3) / (2 (2k-3)!)``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    x = 2 * to_fraction(lam_value) * to_fraction(tau_value)
    return x ** (2 * k - 3) / (2 * math.factorial(2 * k - 3))
