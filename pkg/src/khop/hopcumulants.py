"""Exact joint cumulants of k-hop counts.

Two families of objects are memoized:

* ``joint_cumulant(k, mults)``: the joint cumulant of ``n = sum(mults)``
  copies of ``sigma_k``, where chain position ``j`` is repeated ``mults[j]``
  times (coincident arguments, no powers).
* ``cumulant(k, powers)``: ``kappa(sigma_k(v_1)^{n_1}, ..., sigma_k(v_p)^{n_p})``.
  Powers are removed by repeated use of the product rule
  ``kappa(A, YZ) = kappa(A, Y, Z) + sum_{S+T=A} kappa(A_S, Y) kappa(A_T, Z)``
  until only joint cumulants with coincident arguments remain.

The recursion from ``k`` to ``k + 1`` has the same partition/box shape as the
moment recursion, with block integrands ``cumulant(k, block sizes)``.
"""
from __future__ import annotations

import math
import threading
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .exactpoly import ChamberPoly, MultiPoly, rename, tau, to_fraction
from .hopmoments import (
    LimitError,
    _check,
    _evaluate,
    lambda_assignment,
    moment_poly,
    recursion_step,
)
from .partitions import bell, moments_to_cumulants

__all__ = [
    "cumulant",
    "cumulant_poly",
    "joint_cumulant",
    "joint_cumulant_poly",
    "power_reduce",
    "cumulant_from_moments",
    "cumulant_at",
    "cumulant_bound",
    "skewness",
    "excess_kurtosis",
    "RatioValue",
]

_lock = threading.RLock()
_flat: dict[tuple[int, tuple[int, ...]], MultiPoly] = {}
_general: dict[tuple[int, tuple[tuple[int, int], ...]], MultiPoly] = {}
_inner: dict[tuple[int, tuple[int, ...]], MultiPoly] = {}

Arg = tuple[int, int]  # (chain position, power)


def power_reduce(args: Sequence[Arg]) -> list[tuple[int, list[tuple[Arg, ...]]]]:
    """Apply the product rule once to the first argument with power >= 2.

    ``args`` lists ``(position, power)`` pairs, one per cumulant argument.
    Returns the expansion as ``[(coefficient, [factor_args, ...]), ...]``
    where each term is the product of the cumulants of its factor argument
    lists. With no power >= 2 the input is returned unchanged.

    Examples
    --------
    ``kappa(X^2) = kappa(X, X) + kappa(X) kappa(X)``:

    >>> power_reduce([(0, 2)])
    [(1, [((0, 1), (0, 1))]), (1, [((0, 1),), ((0, 1),)])]
    """
    args = list(args)
    idx = next((i for i, (_, p) in enumerate(args) if p >= 2), None)
    if idx is None:
        return [(1, [tuple(args)])]
    pos, power = args[idx]
    rest = args[:idx] + args[idx + 1:]
    y = (pos, power - 1)
    z = (pos, 1)
    terms = [(1, [tuple(rest + [y, z])])]
    m = len(rest)
    for r in range(m + 1):
        for s in combinations(range(m), r):
            sset = set(s)
            left = tuple([rest[i] for i in s] + [y])
            right = tuple([rest[i] for i in range(m) if i not in sset] + [z])
            terms.append((1, [left, right]))
    return terms


def _canonical(args: Sequence[Arg]) -> tuple[tuple[Arg, ...], list[int]]:
    """Relabel chain positions to ``0..q-1`` preserving order."""
    positions = sorted({p for p, _ in args})
    relabel = {p: i for i, p in enumerate(positions)}
    return tuple(sorted((relabel[p], e) for p, e in args)), positions


def _general_cumulant(k: int, args: tuple[Arg, ...]) -> MultiPoly:
    """Cumulant of the listed powers, in ``tau1..tauq`` for canonical args."""
    key = (k, args)
    hit = _general.get(key)
    if hit is not None:
        return hit
    if all(p == 1 for _, p in args):
        q = max(pos for pos, _ in args) + 1
        mults = [0] * q
        for pos, _ in args:
            mults[pos] += 1
        result = joint_cumulant_poly(k, mults, strict=False)
    else:
        result = MultiPoly()
        for coef, factors in power_reduce(args):
            term = MultiPoly.const(coef)
            for f in factors:
                term = term * _positioned(k, f)
                if not term:
                    break
            result = result + term
    _general[key] = result
    return result


def _positioned(k: int, args: Sequence[Arg]) -> MultiPoly:
    canon, positions = _canonical(args)
    p = _general_cumulant(k, canon)
    mapping = {tau(i + 1): tau(pos + 1) for i, pos in enumerate(positions)}
    return rename(p, mapping)


def cumulant_poly(k: int, powers: Sequence[int], *, strict: bool = True) -> MultiPoly:
    """Polynomial of ``kappa(sigma_k(v_1)^{n_1}, ...)`` in ``tau1..taup``."""
    powers = _check(k, powers, strict)
    with _lock:
        return _general_cumulant(k, tuple((i, n) for i, n in enumerate(powers)))


def _inner_cumulant(k: int, sizes: tuple[int, ...]) -> MultiPoly:
    key = (k, sizes)
    hit = _inner.get(key)
    if hit is None:
        p = cumulant_poly(k, sizes, strict=False)
        hit = rename(p, {tau(i): f"u{i}" for i in range(1, len(sizes) + 1)})
        _inner[key] = hit
    return hit


def joint_cumulant_poly(k: int, mults: Sequence[int], *, strict: bool = True) -> MultiPoly:
    """Joint cumulant with coincident arguments, in ``tau1..taup``."""
    mults = _check(k, mults, strict)
    key = (k, mults)
    hit = _flat.get(key)
    if hit is not None:
        return hit
    with _lock:
        hit = _flat.get(key)
        if hit is not None:
            return hit
        if k == 1:
            result = MultiPoly.const(1 if sum(mults) == 1 else 0)
        else:
            result = recursion_step(k, mults, lambda sizes: _inner_cumulant(k - 1, sizes))
        _flat[key] = result
        return result


def _chain(p: int) -> tuple[str, ...]:
    return tuple(tau(i) for i in range(1, p + 1))


def cumulant(k: int, powers: Sequence[int], *, strict: bool = True) -> ChamberPoly:
    """``kappa(sigma_k(kr - v_1)^{n_1}, ..., sigma_k(kr - v_p)^{n_p})`` on ``v_1 <= ... <= v_p``.

    With all powers equal to one this is the ordinary joint cumulant.

    Examples
    --------
    >>> str(cumulant(2, [1, 1]))
    'tau1*lambda1'
    """
    powers = _check(k, powers, strict)
    return ChamberPoly(cumulant_poly(k, powers, strict=strict), _chain(len(powers)))


def joint_cumulant(k: int, mults: Sequence[int], *, strict: bool = True) -> ChamberPoly:
    """Joint cumulant of ``sum(mults)`` count copies with coincident arguments.

    ``joint_cumulant(k, [n])`` is the ``n``-th cumulant of ``sigma_k`` at a
    single endpoint.
    """
    mults = _check(k, mults, strict)
    return ChamberPoly(joint_cumulant_poly(k, mults, strict=strict), _chain(len(mults)))


def cumulant_from_moments(k: int, n: int, *, strict: bool = True) -> ChamberPoly:
    """Joint cumulant of ``n`` distinct arguments via moment inversion.

    Independent of the cumulant recursion: it inverts the moment engine
    through the partition-lattice formula.
    """
    _check(k, [1] * n, strict)

    def m(block: tuple[int, ...]) -> MultiPoly:
        p = moment_poly(k, [1] * len(block), strict=False)
        return rename(p, {tau(i + 1): tau(b) for i, b in enumerate(block)})

    poly = moments_to_cumulants(m, n)
    return ChamberPoly(poly, _chain(n))


def cumulant_at(k: int, taus: Sequence, lambdas=1, powers: Sequence[int] | None = None) -> Fraction:
    """Exact joint cumulant at explicit points.

    Without ``powers`` every point is one argument of the joint cumulant and
    coincident points are merged. With ``powers`` the value is
    ``kappa(sigma(taus[0])^{powers[0]}, ...)``.
    """
    if powers is None:
        return _evaluate(joint_cumulant_poly, k, taus, lambdas, None)
    vals = [to_fraction(t) for t in taus]
    if len(set(vals)) != len(vals):
        raise ValueError("with explicit powers the points must be distinct")
    return _evaluate(cumulant_poly, k, taus, lambdas, powers)


def cumulant_bound(k: int, n: int, lam_value, tau_value) -> Fraction:
    """``(2 (lambda + 1) tau)^(1 + (k-2) n) * B_n^(k-2)``."""
    if k < 2:
        raise ValueError("the cumulant bound needs k >= 2")
    lam_value = to_fraction(lam_value)
    tau_value = to_fraction(tau_value)
    base = 2 * (lam_value + 1) * tau_value
    return base ** (1 + (k - 2) * n) * Fraction(bell(n)) ** (k - 2)


class RatioValue(tuple):
    """``(numerator, denominator)`` of a squared shape ratio, plus a float."""

    __slots__ = ()

    def __new__(cls, num: Fraction, den: Fraction, value: float):
        return super().__new__(cls, (num, den, value))

    @property
    def squared(self) -> Fraction:
        return self[0] / self[1]

    @property
    def value(self) -> float:
        return self[2]


def _equal_cumulant(k: int, n: int, lam_value, tau_value) -> Fraction:
    p = joint_cumulant_poly(k, [n], strict=False)
    assignment = {tau(1): to_fraction(tau_value)}
    assignment.update(lambda_assignment(k, lam_value))
    return p.eval(assignment)


def skewness(k: int, lam_value, tau_value) -> RatioValue:
    """Skewness ``c3 / c2^(3/2)`` as the exact pair ``(c3^2, c2^3)`` and a float.

    Examples
    --------
    >>> s = skewness(3, 1, 1)
    >>> s[0], s[1]
    (Fraction(289, 16), Fraction(343, 216))
    """
    c2 = _equal_cumulant(k, 2, lam_value, tau_value)
    if c2 == 0:
        raise ZeroDivisionError("zero variance")
    c3 = _equal_cumulant(k, 3, lam_value, tau_value)
    val = math.copysign(math.sqrt(c3 * c3 / c2**3), c3)
    return RatioValue(c3 * c3, c2**3, val)


def excess_kurtosis(k: int, lam_value, tau_value) -> RatioValue:
    """Excess kurtosis ``c4 / c2^2`` as ``(c4, c2^2)`` and a float."""
    c2 = _equal_cumulant(k, 2, lam_value, tau_value)
    if c2 == 0:
        raise ZeroDivisionError("zero variance")
    c4 = _equal_cumulant(k, 4, lam_value, tau_value)
    return RatioValue(c4, c2 * c2, float(c4 / (c2 * c2)))


_ = LimitError  # re-exported for callers catching engine limits
