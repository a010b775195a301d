"""Exact joint moments of k-hop counts.

``moment(k, mults)`` is ``E[prod_j sigma_k(kr - v_j)^{n_j}]`` on the chamber
``v_1 <= ... <= v_p``, returned as a polynomial in the chain symbols
``tau1..taup`` and the intensities ``lambda1..lambda_{k-1}``. The step from
``k`` to ``k + 1`` sums over set partitions of the ``n = sum(mults)`` formal
arguments; each block is integrated over ``[0, tau_hat]`` with ``tau_hat``
the smallest argument in the block, against intensity ``lambda_k``.
"""
from __future__ import annotations

import threading
import warnings
from collections import Counter
from fractions import Fraction
from typing import Sequence

from .exactpoly import (
    ChamberPoly,
    MultiPoly,
    box_integral,
    lam,
    rename,
    tau,
    to_fraction,
)
from .partitions import _partition_blocks, stirling2

__all__ = [
    "MomentKey",
    "LimitError",
    "UnsortedTauWarning",
    "moment",
    "moment_poly",
    "moment_at",
    "moment_bound",
    "prepare",
    "group_taus",
    "lambda_assignment",
    "MAX_K",
    "MAX_N",
]

MAX_K = 5
MAX_N = 6

MomentKey = tuple  # (k, mults)


class LimitError(ValueError):
    """Raised when a request exceeds the desk-scale limits."""


class UnsortedTauWarning(UserWarning):
    """Issued when evaluation points were not given in ascending order."""


_lock = threading.RLock()
_memo: dict[tuple[int, tuple[int, ...]], MultiPoly] = {}
_inner: dict[tuple[int, tuple[int, ...]], MultiPoly] = {}


def _check(k: int, mults: Sequence[int], strict: bool) -> tuple[int, ...]:
    mults = tuple(int(m) for m in mults)
    if k < 1:
        raise ValueError("k must be at least 1")
    if not mults or any(m < 1 for m in mults):
        raise ValueError("multiplicities must be positive")
    if strict and (k > MAX_K or sum(mults) > MAX_N):
        raise LimitError(f"k <= {MAX_K} and sum(mults) <= {MAX_N} (pass strict=False to override)")
    if len(mults) > 12 or sum(mults) > 16:
        raise LimitError("registry supports at most 12 chain symbols and 16 formal arguments")
    return mults


def block_signatures(mults: Sequence[int]) -> Counter:
    """Group the partitions of the formal arguments by their block content.

    The formal argument list repeats chain position ``g`` ``mults[g]`` times.
    A block is summarized by ``(size, cap)`` where ``cap`` is the smallest
    chain position it touches. Returns ``Counter({sorted blocks: count})``.
    """
    groups = [g for g, n in enumerate(mults) for _ in range(n)]
    tally: Counter = Counter()
    for blocks in _partition_blocks(len(groups)):
        sig = tuple(sorted((len(b), min(groups[i] for i in b)) for b in blocks))
        tally[sig] += 1
    return tally


def recursion_step(k: int, mults: tuple[int, ...], inner) -> MultiPoly:
    """One step of the partition recursion from level ``k - 1`` to ``k``.

    ``inner(sizes)`` must return the level ``k - 1`` integrand in the bound
    variables ``u1..ul`` for blocks whose values are ordered as given.
    """
    lam_new = MultiPoly.var(lam(k - 1))
    total = MultiPoly()
    for sig, count in block_signatures(mults).items():
        blocks = [(size, tau(g + 1)) for size, g in sig]

        def evaluator(order, sig=sig):
            return inner(tuple(sig[j][0] for j in order))

        term = box_integral(blocks, evaluator)
        total = total + term * (lam_new ** len(sig)) * count
    return total


def _to_bound(p: MultiPoly, p_len: int) -> MultiPoly:
    return rename(p, {tau(i): f"u{i}" for i in range(1, p_len + 1)})


def _inner_moment(k: int, sizes: tuple[int, ...]) -> MultiPoly:
    key = (k, sizes)
    hit = _inner.get(key)
    if hit is None:
        hit = _to_bound(moment_poly(k, sizes, strict=False), len(sizes))
        _inner[key] = hit
    return hit


def moment_poly(k: int, mults: Sequence[int], *, strict: bool = True) -> MultiPoly:
    """Memoized moment polynomial in ``tau1..taup`` and ``lambda1..``."""
    mults = _check(k, mults, strict)
    key = (k, mults)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    with _lock:
        hit = _memo.get(key)
        if hit is not None:
            return hit
        if k == 1:
            result = MultiPoly.const(1)
        else:
            result = recursion_step(k, mults, lambda sizes: _inner_moment(k - 1, sizes))
        _memo[key] = result
        return result


def moment(k: int, mults: Sequence[int], *, strict: bool = True) -> ChamberPoly:
    """Joint moment ``E[prod_j sigma_k(kr - v_j)^{n_j}]`` on ``v_1 <= ... <= v_p``.

    Parameters
    ----------
    k : int
        Hop count.
    mults : sequence of int
        Power attached to each argument, in chamber order.
    strict : bool
        Enforce the desk-scale limits ``k <= 5`` and ``sum(mults) <= 6``.

    Examples
    --------
    >>> str(moment(2, [1, 1]))
    'tau1*lambda1 + tau1*tau2*lambda1^2'
    """
    mults = _check(k, mults, strict)
    poly = moment_poly(k, mults, strict=strict)
    return ChamberPoly(poly, tuple(tau(i) for i in range(1, len(mults) + 1)))


def prepare(k_max: int, n_max: int) -> None:
    """Fill the memo for every ``k <= k_max`` and every composition of ``n <= n_max``."""
    from itertools import product

    with _lock:
        for k in range(1, k_max + 1):
            for n in range(1, n_max + 1):
                for cuts in product([0, 1], repeat=n - 1):
                    mults, run = [], 1
                    for c in cuts:
                        if c:
                            mults.append(run)
                            run = 1
                        else:
                            run += 1
                    mults.append(run)
                    moment_poly(k, mults, strict=False)


def group_taus(taus: Sequence) -> tuple[list[Fraction], list[int], bool]:
    """Sort evaluation points and merge ties into multiplicities.

    Returns ``(distinct ascending values, multiplicities, was_sorted)``.
    """
    vals = [to_fraction(t) for t in taus]
    if any(v < 0 for v in vals):
        raise ValueError("evaluation points must be nonnegative")
    was_sorted = all(a <= b for a, b in zip(vals, vals[1:]))
    vals.sort()
    distinct: list[Fraction] = []
    mults: list[int] = []
    for v in vals:
        if distinct and distinct[-1] == v:
            mults[-1] += 1
        else:
            distinct.append(v)
            mults.append(1)
    return distinct, mults, was_sorted


def lambda_assignment(k: int, lambdas) -> dict[str, Fraction]:
    """Map a scalar or a length ``k-1`` (or ``k``) vector to ``lambda1..``."""
    if isinstance(lambdas, (list, tuple)):
        vals = [to_fraction(v) for v in lambdas]
        if len(vals) not in (k - 1, k):
            raise ValueError(f"expected {k - 1} intensities, got {len(vals)}")
        vals = vals[: k - 1]
    else:
        vals = [to_fraction(lambdas)] * (k - 1)
    if any(v < 0 for v in vals):
        raise ValueError("intensities must be nonnegative")
    return {lam(i): v for i, v in enumerate(vals, start=1)}


def _evaluate(poly_fn, k: int, taus: Sequence, lambdas, weights: Sequence[int] | None):
    if weights is None:
        distinct, mults, was_sorted = group_taus(taus)
    else:
        pairs = sorted(zip((to_fraction(t) for t in taus), weights), key=lambda x: x[0])
        was_sorted = [p[0] for p in pairs] == [to_fraction(t) for t in taus]
        distinct, mults = [], []
        for v, w in pairs:
            if v < 0:
                raise ValueError("evaluation points must be nonnegative")
            if distinct and distinct[-1] == v:
                mults[-1] += w
            else:
                distinct.append(v)
                mults.append(w)
    if not was_sorted:
        warnings.warn("evaluation points were sorted into ascending order", UnsortedTauWarning,
                      stacklevel=3)
    poly = poly_fn(k, mults, strict=False)
    assignment = {tau(i): v for i, v in enumerate(distinct, start=1)}
    assignment.update(lambda_assignment(k, lambdas))
    return poly.eval(assignment)


def moment_at(k: int, taus: Sequence, lambdas=1, powers: Sequence[int] | None = None) -> Fraction:
    """Exact value of the joint moment at explicit points.

    Coincident points are merged into multiplicities. Unsorted input is
    sorted and an :class:`UnsortedTauWarning` is issued.

    Examples
    --------
    >>> moment_at(3, [1, 1, 1])
    Fraction(49, 8)
    """
    return _evaluate(moment_poly, k, taus, lambdas, powers)


def moment_bound(k: int, n: int, lam_value, tau_value) -> Fraction:
    """Upper bound ``(sum_l S(n,l) (lambda tau)^l)^(k-1)`` on the ``n``-th moment."""
    x = to_fraction(lam_value) * to_fraction(tau_value)
    if x < 0:
        raise ValueError("lambda and tau must be nonnegative")
    if n == 0:
        return Fraction(1)
    poisson = sum(stirling2(n, l) * x**l for l in range(1, n + 1))
    return Fraction(poisson) ** (k - 1)
