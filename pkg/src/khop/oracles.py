"""Independent computation paths used to cross-check the engine.

Nothing here is fast. The point is to reach the same numbers along routes
that share as little code as possible with :mod:`khop.hopmoments` and
:mod:`khop.hopcumulants`:

* :func:`moment_via_partitions` sums over tuples of partitions, one per
  cell, and integrates chain indicators by enumerating linear extensions.
* :func:`appendix_moment_step` and :func:`appendix_cumulant_step` evaluate
  the written-out low-order recursions term by term.
* :func:`cell_box_integral` integrates over a box by cutting it into the
  elementary cells between consecutive caps and using general polynomial
  substitution for the bounds.
* :func:`quadrature` is a plain midpoint rule.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

from .exactpoly import (
    REGISTRY,
    MultiPoly,
    bound,
    chain_integral,
    definite_integral,
    effective_caps,
    lam,
    rename,
    tau,
)
from .partitions import _partition_blocks

__all__ = [
    "moment_via_partitions",
    "cell_box_integral",
    "appendix_moment_step",
    "appendix_cumulant_step",
    "quadrature",
]


# ---------------------------------------------------------------------------
# partition-tuple moments


def _linear_extensions(nodes: Sequence, preds: dict) -> list[tuple]:
    """All orderings of ``nodes`` compatible with ``preds`` (node -> set of predecessors)."""
    out: list[tuple] = []
    placed: list = []
    remaining = set(nodes)

    def rec():
        if not remaining:
            out.append(tuple(placed))
            return
        for v in sorted(remaining):
            if preds[v] <= set(placed):
                remaining.discard(v)
                placed.append(v)
                rec()
                placed.pop()
                remaining.add(v)

    rec()
    return out


def moment_via_partitions(
    k: int,
    n: int,
    taus: Sequence[str] | None = None,
    lambdas: Sequence[str] | None = None,
) -> MultiPoly:
    """Joint moment as a sum over ``(k-1)``-tuples of partitions of ``{1..n}``.

    Level ``l`` (cell ``l``) carries a partition of the ``n`` paths telling
    which paths share their ``l``-th vertex. Each block is one integration
    variable of intensity ``lambda_l``; path ``i`` forces its variables to
    increase with the level and to stay below ``taus[i]``. Terms whose
    constraints are contradictory (crossing configurations) have no linear
    extension and vanish.

    Parameters
    ----------
    taus : sequence of tau symbols, ascending; defaults to ``tau1..taun``.
    lambdas : intensity symbols; defaults to ``lambda1..lambda_{k-1}``.
    """
    if n > 3 or k > 4 or n < 1 or k < 1:
        raise ValueError("moment_via_partitions supports 1 <= n <= 3 and 1 <= k <= 4")
    taus = list(taus) if taus is not None else [tau(i) for i in range(1, n + 1)]
    lams = list(lambdas) if lambdas is not None else [lam(i) for i in range(1, k)]
    if len(taus) != n:
        raise ValueError("need one tau per argument")
    if k == 1:
        return MultiPoly.const(1)
    levels = k - 1
    parts = _partition_blocks(n)
    total = MultiPoly()
    cache: dict[tuple, MultiPoly] = {}
    for combo in itertools.product(parts, repeat=levels):
        # node (l, b): level l (0-based), block b
        nodes = [(l, b) for l in range(levels) for b in range(len(combo[l]))]
        owner = [{i: b for b, blk in enumerate(combo[l]) for i in blk} for l in range(levels)]
        preds = {v: set() for v in nodes}
        for i in range(n):
            for l in range(1, levels):
                preds[(l, owner[l][i])].add((l - 1, owner[l - 1][i]))
        top_cap = {}
        for b, blk in enumerate(combo[levels - 1]):
            top_cap[(levels - 1, b)] = REGISTRY.tau_min(taus[i] for i in blk)
        weight = MultiPoly.const(1)
        for l in range(levels):
            weight = weight * MultiPoly.var(lams[l]) ** len(combo[l])
        acc = MultiPoly()
        for ext in _linear_extensions(nodes, preds):
            caps = [top_cap.get(v) for v in ext]
            # uncapped nodes are bounded by a later capped node anyway
            last = None
            for j in range(len(caps) - 1, -1, -1):
                if caps[j] is None:
                    caps[j] = last
                else:
                    last = caps[j] if last is None or REGISTRY.tau_less_eq(caps[j], last) else last
            key = tuple(effective_caps(caps))
            if key not in cache:
                cache[key] = chain_integral(MultiPoly.const(1), list(key))
            acc = acc + cache[key]
        total = total + acc * weight
    return total


# ---------------------------------------------------------------------------
# box integration by elementary cells


def cell_box_integral(
    blocks: Sequence[tuple[int, str]],
    evaluator: Callable[[tuple[int, ...]], MultiPoly],
) -> MultiPoly:
    """Integrate a chamber-wise integrand over ``prod_j [0, cap_j]``.

    Same contract as :func:`khop.exactpoly.box_integral`, computed
    differently: every variable is assigned an elementary interval between
    consecutive distinct caps, then an ordering inside each interval; bounds
    are resolved with general substitution.
    """
    l = len(blocks)
    if l == 0:
        return evaluator(())
    caps = sorted({c for _, c in blocks}, key=REGISTRY.tau_rank)
    cap_index = {c: i for i, c in enumerate(caps)}
    choices = [range(cap_index[c] + 1) for _, c in blocks]
    total = MultiPoly()
    for cells in itertools.product(*choices):
        groups: dict[int, list[int]] = {}
        for j, c in enumerate(cells):
            groups.setdefault(c, []).append(j)
        cell_ids = sorted(groups)
        for perms in itertools.product(*(itertools.permutations(groups[c]) for c in cell_ids)):
            order: list[int] = []
            cell_of_pos: list[int] = []
            for c, perm in zip(cell_ids, perms):
                order.extend(perm)
                cell_of_pos.extend([c] * len(perm))
            p = evaluator(tuple(order))
            for pos in range(l, 0, -1):
                c = cell_of_pos[pos - 1]
                hi = MultiPoly.var(caps[c])
                if pos > 1 and cell_of_pos[pos - 2] == c:
                    lo = MultiPoly.var(bound(pos - 1))
                elif c > 0:
                    lo = MultiPoly.var(caps[c - 1])
                else:
                    lo = MultiPoly()
                p = definite_integral(p, bound(pos), lo, hi)
            total = total + p
    return total


# ---------------------------------------------------------------------------
# written-out low-order recursions

# (coefficient, [(block size, [argument indices])...]) per order n
_MOMENT_TERMS = {
    1: [(1, [[0]])],
    2: [(1, [[0, 1]]), (1, [[0], [1]])],
    3: [
        (1, [[0, 1, 2]]),
        (1, [[0, 1], [2]]),
        (1, [[0, 2], [1]]),
        (1, [[0], [1, 2]]),
        (1, [[0], [1], [2]]),
    ],
}

# the fourth-order form is stated for equal arguments only
_CUMULANT_EQUAL_4 = [
    (1, [4]),
    (4, [1, 3]),
    (3, [2, 2]),
    (6, [1, 1, 2]),
    (1, [1, 1, 1, 1]),
]


def _step(level_fn, k: int, coef: int, sizes_caps: list[tuple[int, str]]) -> MultiPoly:
    lam_k = MultiPoly.var(lam(k))

    def evaluator(order):
        sizes = tuple(sizes_caps[j][0] for j in order)
        p = level_fn(k, sizes)
        return rename(p, {tau(i): bound(i) for i in range(1, len(sizes) + 1)})

    return cell_box_integral(sizes_caps, evaluator) * (lam_k ** len(sizes_caps)) * coef


def _taus_for(n: int, taus: Sequence[str] | None) -> list[str]:
    taus = list(taus) if taus is not None else [tau(i) for i in range(1, n + 1)]
    if len(taus) != n:
        raise ValueError("need one tau per argument")
    return taus


def appendix_moment_step(k: int, n: int, taus: Sequence[str] | None = None) -> MultiPoly:
    """Level ``k + 1`` joint moment from the written-out ``n = 1, 2, 3`` expansions.

    Level ``k`` integrands come from :func:`khop.hopmoments.moment_poly`.
    """
    from .hopmoments import moment_poly

    if n not in _MOMENT_TERMS:
        raise ValueError("n must be 1, 2 or 3")
    taus = _taus_for(n, taus)
    total = MultiPoly()
    for coef, blocks in _MOMENT_TERMS[n]:
        sc = [(len(b), REGISTRY.tau_min(taus[i] for i in b)) for b in blocks]
        total = total + _step(lambda kk, s: moment_poly(kk, s, strict=False), k, coef, sc)
    return total


def appendix_cumulant_step(k: int, n: int, taus: Sequence[str] | None = None) -> MultiPoly:
    """Level ``k + 1`` joint cumulant from the written-out ``n = 2, 3, 4`` forms.

    For ``n = 4`` only the equal-argument form is available; ``taus`` must
    then be four copies of one symbol (default ``tau``).
    """
    from .hopcumulants import cumulant_poly

    def level(kk, s):
        return cumulant_poly(kk, s, strict=False)

    total = MultiPoly()
    if n in (2, 3):
        taus = _taus_for(n, taus)
        for coef, blocks in _MOMENT_TERMS[n]:
            sc = [(len(b), REGISTRY.tau_min(taus[i] for i in b)) for b in blocks]
            total = total + _step(level, k, coef, sc)
        return total
    if n == 4:
        taus = list(taus) if taus is not None else ["tau"] * 4
        if len(set(taus)) != 1 or len(taus) != 4:
            raise ValueError("the fourth-order form needs four equal arguments")
        for coef, sizes in _CUMULANT_EQUAL_4:
            total = total + _step(level, k, coef, [(s, taus[0]) for s in sizes])
        return total
    raise ValueError("n must be 2, 3 or 4")


# ---------------------------------------------------------------------------
# numeric quadrature


def quadrature(
    integrand: Callable[..., np.ndarray],
    caps: Sequence[float],
    grid: int = 16,
    rtol: float = 1e-4,
    max_points: int = 2**22,
) -> float:
    """Midpoint rule on ``prod_j [0, caps[j]]`` with grid doubling.

    ``integrand`` takes one broadcastable numpy array per dimension.
    Refinement stops when the relative change drops below ``rtol`` or the
    next grid would exceed ``max_points`` nodes.
    """
    d = len(caps)
    if d == 0 or d > 4:
        raise ValueError("dimension must be 1..4")
    if grid < 2:
        raise ValueError("grid must be at least 2")
    caps = [float(c) for c in caps]

    def rule(m: int) -> float:
        axes = []
        for j, c in enumerate(caps):
            shape = [1] * d
            shape[j] = m
            axes.append(((np.arange(m) + 0.5) * (c / m)).reshape(shape))
        vals = np.broadcast_to(integrand(*axes), (m,) * d)
        return float(vals.sum()) * math.prod(c / m for c in caps)

    m = grid
    prev = rule(m)
    while (2 * m) ** d <= max_points:
        m *= 2
        cur = rule(m)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev
