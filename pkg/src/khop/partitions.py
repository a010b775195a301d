"""Set partitions and the moment/cumulant transforms built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

__all__ = [
    "SetPartition",
    "set_partitions",
    "iter_set_partitions",
    "stirling2",
    "bell",
    "cumulants_to_moments",
    "moments_to_cumulants",
]

MAX_N = 8


@dataclass(frozen=True)
class SetPartition:
    """Partition of ``{1..n}`` into blocks sorted by their smallest element."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = [i for b in self.blocks for i in b]
        if sorted(seen) != list(range(1, len(seen) + 1)) or any(not b for b in self.blocks):
            raise ValueError("blocks must be nonempty and cover 1..n exactly once")

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "SetPartition":
        """Build from a restricted-growth string (0-based block labels)."""
        blocks: list[list[int]] = []
        for i, a in enumerate(rgs, start=1):
            if a == len(blocks):
                blocks.append([])
            blocks[a].append(i)
        return cls(tuple(tuple(b) for b in blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, i: int) -> int:
        """0-based index of the block holding element ``i``."""
        for j, b in enumerate(self.blocks):
            if i in b:
                return j
        raise KeyError(i)

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)


def _rgs(n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    a = [0] * n
    # restricted-growth strings in lexicographic order
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == max(a[:i]) + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0


@lru_cache(maxsize=None)
def _partition_blocks(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Blocks as 0-based index tuples, without the n <= 8 guard (internal)."""
    out = []
    for rgs in _rgs(n):
        blocks: list[list[int]] = []
        for i, a in enumerate(rgs):
            if a == len(blocks):
                blocks.append([])
            blocks[a].append(i)
        out.append(tuple(tuple(b) for b in blocks))
    return tuple(out)


def iter_set_partitions(n: int) -> Iterator[SetPartition]:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must lie in 1..{MAX_N}, got {n}")
    for rgs in _rgs(n):
        yield SetPartition.from_rgs(rgs)


def set_partitions(n: int) -> list[SetPartition]:
    """All partitions of ``{1..n}`` in restricted-growth (canonical) order.

    Examples
    --------
    >>> len(set_partitions(4))
    15
    """
    return list(iter_set_partitions(n))


@lru_cache(maxsize=None)
def stirling2(n: int, l: int) -> int:
    """Stirling number of the second kind ``S(n, l)``."""
    if n < 0 or l < 0:
        raise ValueError("arguments must be nonnegative")
    if n == l:
        return 1
    if l == 0 or l > n:
        return 0
    return l * stirling2(n - 1, l) + stirling2(n - 1, l - 1)


def bell(n: int) -> int:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return sum(stirling2(n, l) for l in range(n + 1))


def cumulants_to_moments(kappa: Callable[[tuple[int, ...]], object], n: int):
    """Joint moment of ``n`` variables from their joint cumulants.

    ``kappa`` receives a sorted tuple of 1-based indices and returns the joint
    cumulant of that subset. Any ring type supporting ``+`` and ``*`` works.
    """
    total = 0
    for blocks in _partition_blocks(n):
        term = 1
        for b in blocks:
            term = term * kappa(tuple(i + 1 for i in b))
        total = total + term
    return total


def moments_to_cumulants(m: Callable[[tuple[int, ...]], object], n: int):
    """Joint cumulant of ``n`` variables from joint moments of subsets.

    Uses ``sum_pi (-1)^(l-1) (l-1)! prod_j m(pi_j)`` with ``l`` the number of
    blocks. (The sign ``(-1)^(l-1)`` is the standard partition-lattice Möbius
    value; it reproduces constant Poisson cumulants.)
    """
    total = 0
    for blocks in _partition_blocks(n):
        l = len(blocks)
        term = (-1) ** (l - 1) * math.factorial(l - 1)
        for b in blocks:
            term = term * m(tuple(i + 1 for i in b))
        total = total + term
    return total
