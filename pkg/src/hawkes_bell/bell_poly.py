"""Set partitions, Bell polynomials and moment/cumulant conversions.

Every polynomial here is evaluated over a generic commutative ring: the
arguments only need ``+``, ``*`` and multiplication by Python integers. Floats,
:class:`fractions.Fraction` and :class:`hawkes_bell.exp_poly.ExpPoly` all work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, TypeVar

R = TypeVar("R")

MAX_ORDER = 12
MAX_BELL_NUMBER = 20

FACTORIALS = tuple(math.factorial(i) for i in range(MAX_BELL_NUMBER + 1))


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{1, ..., n}`` into nonempty disjoint blocks.

    Blocks are stored as sorted tuples, ordered by their smallest element.
    """

    blocks: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def _check_order(n: int, lo: int = 1, hi: int = MAX_ORDER) -> None:
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"order must be an int, got {type(n).__name__}")
    if not lo <= n <= hi:
        raise ValueError(f"order {n} outside [{lo}, {hi}]")


def _partitions_of(items: Sequence[int]) -> Iterator[list[list[int]]]:
    # restricted growth: item i joins an existing block or opens a new one
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _partitions_of(rest):
        yield [[first]] + sub
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]


def partitions_of_set(items: Sequence[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Yield all set partitions of ``items`` as tuples of sorted blocks."""
    for blocks in _partitions_of(list(items)):
        yield tuple(sorted(tuple(sorted(b)) for b in blocks))


def enumerate_partitions(n: int) -> Iterator[SetPartition]:
    """Yield every partition of ``{1, ..., n}`` exactly once (``1 <= n <= 12``)."""
    _check_order(n)
    for blocks in partitions_of_set(range(1, n + 1)):
        yield SetPartition(blocks)


def bell_number(n: int) -> int:
    """Number of set partitions of an ``n``-element set, via the Bell triangle."""
    _check_order(n, 0, MAX_BELL_NUMBER)
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _integer_partitions(n: int, k: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    # non-increasing tuples of k positive parts summing to n
    if max_part is None:
        max_part = n
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(min(n - k + 1, max_part), 0, -1):
        if first * k < n:
            break
        for rest in _integer_partitions(n - first, k - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def block_type_counts(n: int, k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Set partitions of ``{1..n}`` into ``k`` blocks, grouped by block sizes.

    Returns ``((sizes, count), ...)`` where ``count`` is the exact number of set
    partitions whose sorted block sizes are ``sizes``.
    """
    out = []
    for sizes in _integer_partitions(n, k):
        denom = 1
        for s in sizes:
            denom *= FACTORIALS[s]
        for s in set(sizes):
            denom *= FACTORIALS[sizes.count(s)]
        out.append((sizes, FACTORIALS[n] // denom))
    return tuple(out)


def _product(factors: Sequence[R]) -> R:
    acc = factors[0]
    for f in factors[1:]:
        acc = acc * f
    return acc


def partial_bell(n: int, k: int, args: Sequence[R]) -> R:
    """Partial Bell polynomial ``B_{n,k}(a_1, ..., a_{n-k+1})``.

    Sums ``prod(a_{|block|})`` over the set partitions of ``{1..n}`` with
    exactly ``k`` blocks.
    """
    _check_order(n)
    _check_order(k, 1, n)
    if len(args) != n - k + 1:
        raise ValueError(f"B_{{{n},{k}}} needs {n - k + 1} arguments, got {len(args)}")
    total = None
    for sizes, count in block_type_counts(n, k):
        term = _product([args[s - 1] for s in sizes])
        term = term * count if count != 1 else term
        total = term if total is None else total + term
    return total


def complete_bell(n: int, args: Sequence[R]) -> R:
    """Complete Bell polynomial ``B_n(a_1, ..., a_n) = sum_k B_{n,k}``."""
    _check_order(n)
    if len(args) != n:
        raise ValueError(f"B_{n} needs {n} arguments, got {len(args)}")
    total = partial_bell(n, 1, args)
    for k in range(2, n + 1):
        total = total + partial_bell(n, k, args[: n - k + 1])
    return total


def moments_from_cumulants(kappas: Sequence[float]) -> list[float]:
    """Raw moments ``E[X^j]``, ``j = 1..n``, from cumulants ``kappa_1..kappa_n``."""
    n = len(kappas)
    _check_order(n)
    return [complete_bell(j, list(kappas[:j])) for j in range(1, n + 1)]


def cumulants_from_moments(moments: Sequence[float]) -> list[float]:
    """Inverse of :func:`moments_from_cumulants`.

    ``kappa_n = sum_k (k-1)! (-1)^(k-1) B_{n,k}(m_1, ..., m_{n-k+1})``.
    """
    n = len(moments)
    _check_order(n)
    out = []
    for j in range(1, n + 1):
        acc = 0
        for k in range(1, j + 1):
            sign = -1 if k % 2 == 0 else 1
            acc = acc + sign * FACTORIALS[k - 1] * partial_bell(j, k, list(moments[: j - k + 1]))
        out.append(acc)
    return out
