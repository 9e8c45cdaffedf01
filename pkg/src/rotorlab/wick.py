"""Isserlis (Wick) pairing sums.

Two layers live here.  ``pairings``/``wick_sum`` enumerate perfect matchings
of an explicit label sequence by recursive first-element pairing, which
visits every matching exactly once; they power the site-elimination step of
the sphere moment engine.

``vector_moment`` evaluates E prod (x_a . x_b) for centred jointly-Gaussian
vectors in R^n with covariance C per component (full covariance C tensor
identity).  Expanding every dot product into components and applying
Isserlis pairwise, a matching of the component slots only survives when its
per-slot covariances allow it, and the surviving component deltas chain the
factors into closed loops, each loop contributing one free component index
(a factor n).  The implementation walks those loops directly: a chain is
opened at the first remaining factor, extended one factor at a time, and
closed against its starting end, so each matching is generated once and the
loop count is known for free.  States repeat heavily, hence the memo.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence, TypeVar

T = TypeVar("T")

Pair0 = tuple[int, int]  # 0-based site pair
CovMatrix = tuple[tuple[Fraction, ...], ...]


def pairings(labels: Sequence[T]) -> Iterator[list[tuple[T, T]]]:
    """Yield all perfect matchings of the labels (none when the count is odd)."""
    items = list(labels)
    if len(items) % 2:
        return
    if not items:
        yield []
        return
    first = items[0]
    rest = items[1:]
    for k, partner in enumerate(rest):
        head = (first, partner)
        for tail in pairings(rest[:k] + rest[k + 1:]):
            yield [head] + tail


def wick_sum(labels: Sequence[T], inner: Callable[[T, T], object], one=1):
    """Sum over all pairings of the product of ``inner`` values.

    Returns ``0 * one`` for an odd label count (the odd integral vanishes).
    ``one`` is the multiplicative identity of whatever ring ``inner`` maps
    into; the default works for plain numbers.
    """
    if len(labels) % 2:
        return one * 0
    total = one * 0
    for matching in pairings(labels):
        product = one
        for a, b in matching:
            product = product * inner(a, b)
        total = total + product
    return total


def double_factorial(k: int) -> int:
    """(k)!! with (-1)!! = 1; the number of pairings of k+1 labels is k!!."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def _freeze_cov(cov: Sequence[Sequence[object]]) -> CovMatrix:
    return tuple(tuple(Fraction(x) for x in row) for row in cov)


@lru_cache(maxsize=None)
def _chain_value(
    remaining: tuple[Pair0, ...],
    chain: Pair0 | None,
    cov: CovMatrix,
    n: int,
) -> Fraction:
    # `remaining` is sorted, so remaining[0] is the designated loop opener;
    # fixing its orientation prevents counting each loop in both directions.
    if chain is None:
        if not remaining:
            return Fraction(1)
        return _chain_value(remaining[1:], remaining[0], cov, n)
    p, q = chain
    total = n * cov[p][q] * _chain_value(remaining, None, cov, n)
    index = 0
    while index < len(remaining):
        a, b = remaining[index]
        count = 1
        while index + count < len(remaining) and remaining[index + count] == (a, b):
            count += 1
        rest = remaining[:index] + remaining[index + 1:]  # drop one copy, stays sorted
        if cov[q][a]:
            total += count * cov[q][a] * _chain_value(rest, (p, b), cov, n)
        if cov[q][b]:
            total += count * cov[q][b] * _chain_value(rest, (p, a), cov, n)
        index += count
    return total


def vector_moment(
    factors: Sequence[Pair0],
    cov: Sequence[Sequence[object]],
    n: int,
) -> Fraction:
    """E prod (x_a . x_b) over centred Gaussians with covariance cov (x) I_n.

    ``factors`` lists 0-based site pairs with multiplicity.  Exact.
    """
    return _chain_value(tuple(sorted(factors)), None, _freeze_cov(cov), n)


def clear_caches() -> None:
    _chain_value.cache_clear()
