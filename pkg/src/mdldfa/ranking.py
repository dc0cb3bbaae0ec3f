"""Enumerative coding of d-subsets of [0, l) in lexicographic order.

A subset is ranked through the complement map x -> l-1-x, which turns
lexicographic order into reverse colexicographic order, where the
combinatorial number system gives the rank directly:

    lex_rank(S) = C(l, d) - 1 - sum_i C(l-1-x_i, d-i)

(x sorted descending after the map). Unranking steps binomials
incrementally, so it costs O(l) big-integer multiply/divides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .codelen import EXACT_BINOMIAL_LIMIT, CodeLength, DomainError, log2_binomial
from .dfa import CapacityError


@dataclass(frozen=True)
class SubsetIndex:
    rank: int
    l: int
    d: int

    def __post_init__(self):
        if not 0 <= self.rank < math.comb(self.l, self.d):
            raise DomainError(f"rank {self.rank} outside [0, C({self.l},{self.d}))")


def _check_capacity(l: int) -> None:
    if l > EXACT_BINOMIAL_LIMIT:
        raise CapacityError(f"exact subset ranks are limited to l <= {EXACT_BINOMIAL_LIMIT}, got l={l}")


def _colex_rank(elements_desc: Sequence[int], d: int) -> int:
    """sum_{i} C(c_i, d-i) for c_0 > c_1 > ... (combinatorial number system)."""
    total = 0
    k = d
    for c in elements_desc:
        if c >= k:
            total += math.comb(c, k)
        k -= 1
    return total


def subset_rank(l: int, member_ranks: Sequence[int]) -> SubsetIndex:
    """Lexicographic rank of a strictly increasing subset of [0, l) among all d-subsets."""
    _check_capacity(l)
    d = len(member_ranks)
    prev = -1
    for x in member_ranks:
        if x <= prev or x >= l:
            raise DomainError("member ranks must be strictly increasing and below l")
        prev = x
    total = math.comb(l, d)
    # complement map reverses order: the largest original element becomes the smallest
    mapped = [l - 1 - x for x in member_ranks]  # strictly decreasing
    return SubsetIndex(total - 1 - _colex_rank(mapped, d), l, d)


def subset_unrank(l: int, d: int, rank: int) -> list[int]:
    """Inverse of subset_rank: the rank-th d-subset of [0, l) in lexicographic order."""
    _check_capacity(l)
    total = math.comb(l, d)
    if not 0 <= rank < total:
        raise DomainError(f"rank {rank} outside [0, C({l},{d}))")
    r = total - 1 - rank
    mapped = []
    c = l - 1
    k = d
    binom = math.comb(c, k) if k else 0
    while k > 0:
        # largest c with C(c, k) <= r
        while binom > r:
            # C(c-1, k) = C(c, k) * (c - k) / c
            binom = binom * (c - k) // c
            c -= 1
        mapped.append(c)
        r -= binom
        # C(c-1, k-1) = C(c, k) * k / c
        binom = binom * k // c if c else 0
        c -= 1
        k -= 1
    return sorted(l - 1 - x for x in mapped)


def subset_code_len(l: int, d: int) -> CodeLength:
    """ceil(log2 C(l, d)): the fixed length of the lexicographic subset index."""
    if l < 0 or d < 0 or d > l:
        raise DomainError(f"subset_code_len needs 0 <= d <= l, got l={l}, d={d}")
    if l <= EXACT_BINOMIAL_LIMIT:
        return float((math.comb(l, d) - 1).bit_length())
    return float(math.ceil(log2_binomial(l, d) - 1e-9))
