import math

import pytest

from mdldfa.codelen import DomainError, log2_binomial
from mdldfa.dfa import CapacityError
from mdldfa.ranking import SubsetIndex, subset_code_len, subset_rank, subset_unrank
from oracles import ceil_log2_comb, lex_subsets


def test_rank_examples():
    assert subset_rank(4, [0, 1]).rank == 0
    assert subset_rank(4, [2, 3]).rank == 5


def test_rank_matches_lexicographic_listing_exhaustively():
    for l in range(0, 9):
        for d in range(0, l + 1):
            listing = lex_subsets(l, d)
            for expected, sub in enumerate(listing):
                assert subset_rank(l, list(sub)).rank == expected
                assert tuple(subset_unrank(l, d, expected)) == sub


def test_unrank_rank_identity_on_pairs_of_six():
    for sub in lex_subsets(6, 2):
        idx = subset_rank(6, list(sub))
        assert tuple(subset_unrank(6, 2, idx.rank)) == sub


def test_rank_at_moderate_size():
    l = 300
    sub = list(range(0, l, 7))
    idx = subset_rank(l, sub)
    assert subset_unrank(l, len(sub), idx.rank) == sub
    assert 0 <= idx.rank < math.comb(l, len(sub))


def test_rank_domain_and_capacity():
    with pytest.raises(DomainError):
        subset_rank(4, [1, 1])
    with pytest.raises(DomainError):
        subset_rank(4, [2, 1])
    with pytest.raises(DomainError):
        subset_rank(4, [4])
    with pytest.raises(DomainError):
        subset_unrank(4, 2, 6)
    with pytest.raises(DomainError):
        SubsetIndex(6, 4, 2)
    with pytest.raises(CapacityError):
        subset_rank(20_000, [0])


def test_code_len_examples():
    assert subset_code_len(4, 2) == 3
    assert subset_code_len(9, 9) == 0
    assert abs(subset_code_len(2 ** 15, 2 ** 14) - (2 ** 15 - 8)) <= 2
    with pytest.raises(DomainError):
        subset_code_len(3, 4)


def test_code_len_is_ceiling_of_log_binomial():
    for l in range(0, 70):
        for d in range(0, l + 1):
            c = subset_code_len(l, d)
            assert c == ceil_log2_comb(l, d)
            assert log2_binomial(l, d) - 1e-9 <= c < log2_binomial(l, d) + 1
