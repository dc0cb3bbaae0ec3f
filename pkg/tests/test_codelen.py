import math

import pytest
from hypothesis import given, strategies as st

from mdldfa.codelen import (
    BitReader,
    DecodeError,
    DomainError,
    ceil_log2,
    data_to_model_cost,
    decode_self_delim,
    encode_self_delim,
    entropy,
    log2_binomial,
    self_delim_len,
)
from oracles import ceil_log2_comb, elias_like_len


def test_log2_binomial_examples():
    assert log2_binomial(4, 2) == pytest.approx(math.log2(6))
    assert log2_binomial(10, 0) == 0.0
    assert log2_binomial(10, 10) == 0.0


def test_log2_binomial_ceiling_matches_big_integers():
    for l in range(65):
        for d in range(l + 1):
            assert math.ceil(log2_binomial(l, d) - 1e-12) == ceil_log2_comb(l, d), (l, d)


def test_log2_binomial_symmetric_and_monotone():
    for l in (7, 20, 63):
        for d in range(l + 1):
            assert log2_binomial(l, d) == pytest.approx(log2_binomial(l, l - d))
        half = [log2_binomial(l, d) for d in range(l // 2 + 1)]
        assert half == sorted(half)


def test_log2_binomial_large_scale_within_entropy_bounds():
    l, d = 2 ** 15, 2 ** 13
    v = log2_binomial(l, d)
    upper = l * entropy(0.25)
    assert upper - 0.5 * math.log2(l) - 2 <= v <= upper


def test_log2_binomial_summation_agrees_with_exact():
    # the summation branch, compared against the exact value at a size where both exist
    l, d = 12_000, 3_000
    c = math.comb(l, d)
    shift = c.bit_length() - 64
    exact = shift + math.log2(c >> shift)
    assert log2_binomial(l, d) == pytest.approx(exact, abs=1e-6)


def test_log2_binomial_domain():
    with pytest.raises(DomainError):
        log2_binomial(3, 4)
    with pytest.raises(DomainError):
        log2_binomial(3, -1)


def test_entropy_values():
    assert entropy(0.5) == 1.0
    assert entropy(0.25) == pytest.approx(0.8113, abs=1e-4)
    assert entropy(0.25) == pytest.approx(entropy(0.75))
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            entropy(bad)


def test_entropy_concave_on_grid():
    grid = [(k + 1) / 1001 for k in range(1000)]
    for a, b in zip(grid, grid[2:]):
        assert entropy((a + b) / 2) >= (entropy(a) + entropy(b)) / 2 - 1e-12


def test_data_to_model_cost_cases():
    assert data_to_model_cost(8, 8, 3) == pytest.approx(1 + 2 * math.log2(3))
    assert data_to_model_cost(8, 1, 3) == pytest.approx(1 + 2 * math.log2(3))
    n = 10
    assert data_to_model_cost(2 ** (n - 1), 2 ** (n - 2), n) == pytest.approx(2 * math.log2(n) + 2 ** (n - 1))
    assert data_to_model_cost(8, 6, 3) == data_to_model_cost(8, 2, 3)
    for l in range(3, 30):
        for d in range(2, l - 1):
            assert data_to_model_cost(l, d, 5) == pytest.approx(data_to_model_cost(l, l - d, 5))
    with pytest.raises(DomainError):
        data_to_model_cost(8, 0, 3)
    with pytest.raises(DomainError):
        data_to_model_cost(8, 9, 3)


def test_self_delim_len_examples():
    assert self_delim_len(1) == 1
    assert self_delim_len(2) == 2
    assert self_delim_len(16) == 9
    with pytest.raises(DomainError):
        self_delim_len(0)


def test_self_delim_len_matches_formula():
    for k in range(1, 5000):
        assert self_delim_len(k) == elias_like_len(k), k


@given(st.integers(min_value=1, max_value=2 ** 80))
def test_self_delim_round_trip(k):
    code = encode_self_delim(k)
    assert len(code) == self_delim_len(k)
    assert decode_self_delim(code + "1011") == (k, len(code))


def test_self_delim_prefix_free():
    codes = [encode_self_delim(k) for k in range(1, 600)]
    for a in codes:
        for b in codes:
            assert a == b or not b.startswith(a)


def test_self_delim_rejects_truncation_and_noncanonical():
    code = encode_self_delim(1000)
    with pytest.raises(DecodeError):
        decode_self_delim(code[:-1])
    # header announcing a 2-bit value followed by k=2, which needs only 1 bit
    bad = "110" + "01"
    with pytest.raises(DecodeError):
        decode_self_delim(bad)


def test_bit_reader_reports_position():
    r = BitReader("101")
    assert r.read(2) == 2
    with pytest.raises(DecodeError) as exc:
        r.read(2)
    assert exc.value.position == 2
    with pytest.raises(DecodeError):
        BitReader("10x")


def test_ceil_log2():
    assert [ceil_log2(k) for k in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]
