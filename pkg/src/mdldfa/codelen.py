"""Code-length primitives measured in bits.

Code lengths are plain floats (base-2 logarithm units); exact counts are
Python ints. Rounding up to whole bits happens only where a concrete
codeword is produced.
"""
from __future__ import annotations

import math

CodeLength = float
BigCount = int

EXACT_BINOMIAL_LIMIT = 10_000


class DomainError(ValueError):
    """An argument lies outside the domain of a code-length function."""


def log2_int(x: int) -> float:
    """log2 of an arbitrarily large positive integer, accurate to double precision."""
    if x <= 0:
        raise DomainError(f"log2 of non-positive integer {x}")
    b = x.bit_length()
    if b <= 1000:
        return math.log2(x)
    shift = b - 64
    return shift + math.log2(x >> shift)


def ceil_log2(k: int) -> int:
    """Exact ceil(log2 k) for k >= 1, with ceil(log2 1) = 0."""
    if k < 1:
        raise DomainError(f"ceil_log2 needs k >= 1, got {k}")
    return (k - 1).bit_length()


def ceil_log2_log2(k: int) -> int:
    """Exact ceil(log2 log2 k); defined as 0 for k <= 2."""
    if k < 1:
        raise DomainError(f"ceil_log2_log2 needs k >= 1, got {k}")
    j = 0
    while k > 1 << (1 << j):
        j += 1
    return j


def log2_binomial(l: int, d: int) -> CodeLength:
    """log2 C(l, d).

    Exact through a big-integer binomial for l <= 10**4, otherwise an
    fsum of per-factor logarithms over the shorter side.
    """
    if l < 0 or d < 0 or d > l:
        raise DomainError(f"log2_binomial needs 0 <= d <= l, got l={l}, d={d}")
    k = min(d, l - d)
    if k == 0:
        return 0.0
    if l <= EXACT_BINOMIAL_LIMIT:
        return log2_int(math.comb(l, d))
    return math.fsum(math.log2(l - i) - math.log2(i + 1) for i in range(k))


def entropy(p: float) -> CodeLength:
    """Binary Shannon entropy H(p) in bits, for 0 < p < 1."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"entropy needs 0 < p < 1, got {p}")
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def data_to_model_cost(l: int, d: int, n: int) -> CodeLength:
    """Approximate index cost of d words inside an l-word slice of length-n words.

    1 + 2 log n at the extremes d = 1 or d = l; 2 log n + l H(d/l) in
    between, reflecting d to l - d above l/2.
    """
    if n < 1:
        raise DomainError(f"word length must be positive, got {n}")
    if d < 1 or d > l:
        raise DomainError(f"data_to_model_cost needs 1 <= d <= l, got l={l}, d={d}")
    if d == 1 or d == l:
        return 1.0 + 2.0 * math.log2(n)
    if 2 * d > l:
        d = l - d
    return 2.0 * math.log2(n) + l * entropy(d / l)


def self_delim_len(k: int) -> int:
    """Length of the self-delimiting code of k >= 1:
    ceil(log k) + 2 ceil(log log k) + 1."""
    if k < 1:
        raise DomainError(f"self_delim_len needs k >= 1, got {k}")
    return ceil_log2(k) + 2 * ceil_log2_log2(k) + 1


def encode_self_delim(k: int) -> str:
    """Prefix-free codeword for k >= 1 whose length is self_delim_len(k).

    Layout: k=1 -> "0", k=2 -> "10"; otherwise j+1 ones and a zero
    (j = ceil(log log k)), then L - 2**(j-1) - 1 in j-1 bits
    (L = ceil(log k)), then k-1 in L bits.
    """
    if k < 1:
        raise DomainError(f"cannot encode {k}; self-delimiting integers start at 1")
    if k == 1:
        return "0"
    if k == 2:
        return "10"
    length = ceil_log2(k)
    j = ceil_log2_log2(k)
    out = "1" * (j + 1) + "0"
    if j > 1:
        out += format(length - (1 << (j - 1)) - 1, f"0{j - 1}b")
    return out + format(k - 1, f"0{length}b")


class BitReader:
    """Sequential reader over a '0'/'1' string; errors report the bit position."""

    def __init__(self, bits: str):
        if any(c not in "01" for c in bits):
            raise DecodeError("bitstring contains characters other than 0/1", 0)
        self.bits = bits
        self.pos = 0

    def read(self, width: int) -> int:
        if width == 0:
            return 0
        end = self.pos + width
        if end > len(self.bits):
            raise DecodeError(f"needed {width} bits, only {len(self.bits) - self.pos} left", self.pos)
        value = int(self.bits[self.pos:end], 2)
        self.pos = end
        return value

    def read_self_delim(self) -> int:
        start = self.pos
        ones = 0
        while True:
            if self.pos >= len(self.bits):
                raise DecodeError("truncated self-delimiting integer", start)
            bit = self.bits[self.pos]
            self.pos += 1
            if bit == "0":
                break
            ones += 1
        if ones == 0:
            return 1
        if ones == 1:
            return 2
        j = ones - 1
        length = (1 << (j - 1)) + 1 + self.read(j - 1)
        k = self.read(length) + 1
        if ceil_log2(k) != length:
            raise DecodeError(f"non-canonical self-delimiting integer {k}", start)
        return k

    def at_end(self) -> bool:
        return self.pos == len(self.bits)


class DecodeError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at bit {position})")
        self.position = position


def decode_self_delim(bits: str) -> tuple[int, int]:
    """Decode one self-delimiting integer; returns (value, bits consumed)."""
    reader = BitReader(bits)
    value = reader.read_self_delim()
    return value, reader.pos
