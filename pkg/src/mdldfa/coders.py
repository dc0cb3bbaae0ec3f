"""Computable upper bounds on description lengths.

Every bound here is the minimum over a small, fixed, versioned family of
description methods. Each method is identified on the wire by a
self-delimiting coder id, whose length is charged to the bound, so every
materialized codeword is a real prefix-free description that decodes back
to its object.

Data coders describe a sample D given (A, d, n):
  1 subset-index  ceil(log C(l,d)) bit lexicographic index of D in L^n(A)
  2 lex-prefix    D is the first or last d words of L^n(A)
  3 bitmap        run-length (or enumerative) code of D's membership bitmap
  4 literal       d and the d words verbatim
Model coders describe a DFA:
  1 dfa-model-cost  m(q,s) bits
  2 named-model     index into a fixed dictionary of distinguished machines
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .codelen import (
    EXACT_BINOMIAL_LIMIT,
    BitReader,
    CodeLength,
    DecodeError,
    DomainError,
    encode_self_delim,
    entropy,
    log2_binomial,
    self_delim_len,
)
from .dfa import (
    DataSample,
    Dfa,
    model_cost,
    parity_dfa,
    slice_count,
    slice_equivalent,
    universal_dfa,
    word_ranks,
    word_unrank,
)
from .ranking import subset_code_len, subset_rank, subset_unrank

CODER_FAMILY_VERSION = "1.0"


@dataclass(frozen=True)
class CoderId:
    id: int
    name: str
    version: str = CODER_FAMILY_VERSION

    @property
    def header_bits(self) -> int:
        return self_delim_len(self.id)

    @property
    def header(self) -> str:
        return encode_self_delim(self.id)

    def as_record(self) -> dict:
        return {"id": self.id, "name": self.name, "version": self.version}


SUBSET_INDEX = CoderId(1, "subset-index")
LEX_PREFIX = CoderId(2, "lex-prefix")
BITMAP = CoderId(3, "bitmap")
LITERAL = CoderId(4, "literal")
DATA_CODERS: tuple[CoderId, ...] = (SUBSET_INDEX, LEX_PREFIX, BITMAP, LITERAL)

RAW_MODEL = CoderId(1, "dfa-model-cost")
NAMED_MODEL = CoderId(2, "named-model")
MODEL_CODERS: tuple[CoderId, ...] = (RAW_MODEL, NAMED_MODEL)

# unconditional description of D given (d, n)
VIA_UNIVERSAL = CoderId(1, "data-given-universal")
TWO_PART = CoderId(2, "two-part")

MAX_HEADER_BITS = max(c.header_bits for c in DATA_CODERS)

DEFAULT_NAMED: tuple[tuple[str, Dfa], ...] = (
    ("universal", universal_dfa()),
    ("parity-even", parity_dfa(True)),
    ("parity-odd", parity_dfa(False)),
)


@dataclass(frozen=True)
class KhatResult:
    bits: CodeLength
    coder: CoderId
    payload: str | None = None
    detail: str = ""

    @property
    def codeword(self) -> str | None:
        """Header plus payload, when the payload was materialized."""
        return None if self.payload is None else self.coder.header + self.payload


@dataclass(frozen=True)
class ComplexityOracle:
    """Stipulated complexities for designated objects, used where no coder can certify them."""

    table: Mapping[str, Fraction] = field(default_factory=dict)

    def __getitem__(self, label: str) -> Fraction:
        try:
            return self.table[label]
        except KeyError:
            raise DomainError(f"oracle has no value for {label!r}") from None


# ---------------------------------------------------------------------------
# Data coders


def _runs(ranks: Sequence[int], l: int) -> tuple[int, list[int]]:
    """First bit and run lengths of the l-bit membership bitmap with ones at ranks."""
    runs: list[int] = []
    first = 1 if ranks and ranks[0] == 0 else 0
    pos = 0
    i = 0
    while i < len(ranks):
        start = ranks[i]
        if start > pos:
            runs.append(start - pos)
        j = i
        while j + 1 < len(ranks) and ranks[j + 1] == ranks[j] + 1:
            j += 1
        runs.append(ranks[j] - start + 1)
        pos = ranks[j] + 1
        i = j + 1
    if pos < l:
        runs.append(l - pos)
    return first, runs


def _bitmap_code(ranks: Sequence[int], l: int, d: int, materialize: bool) -> tuple[int, str | None, str]:
    """Mode bit, then either run lengths (last run implied by l) or the enumerative index."""
    first, runs = _runs(ranks, l)
    run_bits = 2 + self_delim_len(len(runs)) + sum(self_delim_len(r) for r in runs[:-1])
    enum_bits = 1 + int(subset_code_len(l, d))
    if run_bits <= enum_bits:
        payload = None
        if materialize:
            payload = "0" + str(first) + encode_self_delim(len(runs)) + "".join(encode_self_delim(r) for r in runs[:-1])
        return run_bits, payload, "runs"
    payload = None
    if materialize and l <= EXACT_BINOMIAL_LIMIT:
        width = enum_bits - 1
        payload = "1" + (format(subset_rank(l, ranks).rank, f"0{width}b") if width else "")
    return enum_bits, payload, "enumerative"


def khat_from_ranks(ranks: Sequence[int], l: int, n: int, words: Sequence[str] | None = None,
                    coders: Iterable[CoderId] = DATA_CODERS, materialize: bool = True) -> KhatResult:
    """Minimum over the data coders, given the sorted ranks of D inside an l-element model.

    Ties go to the smallest coder id.
    """
    d = len(ranks)
    if d == 0:
        raise DomainError("empty sample")
    best: KhatResult | None = None
    for coder in sorted(coders, key=lambda c: c.id):
        h = coder.header_bits
        if coder == SUBSET_INDEX:
            width = int(subset_code_len(l, d))
            payload = None
            if materialize and l <= EXACT_BINOMIAL_LIMIT:
                payload = format(subset_rank(l, ranks).rank, f"0{width}b") if width else ""
            cand = KhatResult(h + width, coder, payload)
        elif coder == LEX_PREFIX:
            if ranks[0] == 0 and ranks[-1] == d - 1:
                flag = "00"
            elif ranks[0] == l - d and ranks[-1] == l - 1:
                flag = "01"
            else:
                continue
            body = flag + encode_self_delim(d)
            cand = KhatResult(h + len(body), coder, body if materialize else None,
                              "first" if flag == "00" else "last")
        elif coder == BITMAP:
            bits, payload, mode = _bitmap_code(ranks, l, d, materialize)
            cand = KhatResult(h + bits, coder, payload, mode)
        elif coder == LITERAL:
            payload = None
            if materialize and words is not None:
                payload = encode_self_delim(d) + "".join(words)
            cand = KhatResult(h + d * n + self_delim_len(d), coder, payload)
        else:
            raise DomainError(f"unknown data coder {coder}")
        if best is None or cand.bits < best.bits:
            best = cand
    if best is None:
        raise DomainError("no applicable coder")
    return best


def khat_data_given_model(sample: DataSample, a: Dfa, n: int | None = None,
                          coders: Iterable[CoderId] = DATA_CODERS, materialize: bool = True) -> KhatResult:
    """Upper bound on K(D | A, d, n). Raises DomainError when D is not inside L^n(A)."""
    n = sample.n if n is None else n
    if n != sample.n:
        raise DomainError(f"sample words have length {sample.n}, not {n}")
    l = slice_count(a, n)
    ranks = word_ranks(a, n, sample.words)
    return khat_from_ranks(ranks, l, n, sample.words, coders, materialize)


def decode_data(codeword: str, a: Dfa, d: int, n: int) -> DataSample:
    """Inverse of a materialized data codeword, given (A, d, n)."""
    reader = BitReader(codeword)
    coder_id = reader.read_self_delim()
    l = slice_count(a, n)

    def words_at(ranks: Iterable[int]) -> DataSample:
        return DataSample(tuple(word_unrank(a, n, r) for r in ranks), n)

    def read_index() -> list[int]:
        width = int(subset_code_len(l, d))
        return subset_unrank(l, d, reader.read(width))

    if coder_id == SUBSET_INDEX.id:
        out = words_at(read_index())
    elif coder_id == LEX_PREFIX.id:
        flag = reader.read(2)
        if reader.read_self_delim() != d:
            raise DecodeError("lex-prefix count disagrees with d", reader.pos)
        if flag == 0:
            out = words_at(range(d))
        elif flag == 1:
            out = words_at(range(l - d, l))
        else:
            raise DecodeError(f"unknown lex-prefix flag {flag}", reader.pos)
    elif coder_id == BITMAP.id:
        if reader.read(1) == 1:
            out = words_at(read_index())
        else:
            value = reader.read(1)
            n_runs = reader.read_self_delim()
            lengths = [reader.read_self_delim() for _ in range(n_runs - 1)]
            lengths.append(l - sum(lengths))
            if lengths[-1] <= 0:
                raise DecodeError("run lengths exceed the slice size", reader.pos)
            ranks, pos = [], 0
            for length in lengths:
                if value:
                    ranks.extend(range(pos, pos + length))
                pos += length
                value ^= 1
            out = words_at(ranks)
    elif coder_id == LITERAL.id:
        count = reader.read_self_delim()
        words = []
        for _ in range(count):
            start = reader.pos
            words.append(format(reader.read(n), f"0{n}b") if n else "")
            if not a.accepts(words[-1]):
                raise DecodeError("literal word outside the model", start)
        out = DataSample(tuple(words), n)
    else:
        raise DecodeError(f"unknown data coder id {coder_id}", 0)
    if not reader.at_end():
        raise DecodeError("trailing bits after data codeword", reader.pos)
    if out.d != d:
        raise DecodeError(f"decoded {out.d} words, expected {d}", reader.pos)
    return out


# ---------------------------------------------------------------------------
# Model complexity


def khat_model(a: Dfa, named: Sequence[tuple[str, Dfa]] | None = DEFAULT_NAMED,
               n: int | None = None) -> KhatResult:
    """Shortest model description in the family: raw m(q,s) or a named-dictionary index.

    Dictionary membership is slice equivalence at length n; without n only
    identical machines match.
    """
    best = KhatResult(RAW_MODEL.header_bits + model_cost(a.q, a.s), RAW_MODEL)
    for index, (name, ref) in enumerate(named or ()):
        same = slice_equivalent(a, ref, n) if n is not None else a == ref
        if same:
            bits = NAMED_MODEL.header_bits + self_delim_len(index + 1)
            if bits < best.bits:
                best = KhatResult(bits, NAMED_MODEL, encode_self_delim(index + 1), name)
            break
    return best


def raw_program_bits(a: Dfa) -> CodeLength:
    """Length of the plain m(q,s) model description including its coder header."""
    return RAW_MODEL.header_bits + model_cost(a.q, a.s)


# ---------------------------------------------------------------------------
# Randomness deficiency


def deficiency_lower_bound(sample: DataSample, a: Dfa, n: int | None = None,
                           khat: KhatResult | None = None) -> CodeLength:
    """log2 C(l, d) - Khat(D | A, d, n); may be slightly negative."""
    n = sample.n if n is None else n
    if khat is None:
        khat = khat_data_given_model(sample, a, n, materialize=False)
    return log2_binomial(slice_count(a, n), sample.d) - khat.bits


def deficiency_entropy_form(sample: DataSample, a: Dfa, n: int | None = None,
                            khat: KhatResult | None = None) -> CodeLength:
    """l H(d/l) - Khat(D | A, d, n), the entropy approximation of the same quantity."""
    n = sample.n if n is None else n
    if khat is None:
        khat = khat_data_given_model(sample, a, n, materialize=False)
    l = slice_count(a, n)
    d = sample.d
    lead = 0.0 if d in (0, l) else l * entropy(d / l)
    return lead - khat.bits


def khat_unconditional(sample: DataSample, two_part: Iterable[tuple[CodeLength, Dfa]] = ()) -> KhatResult:
    """Upper bound on K(D | d, n).

    Minimum of the data coders against {0,1}^n and of two-part codes
    program_bits + Khat(D | A, d, n) over the supplied (program_bits, A) pairs.
    """
    n = sample.n
    direct = khat_data_given_model(sample, universal_dfa(), n, materialize=False)
    best = KhatResult(VIA_UNIVERSAL.header_bits + direct.bits, VIA_UNIVERSAL, None, direct.coder.name)
    for program_bits, a in two_part:
        inner = khat_data_given_model(sample, a, n, materialize=False)
        bits = TWO_PART.header_bits + program_bits + inner.bits
        if bits < best.bits:
            best = KhatResult(bits, TWO_PART, None, inner.coder.name)
    return best
