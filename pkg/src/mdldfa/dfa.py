"""Total DFAs over small alphabets, restricted to fixed-length binary slices.

States are numbered 0..q-1 and the final states are always the last f of
them, so a machine is fully described by (q, s, transition table, q0, f).
All words are strings over '0'/'1'; a symbol outside the machine's
alphabet (e.g. '1' when s == 1) rejects the word.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .codelen import (
    BigCount,
    BitReader,
    CodeLength,
    DecodeError,
    DomainError,
    ceil_log2,
    data_to_model_cost,
    encode_self_delim,
    self_delim_len,
)

SLICE_WORDS_LIMIT = 1 << 20
# int64 path counts are exact while 2**n fits
_NUMPY_MAX_N = 62


class CapacityError(RuntimeError):
    """A materialization or exhaustive enumeration would exceed its configured bound."""


@dataclass(frozen=True)
class Dfa:
    q: int
    s: int
    delta: tuple[int, ...]
    q0: int = 0
    f: int = 1

    def __post_init__(self):
        if self.q < 1 or self.s < 1:
            raise DomainError(f"need q >= 1 and s >= 1, got q={self.q}, s={self.s}")
        if not 0 <= self.f <= self.q:
            raise DomainError(f"final-state count {self.f} outside [0, {self.q}]")
        if not 0 <= self.q0 < self.q:
            raise DomainError(f"initial state {self.q0} outside [0, {self.q})")
        if len(self.delta) != self.q * self.s:
            raise DomainError(f"transition table has {len(self.delta)} entries, expected {self.q * self.s}")
        if any(not 0 <= t < self.q for t in self.delta):
            raise DomainError("transition target out of range")

    def next(self, state: int, symbol: int) -> int:
        return self.delta[state * self.s + symbol]

    def is_final(self, state: int) -> bool:
        return state >= self.q - self.f

    def run(self, word: str) -> int | None:
        """State reached after reading word, or None if a symbol is outside the alphabet."""
        state = self.q0
        for ch in word:
            sym = ord(ch) - 48
            if not 0 <= sym < self.s:
                return None
            state = self.delta[state * self.s + sym]
        return state

    def accepts(self, word: str) -> bool:
        state = self.run(word)
        return state is not None and self.is_final(state)

    @cached_property
    def _binary_targets(self) -> tuple[np.ndarray, np.ndarray | None]:
        table = np.asarray(self.delta, dtype=np.int64).reshape(self.q, self.s)
        return table[:, 0], (table[:, 1] if self.s >= 2 else None)

    def __repr__(self) -> str:
        return f"Dfa(q={self.q}, s={self.s}, q0={self.q0}, f={self.f}, delta={list(self.delta)})"


def accept(a: Dfa, w: str) -> bool:
    return a.accepts(w)


def universal_dfa(s: int = 2) -> Dfa:
    """The one-state machine accepting every word."""
    return Dfa(1, s, (0,) * s, 0, 1)


def parity_dfa(even: bool = True) -> Dfa:
    """Two-state machine accepting words with an even (or odd) number of 1s."""
    # same table for both; state 1 is final, so start there for even parity
    return Dfa(2, 2, (0, 1, 1, 0), q0=1 if even else 0, f=1)


def empty_dfa(s: int = 2) -> Dfa:
    return Dfa(1, s, (0,) * s, 0, 0)


# ---------------------------------------------------------------------------
# Slice counting, listing and ranking


def completion_counts(a: Dfa, n: int) -> list[np.ndarray]:
    """counts[r][state] = number of binary words of length r leading from state to a final state."""
    if n < 0:
        raise DomainError(f"negative word length {n}")
    dtype = np.int64 if n <= _NUMPY_MAX_N else object
    t0, t1 = a._binary_targets
    current = np.zeros(a.q, dtype=dtype)
    current[a.q - a.f:] = 1
    counts = [current]
    for _ in range(n):
        nxt = current[t0]
        if t1 is not None:
            nxt = nxt + current[t1]
        counts.append(nxt)
        current = nxt
    return counts


def slice_count(a: Dfa, n: int) -> BigCount:
    """|L^n(A)|: the number of accepted binary words of length n."""
    return int(completion_counts(a, n)[n][a.q0])


def slice_words(a: Dfa, n: int, limit: int = SLICE_WORDS_LIMIT) -> list[str]:
    counts = completion_counts(a, n)
    total = int(counts[n][a.q0])
    if total > limit:
        raise CapacityError(f"slice has {total} words, above the limit {limit}")
    out: list[str] = []
    symbols = min(a.s, 2)

    def walk(state: int, prefix: str, remaining: int) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        for sym in range(symbols):
            nxt = a.delta[state * a.s + sym]
            if counts[remaining - 1][nxt]:
                walk(nxt, prefix + "01"[sym], remaining - 1)

    if total:
        walk(a.q0, "", n)
    return out


def _rank_with(a: Dfa, counts: list[np.ndarray], n: int, w: str) -> int:
    if len(w) != n:
        raise DomainError(f"word {w!r} does not have length {n}")
    state = a.q0
    rank = 0
    for i, ch in enumerate(w):
        sym = ord(ch) - 48
        if not 0 <= sym < min(a.s, 2):
            raise DomainError(f"word {w!r} is not in the slice")
        if sym == 1:
            rank += int(counts[n - i - 1][a.delta[state * a.s]])
        state = a.delta[state * a.s + sym]
    if not a.is_final(state):
        raise DomainError(f"word {w!r} is not in the slice")
    return rank


def word_rank(a: Dfa, n: int, w: str) -> BigCount:
    """0-based lexicographic rank of w inside L^n(A)."""
    return _rank_with(a, completion_counts(a, n), n, w)


def word_ranks(a: Dfa, n: int, words: Iterable[str]) -> list[int]:
    """Ranks of many words, sharing one count table."""
    counts = completion_counts(a, n)
    return [_rank_with(a, counts, n, w) for w in words]


def word_unrank(a: Dfa, n: int, rank: int) -> str:
    counts = completion_counts(a, n)
    if not 0 <= rank < int(counts[n][a.q0]):
        raise DomainError(f"rank {rank} outside the slice of size {int(counts[n][a.q0])}")
    state = a.q0
    out = []
    for i in range(n):
        nxt0 = a.delta[state * a.s]
        below = int(counts[n - i - 1][nxt0])
        if rank < below:
            out.append("0")
            state = nxt0
        else:
            rank -= below
            out.append("1")
            state = a.delta[state * a.s + 1]
    return "".join(out)


def slice_mask(a: Dfa, n: int) -> int:
    """Characteristic bitmask of L^n(A): bit int(w, 2) is set iff w is accepted."""
    mask = 0
    for w in slice_words(a, n):
        mask |= 1 << int(w, 2) if n else 1
    return mask


def slice_equivalent(a: Dfa, b: Dfa, n: int) -> bool:
    """True iff L^n(a) == L^n(b), walking reachable state pairs layer by layer.

    -1 stands for the implicit dead state entered on an out-of-alphabet symbol.
    """

    def step(m: Dfa, state: int, sym: int) -> int:
        return -1 if state < 0 or sym >= m.s else m.delta[state * m.s + sym]

    layer = {(a.q0, b.q0)}
    for _ in range(n):
        layer = {(step(a, pa, sym), step(b, pb, sym)) for pa, pb in layer for sym in (0, 1)}
        layer.discard((-1, -1))
    return all(_final_or_dead(a, pa) == _final_or_dead(b, pb) for pa, pb in layer)


def _final_or_dead(a: Dfa, state: int) -> bool:
    return state >= 0 and a.is_final(state)


# ---------------------------------------------------------------------------
# Canonical form, minimization, prefix trees


def _relabel(a: Dfa, order: Sequence[int], finals: set[int]) -> Dfa:
    """Renumber the states listed in order: non-final ones first, finals last, stable."""
    ranked = [st for st in order if st not in finals] + [st for st in order if st in finals]
    new_id = {old: i for i, old in enumerate(ranked)}
    delta = tuple(new_id[a.delta[old * a.s + sym]] for old in ranked for sym in range(a.s))
    return Dfa(len(ranked), a.s, delta, new_id[a.q0], sum(1 for st in ranked if st in finals))


def reachable_bfs(a: Dfa) -> list[int]:
    """States reachable from q0, in BFS order over symbols 0 < 1 < ..."""
    seen = {a.q0}
    order = [a.q0]
    queue = deque([a.q0])
    while queue:
        st = queue.popleft()
        for sym in range(a.s):
            nxt = a.delta[st * a.s + sym]
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def canonicalize(a: Dfa) -> Dfa:
    """Drop unreachable states, number the rest in BFS order, then move finals last."""
    order = reachable_bfs(a)
    finals = {st for st in order if a.is_final(st)}
    return _relabel(a, order, finals)


def minimize_table(table: np.ndarray, final: np.ndarray, q0: int) -> Dfa:
    """Minimal canonical DFA for a transition table (q x s ints) and a boolean final mask.

    Moore refinement runs over every row, reachable or not; canonical
    renumbering of the quotient then drops the unreachable blocks.
    """
    q, s = table.shape
    _, block = np.unique(final.astype(np.int64), return_inverse=True)
    n_blocks = int(block.max()) + 1
    while True:
        key = block.astype(np.int64)
        for sym in range(s):
            key = key * n_blocks + block[table[:, sym]]
        _, block = np.unique(key, return_inverse=True)
        count = int(block.max()) + 1
        if count == n_blocks:
            break
        n_blocks = count
    reps = np.zeros(n_blocks, dtype=np.int64)
    reps[block[::-1]] = np.arange(q - 1, -1, -1)  # first state of each block
    final_blocks = final[reps]
    order = np.concatenate([np.flatnonzero(~final_blocks), np.flatnonzero(final_blocks)])
    pos = np.empty(n_blocks, dtype=np.int64)
    pos[order] = np.arange(n_blocks)
    quotient = pos[block[table[reps[order]]]]
    return canonicalize(Dfa(n_blocks, s, tuple(quotient.ravel().tolist()), int(pos[block[q0]]),
                            int(final_blocks.sum())))


def transition_table(a: Dfa) -> np.ndarray:
    return np.asarray(a.delta, dtype=np.int64).reshape(a.q, a.s)


def final_mask(a: Dfa) -> np.ndarray:
    return np.arange(a.q) >= a.q - a.f


def minimize(a: Dfa) -> Dfa:
    """Minimal language-equivalent DFA in canonical numbering (Moore partition refinement)."""
    return minimize_table(transition_table(a), final_mask(a), a.q0)


def prefix_tree_acceptor(words: Iterable[str] | "DataSample", s: int = 2) -> Dfa:
    """Tree-shaped DFA accepting exactly the given equal-length words, plus one non-final sink."""
    if isinstance(words, DataSample):
        words = words.words
    words = list(words)
    if not words:
        raise DomainError("prefix tree needs at least one word")
    children: list[list[int]] = [[-1] * s]
    leaves = set()
    for w in words:
        node = 0
        for ch in w:
            sym = ord(ch) - 48
            if not 0 <= sym < s:
                raise DomainError(f"symbol {ch!r} outside alphabet of size {s}")
            if children[node][sym] < 0:
                children[node][sym] = len(children)
                children.append([-1] * s)
            node = children[node][sym]
        leaves.add(node)
    sink = len(children)
    q = sink + 1
    delta = []
    for node in range(sink):
        delta.extend(c if c >= 0 else sink for c in children[node])
    delta.extend([sink] * s)
    # raw tree numbering; finals are not yet last, so relabel through BFS order
    raw_final_last = [st for st in range(q) if st not in leaves] + sorted(leaves)
    pos = {st: i for i, st in enumerate(raw_final_last)}
    tree = Dfa(q, s, tuple(pos[delta[st * s + sym]] for st in raw_final_last for sym in range(s)),
               pos[0], len(leaves))
    return canonicalize(tree)


# ---------------------------------------------------------------------------
# Bit-exact self-delimiting encoding


def encode(a: Dfa) -> str:
    """s and q self-delimiting, then q-f, q0 and the q*s transitions in ceil(log q) bits each."""
    if a.f < 1:
        raise DomainError("machines without final states have no encoding (q-f must fit in ceil(log q) bits)")
    width = ceil_log2(a.q)
    parts = [encode_self_delim(a.s), encode_self_delim(a.q)]
    if width:
        parts.append(format(a.q - a.f, f"0{width}b"))
        parts.append(format(a.q0, f"0{width}b"))
        parts.extend(format(t, f"0{width}b") for t in a.delta)
    return "".join(parts)


def encoded_length(q: int, s: int) -> int:
    return self_delim_len(s) + self_delim_len(q) + (q * s + 2) * ceil_log2(q)


def decode(bits: str) -> Dfa:
    reader = BitReader(bits)
    s = reader.read_self_delim()
    q = reader.read_self_delim()
    width = ceil_log2(q)
    pos = reader.pos
    q_minus_f = reader.read(width)
    if q_minus_f >= q:
        raise DecodeError(f"final-state field {q_minus_f} exceeds q-1={q - 1}", pos)
    pos = reader.pos
    q0 = reader.read(width)
    if q0 >= q:
        raise DecodeError(f"initial state {q0} exceeds q-1={q - 1}", pos)
    delta = []
    for _ in range(q * s):
        pos = reader.pos
        t = reader.read(width)
        if t >= q:
            raise DecodeError(f"transition target {t} exceeds q-1={q - 1}", pos)
        delta.append(t)
    if not reader.at_end():
        raise DecodeError(f"{len(bits) - reader.pos} trailing bits", reader.pos)
    return Dfa(q, s, tuple(delta), q0, q - q_minus_f)


def model_cost(q: int, s: int) -> CodeLength:
    """m(q,s) = (q s + 4) log q + 2 log s."""
    if q < 1 or s < 1:
        raise DomainError(f"model_cost needs q, s >= 1, got q={q}, s={s}")
    return (q * s + 4) * math.log2(q) + 2 * math.log2(s)


def mdl_length(a: Dfa, n: int, d: int) -> CodeLength:
    """Two-part length m(q,s) + data_to_model_cost(|L^n(A)|, d, n) for a sample of d words."""
    return model_cost(a.q, a.s) + data_to_model_cost(slice_count(a, n), d, n)


# ---------------------------------------------------------------------------
# Standard enumeration


def block_size(q: int, s: int) -> int:
    """Number of (q,s) machines: q-f and q0 in [0,q) times q**(q*s) tables."""
    return q ** (q * s + 2)


def _splits(max_i: int | None) -> Iterator[tuple[int, int]]:
    i = 2
    while max_i is None or i <= max_i:
        for q in range(1, i):
            yield q, i - q
        i += 1


def _dfa_in_block(q: int, s: int, local: int) -> Dfa:
    tables = q ** (q * s)
    head, table = divmod(local, tables)
    q_minus_f, q0 = divmod(head, q)
    delta = [0] * (q * s)
    for k in range(q * s - 1, -1, -1):
        table, delta[k] = divmod(table, q)
    return Dfa(q, s, tuple(delta), q0, q - q_minus_f)


def standard_enumeration(max_i: int, alphabet: int | None = None,
                         max_states: int | None = None) -> Iterator[tuple[int, Dfa]]:
    """Yield (index, DFA) in order of i = q + s, then q, then (q-f, q0, table) lexicographically.

    Indices are positions in the unfiltered enumeration; alphabet/max_states
    only skip blocks.
    """
    if max_i < 2:
        raise DomainError("standard enumeration starts at i = 2")
    base = 0
    for q, s in _splits(max_i):
        size = block_size(q, s)
        if (alphabet is None or s == alphabet) and (max_states is None or q <= max_states):
            for local in range(size):
                yield base + local, _dfa_in_block(q, s, local)
        base += size


def dfa_at(index: int) -> Dfa:
    if index < 0:
        raise DomainError("enumeration index must be non-negative")
    for q, s in _splits(None):
        size = block_size(q, s)
        if index < size:
            return _dfa_in_block(q, s, index)
        index -= size
    raise AssertionError("unreachable")


def enumeration_index(a: Dfa) -> int:
    base = 0
    for q, s in _splits(None):
        if (q, s) == (a.q, a.s):
            break
        base += block_size(q, s)
    table = 0
    for t in a.delta:
        table = table * a.q + t
    return base + ((a.q - a.f) * a.q + a.q0) * a.q ** (a.q * a.s) + table


# ---------------------------------------------------------------------------
# Samples, finite-set models and the textual format


@dataclass(frozen=True)
class DataSample:
    words: tuple[str, ...]
    n: int

    def __post_init__(self):
        if not self.words:
            raise DomainError("a data sample needs at least one word")
        if any(len(w) != self.n or set(w) - {"0", "1"} for w in self.words):
            raise DomainError(f"every word must be a binary string of length {self.n}")
        if list(self.words) != sorted(set(self.words)):
            raise DomainError("words must be distinct and lexicographically sorted")

    @classmethod
    def of(cls, words: Iterable[str], n: int | None = None) -> "DataSample":
        words = sorted(set(words))
        if n is None:
            n = len(words[0]) if words else 0
        return cls(tuple(words), n)

    @property
    def d(self) -> int:
        return len(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


@dataclass(frozen=True)
class FiniteSetModel:
    """A set M' of length-n words together with the cardinality marker d."""

    members: frozenset[str]
    n: int
    d: int

    def __post_init__(self):
        if self.d > len(self.members):
            raise DomainError("cardinality marker exceeds the number of members")

    @classmethod
    def from_dfa(cls, a: Dfa, n: int, d: int) -> "FiniteSetModel":
        return cls(frozenset(slice_words(a, n)), n, d)

    @property
    def m(self) -> int:
        return len(self.members)


def to_text(a: Dfa) -> str:
    lines = [f"{a.q} {a.s} {a.q0} {a.f}"]
    lines += [f"{st} {sym} {a.delta[st * a.s + sym]}" for st in range(a.q) for sym in range(a.s)]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Dfa:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 4:
        raise DomainError("DFA text must start with a 'q s q0 f' line")
    try:
        q, s, q0, f = map(int, rows[0])
        body = [tuple(map(int, r)) for r in rows[1:]]
    except ValueError as exc:
        raise DomainError(f"non-integer field in DFA text: {exc}") from None
    expected = [(st, sym) for st in range(q) for sym in range(s)]
    if len(body) != len(expected) or any(len(r) != 3 for r in body):
        raise DomainError(f"expected {len(expected)} 'state symbol next' lines")
    if [r[:2] for r in body] != expected:
        raise DomainError("transition lines must be in lexicographic (state, symbol) order")
    return Dfa(q, s, tuple(r[2] for r in body), q0, f)
