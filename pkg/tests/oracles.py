"""Independent reference computations used by the tests.

Nothing here imports the package: each oracle recomputes its quantity from
first principles (itertools, math.comb, plain dictionaries).
"""
from __future__ import annotations

import functools
import itertools
import math


def words(n: int) -> list[str]:
    return ["".join(t) for t in itertools.product("01", repeat=n)]


def run(delta: dict, q0: int, finals: set, w: str, s: int = 2) -> bool:
    state = q0
    for ch in w:
        sym = int(ch)
        if sym >= s:
            return False
        state = delta[state, sym]
    return state in finals


def binary_dfas(q: int):
    """Every (q, 2) machine as (q_minus_f, q0, table), in (q-f, q0, table digits) order."""
    for qf in range(q):
        for q0 in range(q):
            for table in itertools.product(range(q), repeat=2 * q):
                yield qf, q0, table


def dfa_slice(q: int, qf: int, q0: int, table, n: int) -> frozenset:
    delta = {(st, sym): table[2 * st + sym] for st in range(q) for sym in range(2)}
    finals = set(range(qf, q))
    return frozenset(w for w in words(n) if run(delta, q0, finals, w))


def block_offset(q: int, s: int) -> int:
    """Position of the first (q, s) machine in the unfiltered standard enumeration."""
    offset = 0
    i = 2
    while True:
        for qq in range(1, i):
            ss = i - qq
            if (qq, ss) == (q, s):
                return offset
            offset += qq ** (qq * ss + 2)
        i += 1


def raw_program_bits(q: int, s: int = 2) -> float:
    # coder header (1 bit) + (qs+4) log q + 2 log s
    return 1 + (q * s + 4) * math.log2(q) + 2 * math.log2(s)


def ceil_log2_comb(l: int, d: int) -> int:
    c = math.comb(l, d)
    k = 0
    while (1 << k) < c:
        k += 1
    return k


@functools.lru_cache(maxsize=4)
def machine_slices(n: int, max_states: int) -> tuple[tuple[int, float, frozenset], ...]:
    """(enumeration index, raw program bits, slice) for every binary machine with q <= max_states."""
    out = []
    for q in range(1, max_states + 1):
        bits = raw_program_bits(q)
        base = block_offset(q, 2)
        for local, (qf, q0, table) in enumerate(binary_dfas(q)):
            out.append((base + local, bits, dfa_slice(q, qf, q0, table, n)))
    return tuple(out)


def brute_force_optimum(sample: list[str], n: int, max_states: int = 3, alpha: float = math.inf):
    """(total, enumeration index) minimizing program bits + ceil log C(l, d); first index on ties."""
    d = len(sample)
    target = set(sample)
    best = None
    for index, bits, sl in machine_slices(n, max_states):
        if bits > alpha or not target <= sl:
            continue
        total = bits + ceil_log2_comb(len(sl), d)
        if best is None or total < best[0]:
            best = (total, index)
    return best


def elias_like_len(k: int) -> int:
    """ceil(log k) + 2 ceil(log log k) + 1 with the k <= 2 conventions, via floats."""
    if k == 1:
        return 1
    lk = math.ceil(math.log2(k) - 1e-12)
    llk = 0 if k <= 2 else math.ceil(math.log2(math.log2(k)) - 1e-12)
    return lk + 2 * llk + 1


def lex_subsets(l: int, d: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(l), d))
