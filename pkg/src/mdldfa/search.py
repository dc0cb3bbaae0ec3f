"""MDL search over DFA models: greedy state merging, dovetailed enumeration,
and the direct (deficiency-driven) variant.

Every procedure emits a SearchTrace of explanations whose two-part totals
strictly decrease (for the direct method, whose deficiency keys strictly
decrease) and whose program lengths never exceed alpha.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from .codelen import CodeLength, DomainError, log2_binomial
from .coders import (
    DEFAULT_NAMED,
    khat_data_given_model,
    khat_model,
    raw_program_bits,
)
from .dfa import (
    DataSample,
    Dfa,
    encode,
    final_mask,
    minimize_table,
    prefix_tree_acceptor,
    slice_count,
    standard_enumeration,
    transition_table,
)
from .ranking import subset_code_len


class SwitchRule(str, Enum):
    PLAIN = "plain"
    SAFE = "safe"


class Termination(str, Enum):
    BUDGET = "budget"
    FIXPOINT = "fixpoint"
    EXHAUSTED = "exhausted"


class EmptyTraceError(RuntimeError):
    """No explanation within alpha was produced."""

    def __init__(self, message: str, t0_reached: bool = False):
        super().__init__(message)
        self.t0_reached = t0_reached


@dataclass(frozen=True)
class Explanation:
    model: Any
    program_bits: CodeLength
    data_bits: CodeLength
    step: int = 0
    deficiency: CodeLength | None = None
    coder_id: int | None = None
    index: int | None = None

    @property
    def total(self) -> CodeLength:
        return self.program_bits + self.data_bits


@dataclass
class SearchTrace:
    explanations: list[Explanation]
    mode: str
    alpha: CodeLength
    terminated_reason: Termination
    steps: int = 0
    rule: SwitchRule | None = None

    @property
    def final(self) -> Explanation:
        return self.explanations[-1]

    def records(self) -> list[dict]:
        out = []
        for e in self.explanations:
            out.append({
                "step": e.step,
                "q": getattr(e.model, "q", None),
                "s": getattr(e.model, "s", None),
                "program_bits": e.program_bits,
                "data_bits": e.data_bits,
                "total": e.total,
                "deficiency_lower_bound": e.deficiency,
                "coder_id": e.coder_id,
            })
        return out

    def to_csv(self, header_comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_comments:
            buf.write(f"# {line}\n")
        writer = csv.DictWriter(buf, fieldnames=list(TRACE_FIELDS), lineterminator="\n")
        writer.writeheader()
        for rec in self.records():
            writer.writerow({k: _fmt(v) for k, v in rec.items()})
        return buf.getvalue()

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=False) + "\n" for rec in self.records())


TRACE_FIELDS = ("step", "q", "s", "program_bits", "data_bits", "total", "deficiency_lower_bound", "coder_id")


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 9))
    return "" if v is None else v


def explain(sample: DataSample, a: Dfa, program_bits: CodeLength, step: int = 0,
            index: int | None = None, with_deficiency: bool = True, l: int | None = None) -> Explanation:
    """Two-part explanation of the sample by A: program plus ceil(log C(l,d)) index bits."""
    if l is None:
        l = slice_count(a, sample.n)
    deficiency = coder_id = None
    if with_deficiency:
        khat = khat_data_given_model(sample, a, sample.n, materialize=False)
        deficiency = log2_binomial(l, sample.d) - khat.bits
        coder_id = khat.coder.id
    return Explanation(a, program_bits, subset_code_len(l, sample.d), step, deficiency, coder_id, index)


def check_mdl_contract(trace: SearchTrace, sample: DataSample) -> list[str]:
    """Violations of the MDL-algorithm contract; an empty list means the trace complies."""
    problems = []
    prev: Explanation | None = None
    for i, e in enumerate(trace.explanations):
        if e.program_bits > trace.alpha + 1e-9:
            problems.append(f"#{i}: program_bits {e.program_bits:.3f} > alpha {trace.alpha}")
        if isinstance(e.model, Dfa) and not all(e.model.accepts(w) for w in sample.words):
            problems.append(f"#{i}: model rejects a sample word")
        if prev is not None:
            if trace.mode == "direct":
                if not e.deficiency < prev.deficiency:
                    problems.append(f"#{i}: deficiency key did not strictly decrease")
            elif not e.total < prev.total:
                problems.append(f"#{i}: total {e.total:.3f} not below {prev.total:.3f}")
        prev = e
    return problems


# ---------------------------------------------------------------------------
# Safe switching


def safe_switch(old: Explanation, new: Explanation, n: int, d: int,
                old_shortest_bits: CodeLength | None = None,
                named=DEFAULT_NAMED) -> bool:
    """Accept new over old only if its total drops by the old program's excess
    over its shortest model code plus 10 log log C(2^n, d).

    old_shortest_bits defaults to khat_model(old.model) at length n.
    """
    spread = log2_binomial(2 ** n, d)
    if spread <= 1:
        raise DomainError(f"log C(2^{n}, {d}) = {spread:.3f} <= 1 leaves the margin undefined")
    margin = 10 * math.log2(spread)
    if old_shortest_bits is None:
        old_shortest_bits = khat_model(old.model, named, n).bits
    slack = old.program_bits - old_shortest_bits
    return new.total <= old.total - slack - margin


# ---------------------------------------------------------------------------
# Greedy state merging


def merge_states(a: Dfa, i: int, j: int, table: np.ndarray | None = None,
                 final: np.ndarray | None = None) -> Dfa:
    """Quotient of A after merging states i and j and every pair forced by determinism.

    A merged class is final if any member is; the result is minimized and canonical.
    table and final may be passed in to avoid rebuilding them for every pair.
    """
    if table is None:
        table = transition_table(a)
    if final is None:
        final = final_mask(a)
    parent = list(range(a.q))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    delta = a.delta
    pending = [(i, j)]
    while pending:
        x, y = pending.pop()
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        parent[max(rx, ry)] = min(rx, ry)
        for sym in range(a.s):
            pending.append((delta[x * a.s + sym], delta[y * a.s + sym]))
    parent = np.asarray(parent)
    while True:
        grand = parent[parent]
        if np.array_equal(grand, parent):
            break
        parent = grand
    merged_final = np.zeros(a.q, dtype=bool)
    np.logical_or.at(merged_final, parent, final)
    return minimize_table(parent[table], merged_final[parent], int(parent[a.q0]))


ProgramCost = Callable[[Dfa], CodeLength]


def _program_cost(coding: str, named, n: int) -> ProgramCost:
    if coding == "raw":
        return raw_program_bits
    if coding == "shortest":
        return lambda a: khat_model(a, named, n).bits
    raise DomainError(f"unknown program coding {coding!r}; use 'raw' or 'shortest'")


def _evaluate_merges(args) -> list[tuple[float, float, int, str, Dfa]]:
    """Merge every listed pair of A and score the results: (total, program, |code|, code, machine)."""
    a, pairs, d, n, coding, named = args
    cost = _program_cost(coding, named, n)
    out = []
    table, final = transition_table(a), final_mask(a)
    for i, j in pairs:
        cand = merge_states(a, i, j, table, final)
        program = cost(cand)
        code = encode(cand)
        out.append((program + subset_code_len(slice_count(cand, n), d), program, len(code), code, cand))
    return out


def _scored_merges(a: Dfa, d: int, n: int, coding: str, named, pool, threads: int):
    pairs = [(i, j) for i in range(a.q) for j in range(i + 1, a.q)]
    chunks = max(1, threads * 4) if pool else 1
    size = -(-len(pairs) // chunks) if pairs else 1
    jobs = [(a, pairs[k:k + size], d, n, coding, named) for k in range(0, len(pairs), size)]
    results = pool.map(_evaluate_merges, jobs) if pool else map(_evaluate_merges, jobs)
    seen = set()
    for batch in results:
        for sc in batch:
            if sc[3] not in seen:
                seen.add(sc[3])
                yield sc


def greedy_merge_search(sample: DataSample, alpha: CodeLength, rule: SwitchRule | str = SwitchRule.PLAIN,
                        coding: str = "raw", named=DEFAULT_NAMED, max_steps: int | None = None,
                        threads: int = 1) -> SearchTrace:
    """Greedy best-improvement state merging from the prefix-tree acceptor.

    The walk always moves to the merge with the smallest two-part total if it
    strictly improves on the current machine. Under PLAIN every machine within
    alpha reached this way is recorded; under SAFE a machine is recorded only
    when safe_switch accepts it against the last recorded explanation.
    """
    rule = SwitchRule(rule)
    n, d = sample.n, sample.d
    cost = _program_cost(coding, named, n)
    if rule is SwitchRule.SAFE and log2_binomial(2 ** n, d) <= 1:
        raise DomainError(f"the safe rule needs log C(2^{n}, {d}) > 1")
    current = prefix_tree_acceptor(sample)
    cur_program = cost(current)
    cur_total = cur_program + subset_code_len(slice_count(current, n), d)
    recorded: list[Explanation] = []
    step = 0
    if cur_program <= alpha:
        recorded.append(explain(sample, current, cur_program, step))
    reason = Termination.FIXPOINT
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while True:
            if max_steps is not None and step >= max_steps:
                reason = Termination.BUDGET
                break
            scored = list(_scored_merges(current, d, n, coding, named, pool, threads))
            if recorded:
                scored = [sc for sc in scored if sc[1] <= alpha]
            if not scored:
                break
            total, program, _, _, best = min(scored, key=lambda sc: (sc[0], sc[2], sc[3]))
            if not total < cur_total:
                break
            step += 1
            current, cur_program, cur_total = best, program, total
            if program > alpha:
                continue
            cand = explain(sample, current, program, step)
            if not recorded:
                recorded.append(cand)
            elif rule is SwitchRule.PLAIN or safe_switch(recorded[-1], cand, n, d, named=named):
                recorded.append(cand)
    finally:
        if pool:
            pool.shutdown()
    if not recorded:
        raise EmptyTraceError(f"no merge sequence reached a model within alpha={alpha}", t0_reached=False)
    return SearchTrace(recorded, "merge", alpha, reason, step, rule)


# ---------------------------------------------------------------------------
# Dovetailed enumeration


class _SliceProgram:
    """A DFA run as a program: n forward-count steps, then one step checking the sample.

    Halts with (A, l) when every sample word is accepted, otherwise with None.
    """

    def __init__(self, index: int, a: Dfa, sample: DataSample):
        self.index = index
        self.a = a
        self.sample = sample
        self.vector = [0] * a.q
        self.vector[a.q0] = 1
        self.done = 0
        self.length = sample.n + 1

    def step(self) -> tuple[Dfa, int] | None | bool:
        """Advance one step; returns False while running, else the printed result."""
        a = self.a
        if self.done < self.sample.n:
            nxt = [0] * a.q
            for st, c in enumerate(self.vector):
                if c:
                    for sym in range(min(a.s, 2)):
                        nxt[a.delta[st * a.s + sym]] += c
            self.vector = nxt
            self.done += 1
            return False
        self.done += 1
        if all(a.accepts(w) for w in self.sample.words):
            return a, sum(self.vector[a.q - a.f:])
        return None


def _program_stream(sample: DataSample, alpha: CodeLength, max_states: int) -> list[tuple[int, Dfa, float]]:
    out = []
    for index, a in standard_enumeration(max_states + 2, alphabet=2, max_states=max_states):
        bits = raw_program_bits(a)
        if bits <= alpha:
            out.append((index, a, bits))
    return out


def _dovetail(sample: DataSample, alpha: CodeLength, budget: int | None, max_states: int,
              key: Callable[[Dfa, int, float], float], mode: str) -> SearchTrace:
    programs = _program_stream(sample, alpha, max_states)
    if not programs:
        raise EmptyTraceError(f"no program of length <= {alpha}", t0_reached=False)
    runs = [_SliceProgram(index, a, sample) for index, a, _ in programs]
    bits_of = {index: bits for index, _, bits in programs}
    length = sample.n + 1
    last_stage = len(runs) + length
    recorded: list[Explanation] = []
    best_key = math.inf
    stage = 0
    reason = Termination.EXHAUSTED
    while stage < last_stage:
        if budget is not None and stage >= budget:
            reason = Termination.BUDGET
            break
        stage += 1
        # stage j runs step j-k of program k (1-based k) for every active k
        lo = max(1, stage - length)
        for k in range(lo, min(stage, len(runs) + 1)):
            run = runs[k - 1]
            result = run.step()
            if result is False or result is None:
                continue
            a, l = result
            value = key(a, l, bits_of[run.index])
            if value < best_key:
                best_key = value
                recorded.append(explain(sample, a, bits_of[run.index], stage, run.index, l=l))
    if not recorded:
        raise EmptyTraceError(f"budget of {budget} stages ended before any program printed a model for D",
                              t0_reached=False)
    return SearchTrace(recorded, mode, alpha, reason, stage)


def dovetail_optimal(sample: DataSample, alpha: CodeLength, budget: int | None = None,
                     max_states: int = 3) -> SearchTrace:
    """Dovetail all binary DFAs with q <= max_states whose program length is within alpha,
    keeping the explanation with the least program_bits + ceil(log C(l,d)).

    The best explanation changes only on a strict decrease; budget counts stages.
    """
    d = sample.d

    def key(a: Dfa, l: int, program: float) -> float:
        return program + subset_code_len(l, d)

    return _dovetail(sample, alpha, budget, max_states, key, "dovetail")


def direct_method_search(sample: DataSample, alpha: CodeLength, budget: int | None = None,
                         max_states: int = 3) -> SearchTrace:
    """Same dovetailed stream, but the selection key is the deficiency lower bound."""

    d = sample.d

    def key(a: Dfa, l: int, program: float) -> float:
        khat = khat_data_given_model(sample, a, sample.n, materialize=False)
        return log2_binomial(l, d) - khat.bits

    return _dovetail(sample, alpha, budget, max_states, key, "direct")
