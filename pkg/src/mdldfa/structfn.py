"""Brute-force structure functions over small enumerable model classes.

lambda(alpha) is the least two-part length cost(M) + ceil(log C(|M|, d)) over
models M containing D with cost(M) <= alpha; beta(alpha) is the least
deficiency estimate log C(|M|, d) - Khat(D | M) over the same models.
min over an empty set is infinity.

Two classes are provided:
  DfaClass     all binary DFAs with at most max_states states, costed by
               khat_model (raw m(q,s) or a named-dictionary index)
  SubsetClass  every M' containing D inside {0,1}^n (n <= 4), costed by
               khat_model of the minimal DFA of M'

A class may carry a recoding f (a permutation of {0,1}^n). Its cost then
becomes min(cost(M), cost(f(M)) + w, cost(f^-1(M)) + w) where w is the
length of the description of f.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Sequence

import numpy as np

from .codelen import CodeLength, DomainError, ceil_log2, log2_binomial, self_delim_len
from .coders import (
    DEFAULT_NAMED,
    MAX_HEADER_BITS,
    NAMED_MODEL,
    RAW_MODEL,
    khat_from_ranks,
    khat_unconditional,
)
from .dfa import CapacityError, DataSample, Dfa, block_size, model_cost, standard_enumeration, _splits
from .ranking import subset_code_len

INF = math.inf
MAX_CLASS_MACHINES = 200_000
MAX_SUBSET_N = 4

# slack budgets in bits
SUBSET_ROUNDING = 1
STRIP_SLACK = 3 * MAX_HEADER_BITS + 2 * SUBSET_ROUNDING + 8
WITNESS_SLACK = 2 * MAX_HEADER_BITS + 4
TABLE_SLACK = MAX_HEADER_BITS + 2
RECODING_OVERHEAD = 8


# ---------------------------------------------------------------------------
# Recodings of {0,1}^n


@dataclass(frozen=True)
class Recoding:
    """A computable permutation of {0,1}^n: XOR with a mask, or a permutation of bit positions.

    positions[k] is the source position of output bit k (0 = leftmost).
    """

    kind: str
    n: int
    mask: str = ""
    positions: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "xor":
            if len(self.mask) != self.n or any(c not in "01" for c in self.mask):
                raise DomainError(f"xor mask must be {self.n} binary characters, got {self.mask!r}")
        elif self.kind == "permutation":
            if sorted(self.positions) != list(range(self.n)):
                raise DomainError(f"{self.positions} is not a permutation of 0..{self.n - 1}")
        else:
            raise DomainError(f"unsupported recoding {self.kind!r}; use 'xor' or 'permutation'")

    @classmethod
    def xor(cls, mask: str) -> "Recoding":
        return cls("xor", len(mask), mask=mask)

    @classmethod
    def bit_reversal(cls, n: int) -> "Recoding":
        return cls("permutation", n, positions=tuple(range(n - 1, -1, -1)))

    @property
    def width(self) -> CodeLength:
        """Description length of f: the mask, or a permutation index, plus a fixed overhead."""
        if self.kind == "xor":
            return float(self.n + RECODING_OVERHEAD)
        return float(ceil_log2(math.factorial(self.n)) + RECODING_OVERHEAD)

    def apply(self, word: str) -> str:
        if self.kind == "xor":
            return "".join("1" if a != b else "0" for a, b in zip(word, self.mask))
        return "".join(word[p] for p in self.positions)

    def inverse(self) -> "Recoding":
        if self.kind == "xor":
            return self
        inv = [0] * self.n
        for k, p in enumerate(self.positions):
            inv[p] = k
        return Recoding("permutation", self.n, positions=tuple(inv))

    def index_map(self) -> np.ndarray:
        """image[x] = int(f(w), 2) for x = int(w, 2)."""
        size = 1 << self.n
        return np.array([int(self.apply(format(x, f"0{self.n}b")), 2) if self.n else 0
                         for x in range(size)], dtype=np.int64)

    def apply_sample(self, sample: DataSample) -> DataSample:
        return DataSample.of(sorted(self.apply(w) for w in sample.words), sample.n)


def _permute_masks(masks: np.ndarray, image: np.ndarray) -> np.ndarray:
    out = np.zeros_like(masks)
    for x, y in enumerate(image.tolist()):
        out |= ((masks >> x) & 1) << y
    return out


# ---------------------------------------------------------------------------
# Model classes


def _word_bits(n: int) -> np.ndarray:
    """(2^n, n) array of the symbols of every length-n word in index order."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1) if n else np.zeros((1, 0), dtype=np.int64)


def fast_slice_mask(a: Dfa, n: int, bits: np.ndarray | None = None) -> int:
    """slice_mask computed by running every word in parallel."""
    if bits is None:
        bits = _word_bits(n)
    table = np.asarray(a.delta, dtype=np.int64).reshape(a.q, a.s)
    state = np.full(bits.shape[0], a.q0, dtype=np.int64)
    alive = np.ones(bits.shape[0], dtype=bool)
    for k in range(n):
        sym = bits[:, k]
        alive &= sym < a.s
        state = table[state, np.minimum(sym, a.s - 1)]
    accepted = alive & (state >= a.q - a.f)
    return int.from_bytes(np.packbits(accepted, bitorder="little").tobytes(), "little")


def _named_costs(n: int, named) -> dict[int, CodeLength]:
    """Slice mask of each dictionary machine -> its named-coder length (first entry wins)."""
    out: dict[int, CodeLength] = {}
    bits = _word_bits(n)
    for index, (_, ref) in enumerate(named or ()):
        mask = fast_slice_mask(ref, n, bits)
        out.setdefault(mask, NAMED_MODEL.header_bits + self_delim_len(index + 1))
    return out


@dataclass(frozen=True)
class ClassData:
    """Distinct slice languages of a class with their least cost and a witness.

    masks are Python ints (bit int(w,2) set iff w in M); models[i] is the witness.
    """

    n: int
    masks: list[int]
    costs: np.ndarray
    sizes: np.ndarray
    ids: list[str]
    models: list[Any]

    @cached_property
    def small_masks(self) -> np.ndarray | None:
        """The masks as an int64 array when every mask fits, else None."""
        if self.n > 5:
            return None
        return np.array(self.masks, dtype=np.int64)


@dataclass(frozen=True)
class DfaClass:
    """All binary DFAs with at most max_states states, in standard-enumeration order."""

    max_states: int = 3
    named: tuple = DEFAULT_NAMED
    recoding: Recoding | None = None

    name = "dfa"

    def data(self, n: int) -> ClassData:
        total = sum(block_size(q, s) for q, s in _splits(self.max_states + 2)
                    if s == 2 and q <= self.max_states)
        if total > MAX_CLASS_MACHINES:
            raise CapacityError(f"{total} machines with q <= {self.max_states} exceed {MAX_CLASS_MACHINES}")
        if n > 16:
            raise CapacityError(f"DFA class tables need n <= 16, got {n}")
        return _dfa_class_data(n, self.max_states, self.named, self.recoding)


@dataclass(frozen=True)
class SubsetClass:
    """Every subset of {0,1}^n (n <= 4) as a model, costed by its minimal DFA."""

    named: tuple = DEFAULT_NAMED
    recoding: Recoding | None = None

    name = "subset"

    def data(self, n: int) -> ClassData:
        if n > MAX_SUBSET_N:
            raise CapacityError(f"the subset class has 2^(2^{n}) members; only n <= {MAX_SUBSET_N} is supported")
        return _subset_class_data(n, self.named, self.recoding)


def _apply_recoding(n: int, masks: list[int], costs: np.ndarray, recoding: Recoding | None) -> np.ndarray:
    """cost_F(M) = min(cost(M), cost(f(M)) + w, cost(f^-1(M)) + w) over a class closed under f."""
    if recoding is None:
        return costs
    if recoding.n != n:
        raise DomainError(f"recoding acts on length {recoding.n}, table has n={n}")
    lookup = dict(zip(masks, costs.tolist()))
    out = costs.copy()
    for g in (recoding, recoding.inverse()):
        image = g.index_map().tolist()
        for k, m in enumerate(masks):
            moved = 0
            for x, y in enumerate(image):
                if m >> x & 1:
                    moved |= 1 << y
            other = lookup.get(moved, INF) + recoding.width
            if other < out[k]:
                out[k] = other
    return out


@lru_cache(maxsize=32)
def _dfa_class_data(n: int, max_states: int, named, recoding: Recoding | None) -> ClassData:
    bits = _word_bits(n)
    named_cost = _named_costs(n, named)
    best: dict[int, tuple[float, int, Dfa]] = {}
    for index, a in standard_enumeration(max_states + 2, alphabet=2, max_states=max_states):
        mask = fast_slice_mask(a, n, bits)
        cost = RAW_MODEL.header_bits + model_cost(a.q, a.s)
        if mask in named_cost:
            cost = min(cost, named_cost[mask])
        if mask not in best or (cost, index) < best[mask][:2]:
            best[mask] = (cost, index, a)
    masks = sorted(best, key=lambda m: best[m][1])
    costs = np.array([best[m][0] for m in masks], dtype=float)
    costs = _apply_recoding(n, masks, costs, recoding)
    sizes = np.array([bin(m).count("1") for m in masks], dtype=np.int64)
    return ClassData(n, masks, costs, sizes, [f"dfa#{best[m][1]}" for m in masks], [best[m][2] for m in masks])


def minimal_dfa_states(masks: np.ndarray, n: int) -> np.ndarray:
    """States of the minimal total DFA of each finite language M of length-n words.

    One state per distinct nonempty residual at each depth 0..n, plus the
    dead state; residuals are the aligned 2^(n-k)-bit chunks of the mask.
    """
    masks = np.asarray(masks, dtype=np.int64)
    q = np.ones(masks.shape, dtype=np.int64)
    for k in range(n + 1):
        size = 1 << (n - k)
        chunk_mask = (1 << size) - 1
        chunks = np.stack([(masks >> (j * size)) & chunk_mask for j in range(1 << k)], axis=-1)
        chunks.sort(axis=-1)
        distinct = (chunks[..., :1] != 0).astype(np.int64).sum(axis=-1)
        distinct += ((np.diff(chunks, axis=-1) != 0) & (chunks[..., 1:] != 0)).sum(axis=-1)
        q += distinct
    return q


@lru_cache(maxsize=8)
def _subset_class_data(n: int, named, recoding: Recoding | None) -> ClassData:
    masks = np.arange(1, 1 << (1 << n), dtype=np.int64)
    q = minimal_dfa_states(masks, n)
    raw = np.array([INF] + [RAW_MODEL.header_bits + model_cost(k, 2) for k in range(1, int(q.max()) + 1)])
    costs = raw[q]
    mask_list = masks.tolist()
    for mask, cost in _named_costs(n, named).items():
        if mask:
            costs[mask - 1] = min(costs[mask - 1], cost)
    if recoding is not None:
        if recoding.n != n:
            raise DomainError(f"recoding acts on length {recoding.n}, table has n={n}")
        base = costs.copy()
        for g in (recoding, recoding.inverse()):
            moved = _permute_masks(masks, g.index_map())
            costs = np.minimum(costs, base[moved - 1] + recoding.width)
    sizes = np.array([bin(m).count("1") for m in mask_list], dtype=np.int64)
    ids = [f"set#{m:x}" for m in mask_list]
    models = [frozenset(format(x, f"0{n}b") for x in range(1 << n) if m >> x & 1) for m in mask_list]
    return ClassData(n, mask_list, costs, sizes, ids, models)


# ---------------------------------------------------------------------------
# Tables


@dataclass(frozen=True)
class Witness:
    id: str
    model: Any
    cost: CodeLength
    size: int
    total: CodeLength
    deficiency: CodeLength | None


@dataclass(frozen=True)
class StructureRow:
    alpha: CodeLength
    lam: CodeLength
    lam_witness: Witness | None
    beta: CodeLength
    beta_witness: Witness | None


@dataclass
class StructureTable:
    sample: DataSample
    model_class: str
    alpha_grid: list[CodeLength]
    rows: list[StructureRow]
    khat_D: CodeLength
    # feasible models sorted by cost, with running minima, for lookups off the grid
    _costs: np.ndarray = field(repr=False, default=None)
    _lam_prefix: np.ndarray = field(repr=False, default=None)

    def lam(self, alpha: CodeLength) -> CodeLength:
        """lambda at any alpha, not only at grid points."""
        k = int(np.searchsorted(self._costs, alpha + 1e-9, side="right"))
        return INF if k == 0 else float(self._lam_prefix[k - 1])

    def to_csv(self, header_comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "lambda", "lambda_witness_id", "beta", "beta_witness_id"])
        for r in self.rows:
            w.writerow([_num(r.alpha), _num(r.lam), r.lam_witness.id if r.lam_witness else "",
                        _num(r.beta), r.beta_witness.id if r.beta_witness else ""])
        return buf.getvalue()

    def to_json(self, extra: dict | None = None) -> str:
        doc = dict(extra or {})
        doc.update({
            "model_class": self.model_class,
            "n": self.sample.n,
            "d": self.sample.d,
            "khat_D": self.khat_D,
            "rows": [{
                "alpha": r.alpha,
                "lambda": _jnum(r.lam),
                "lambda_witness_id": r.lam_witness.id if r.lam_witness else None,
                "beta": _jnum(r.beta),
                "beta_witness_id": r.beta_witness.id if r.beta_witness else None,
            } for r in self.rows],
        })
        return json.dumps(doc, indent=2)


def _num(v: float) -> str:
    return "inf" if v == INF else repr(round(v, 9))


def _jnum(v: float):
    return "inf" if v == INF else v


def _sample_mask(sample: DataSample) -> int:
    mask = 0
    for w in sample.words:
        mask |= 1 << (int(w, 2) if sample.n else 0)
    return mask


def _deficiency(sample: DataSample, mask: int, l: int) -> CodeLength:
    ranks = []
    for w in sample.words:
        x = int(w, 2) if sample.n else 0
        ranks.append(bin(mask & ((1 << x) - 1)).count("1"))
    return log2_binomial(l, sample.d) - khat_from_ranks(ranks, l, sample.n, materialize=False).bits


def _running_argmin(values: np.ndarray) -> np.ndarray:
    """For each i, the first index j <= i attaining min(values[:i+1])."""
    if not len(values):
        return np.zeros(0, dtype=np.int64)
    before = np.concatenate([[INF], np.minimum.accumulate(values)[:-1]])
    records = np.flatnonzero(values < before)
    return records[np.searchsorted(records, np.arange(len(values)), side="right") - 1]


def build_structure_table(sample: DataSample, model_class=None, alpha_grid: Sequence[CodeLength] | None = None,
                          with_beta: bool = True) -> StructureTable:
    """lambda and beta over the class on an alpha grid (default: integers 0..khat_D + 8)."""
    model_class = model_class or DfaClass()
    n, d = sample.n, sample.d
    data = model_class.data(n)
    dmask = _sample_mask(sample)
    if data.small_masks is not None:
        feasible = np.flatnonzero((data.small_masks & dmask) == dmask)
    else:
        feasible = np.array([k for k, m in enumerate(data.masks) if m & dmask == dmask], dtype=np.int64)
    # stable order: cost, then class order
    feasible = feasible[np.argsort(data.costs[feasible], kind="stable")]
    code_len = np.array([subset_code_len(l, d) if l >= d else INF for l in range(int(data.sizes.max()) + 1)])
    costs = data.costs[feasible]
    totals = costs + code_len[data.sizes[feasible]]
    lam_arg = _running_argmin(totals)
    lam_prefix = totals[lam_arg]
    lam_inf = float(lam_prefix[-1]) if len(feasible) else INF
    khat_D = min(khat_unconditional(sample).bits, lam_inf)
    if alpha_grid is None:
        alpha_grid = [float(a) for a in range(int(math.ceil(khat_D)) + 9)]
    alpha_grid = sorted(float(a) for a in alpha_grid)

    deficiencies = None
    beta_arg = None
    if with_beta and len(feasible):
        deficiencies = np.array([_deficiency(sample, data.masks[k], int(data.sizes[k])) for k in feasible])
        beta_arg = _running_argmin(deficiencies)

    def witness(i: int) -> Witness:
        k = int(feasible[i])
        l = int(data.sizes[k])
        dfc = float(deficiencies[i]) if deficiencies is not None else None
        return Witness(data.ids[k], data.models[k], float(costs[i]), l, float(totals[i]), dfc)

    rows = []
    for alpha in alpha_grid:
        cnt = int(np.searchsorted(costs, alpha + 1e-9, side="right"))
        if cnt == 0:
            rows.append(StructureRow(alpha, INF, None, INF, None))
            continue
        li = int(lam_arg[cnt - 1])
        lam_w = witness(li)
        if beta_arg is not None:
            bi = int(beta_arg[cnt - 1])
            rows.append(StructureRow(alpha, lam_w.total, lam_w, float(deficiencies[bi]), witness(bi)))
        else:
            rows.append(StructureRow(alpha, lam_w.total, lam_w, INF, None))
    return StructureTable(sample, model_class.name, alpha_grid, rows, khat_D, costs, lam_prefix)


# ---------------------------------------------------------------------------
# Checks


@dataclass
class CheckReport:
    name: str
    passed: bool
    violations: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "violations": self.violations, "details": self.details}


@dataclass(frozen=True)
class SufficientStatistic:
    alpha: CodeLength
    witness: Witness


def minimal_sufficient_alpha(table: StructureTable, slack: CodeLength = TABLE_SLACK) -> SufficientStatistic | None:
    """Least grid alpha whose lambda is within slack of khat_D, with its lambda witness."""
    for row in table.rows:
        if row.lam_witness is not None and row.lam <= table.khat_D + slack:
            return SufficientStatistic(row.alpha, row.lam_witness)
    return None


def witness_cross_check(table: StructureTable, slack: CodeLength = WITNESS_SLACK) -> CheckReport:
    """A lambda witness should also (nearly) witness beta; the converse may fail.

    Forward failures make the report fail. Beta witnesses whose two-part
    length exceeds lambda + slack are listed as converse counterexamples.
    """
    violations, converse = [], []
    for row in table.rows:
        if row.lam_witness is None:
            continue
        if row.lam_witness.deficiency is None:
            raise DomainError("witness_cross_check needs a table built with beta")
        if row.lam_witness.deficiency > row.beta + slack + 1e-9:
            violations.append({"alpha": row.alpha, "lambda_witness_deficiency": row.lam_witness.deficiency,
                               "beta": row.beta})
        if row.beta_witness.total > row.lam + slack + 1e-9:
            converse.append({"alpha": row.alpha, "beta_witness": row.beta_witness.id,
                             "beta_witness_total": row.beta_witness.total, "lambda": row.lam})
    return CheckReport("witness_cross_check", not violations, violations,
                       {"slack": slack, "converse_counterexamples": converse})


def strip_check(table: StructureTable, slack: CodeLength = STRIP_SLACK) -> CheckReport:
    """|beta(alpha) + khat_D - lambda(alpha)| <= slack on every finite grid row."""
    violations = []
    for row in table.rows:
        if row.lam == INF or row.beta == INF:
            continue
        gap = row.beta + table.khat_D - row.lam
        if abs(gap) > slack + 1e-9:
            violations.append({"alpha": row.alpha, "gap": gap})
    return CheckReport("strip_check", not violations, violations, {"slack": slack})


def recoding_strip_check(sample: DataSample, f: Recoding, model_class: str = "subset",
                         max_states: int = 3) -> CheckReport:
    """lambda_{f(D)}(alpha + w) <= lambda_D(alpha) and symmetrically, w = description length of f.

    The transform coder only guarantees cost(f(M)) <= cost(M) + w, so the
    two-part length of an image model can exceed the original's by up to w.
    details["within_shifted_strip"] reports whether every excess stays within
    that vertical shift.
    """
    if not isinstance(f, Recoding):
        raise DomainError(f"unsupported recoding {f!r}")
    if f.n != sample.n:
        raise DomainError(f"recoding acts on length {f.n}, sample has n={sample.n}")
    if model_class == "subset":
        cls = SubsetClass(recoding=f)
    elif model_class == "dfa":
        cls = DfaClass(max_states=max_states, recoding=f)
    else:
        raise DomainError(f"unknown model class {model_class!r}")
    image = f.apply_sample(sample)
    t_d = build_structure_table(sample, cls, with_beta=False)
    t_f = build_structure_table(image, cls, with_beta=False)
    w = f.width
    grid = sorted(set(t_d.alpha_grid) | set(t_f.alpha_grid))
    violations = []
    worst = 0.0
    for alpha in grid:
        for label, left, right in (("f(D) vs D", t_f.lam(alpha + w), t_d.lam(alpha)),
                                   ("D vs f(D)", t_d.lam(alpha + w), t_f.lam(alpha))):
            if left == INF:
                excess = 0.0 if right == INF else INF
            else:
                excess = left - right
            if excess > 1e-9:
                violations.append({"alpha": alpha, "direction": label, "excess": excess})
                worst = max(worst, excess)
    return CheckReport("recoding_strip_check", not violations, violations,
                       {"width": w, "kind": f.kind, "max_violation": worst, "model_class": model_class,
                        "within_shifted_strip": worst <= w + 1e-9})
