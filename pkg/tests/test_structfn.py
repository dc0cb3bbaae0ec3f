import json
import math
import random
from itertools import product

import numpy as np
import pytest

from mdldfa.codelen import DomainError
from mdldfa.dfa import CapacityError, DataSample, minimize, prefix_tree_acceptor
from mdldfa.structfn import (
    STRIP_SLACK,
    TABLE_SLACK,
    WITNESS_SLACK,
    DfaClass,
    Recoding,
    SubsetClass,
    build_structure_table,
    minimal_dfa_states,
    minimal_sufficient_alpha,
    recoding_strip_check,
    strip_check,
    witness_cross_check,
)
from oracles import words

INF = math.inf
NON_CONVERSE = DataSample.of(["0001", "0010", "0011", "0100", "1000", "1001", "1011", "1111"])


def residual_states(language: set, n: int) -> int:
    """1 dead state plus one per distinct nonempty residual u^-1 M over all prefixes u."""
    residuals = set()
    for k in range(n + 1):
        for u in ("".join(t) for t in product("01", repeat=k)):
            res = frozenset(w[k:] for w in language if w.startswith(u))
            if res:
                residuals.add((k, res))
    return 1 + len(residuals)


def random_sample(rng, n):
    return DataSample.of(rng.sample(words(n), rng.randint(1, 2 ** n)))


def test_minimal_states_match_residual_oracle():
    n = 3
    masks = np.arange(1, 256, dtype=np.int64)
    got = minimal_dfa_states(masks, n)
    for m, q in zip(masks.tolist(), got.tolist()):
        lang = {format(x, "03b") for x in range(8) if m >> x & 1}
        assert q == residual_states(lang, n)
        assert q == minimize(prefix_tree_acceptor(sorted(lang))).q


def test_minimal_states_random_n4():
    rng = random.Random(1)
    masks = np.array([rng.randrange(1, 1 << 16) for _ in range(200)], dtype=np.int64)
    for m, q in zip(masks.tolist(), minimal_dfa_states(masks, 4).tolist()):
        assert q == residual_states({format(x, "04b") for x in range(16) if m >> x & 1}, 4)


@pytest.mark.parametrize("cls", [SubsetClass(), DfaClass()], ids=["subset", "dfa"])
def test_table_invariants(cls):
    rng = random.Random(4)
    for _ in range(15):
        sample = random_sample(rng, rng.randint(1, 3))
        t = build_structure_table(sample, cls)
        lams = [r.lam for r in t.rows]
        betas = [r.beta for r in t.rows]
        assert lams == sorted(lams, reverse=True)
        assert betas == sorted(betas, reverse=True)
        assert t.lam(INF) >= t.khat_D
        for r in t.rows:
            if r.lam_witness is None:
                assert r.lam == INF and r.beta == INF
                continue
            w = r.lam_witness
            assert w.cost <= r.alpha + 1e-9
            assert set(sample.words) <= set(w.model if isinstance(w.model, frozenset) else
                                            [x for x in words(sample.n) if w.model.accepts(x)])
            assert r.lam == pytest.approx(w.total)
            assert r.beta <= w.deficiency + 1e-9
        assert strip_check(t).passed
        assert witness_cross_check(t).passed


def test_exhaustive_small_tables_pass_all_checks():
    for n in (1, 2):
        for bits in range(1, 1 << (1 << n)):
            sample = DataSample.of([format(x, f"0{n}b") for x in range(1 << n) if bits >> x & 1])
            for cls in (SubsetClass(), DfaClass()):
                t = build_structure_table(sample, cls)
                assert strip_check(t).passed
                assert witness_cross_check(t).passed


def test_lambda_is_infinite_below_cheapest_model():
    sample = DataSample.of(["01", "10"])
    t = build_structure_table(sample, SubsetClass(), alpha_grid=[0, 1, 2, 3, 100])
    assert t.rows[0].lam == INF and t.rows[0].lam_witness is None
    assert t.lam(-1) == INF
    assert t.rows[-1].lam < INF


def test_lam_off_grid_agrees_with_grid():
    sample = DataSample.of(["000", "011", "101", "110"])
    t = build_structure_table(sample, DfaClass(), alpha_grid=range(0, 40))
    for r in t.rows:
        assert t.lam(r.alpha) == r.lam
        assert t.lam(r.alpha + 0.5) <= r.lam


def test_parity_sample_table():
    sample = DataSample.of(["000", "011", "101", "110"])
    t = build_structure_table(sample, DfaClass())
    # universal (3 bits, 6 data bits) until the named parity machine (4 bits, 0 data bits) is allowed
    assert t.lam(3) == 3 + 7
    assert t.lam(4) == 4
    stat = minimal_sufficient_alpha(t)
    assert stat is not None
    assert t.lam(stat.alpha) <= t.khat_D + TABLE_SLACK


def test_minimal_sufficient_alpha_is_least():
    rng = random.Random(8)
    for _ in range(10):
        t = build_structure_table(random_sample(rng, 3), SubsetClass())
        stat = minimal_sufficient_alpha(t)
        assert stat is not None
        earlier = [r for r in t.rows if r.alpha < stat.alpha]
        assert all(r.lam > t.khat_D + TABLE_SLACK for r in earlier)


def test_witness_forward_holds_and_converse_can_fail():
    t = build_structure_table(NON_CONVERSE, SubsetClass(), alpha_grid=range(0, 80))
    report = witness_cross_check(t)
    assert report.passed
    converse = report.details["converse_counterexamples"]
    assert converse
    row = next(c for c in converse if c["alpha"] == 63)
    assert row["beta_witness"] == "set#bfbf"
    assert row["beta_witness_total"] > row["lambda"] + WITNESS_SLACK


def test_strip_on_random_n4_samples():
    rng = random.Random(12)
    for _ in range(20):
        t = build_structure_table(random_sample(rng, 4), SubsetClass())
        report = strip_check(t)
        assert report.passed, report.violations
        assert report.details["slack"] == STRIP_SLACK


def test_recoding_basics():
    f = Recoding.xor("1010")
    assert f.apply("0000") == "1010"
    assert f.inverse() is f
    assert f.width == 12
    r = Recoding.bit_reversal(4)
    assert r.apply("0001") == "1000"
    assert r.width == 5 + 8
    assert r.inverse().apply(r.apply("0111")) == "0111"
    assert sorted(r.index_map().tolist()) == list(range(16))
    with pytest.raises(DomainError):
        Recoding.xor("10a")
    with pytest.raises(DomainError):
        Recoding("permutation", 3, positions=(0, 0, 1))
    with pytest.raises(DomainError):
        Recoding("rotate", 3)


@pytest.mark.parametrize("f", [Recoding.xor("1010"), Recoding.bit_reversal(4)], ids=["xor", "reverse"])
def test_recoding_strips(f):
    rng = random.Random(6)
    for _ in range(5):
        report = recoding_strip_check(random_sample(rng, 4), f)
        assert report.passed, report.violations
        assert report.details["width"] == f.width


def test_recoding_strip_on_dfa_class():
    sample = DataSample.of(["000", "011", "101", "110"])
    report = recoding_strip_check(sample, Recoding.xor("110"), model_class="dfa", max_states=2)
    assert report.passed


def test_recoding_that_moves_a_named_model_leaves_the_unshifted_strip():
    # XOR 100 maps even parity (4 bits) to odd parity (7 bits)
    sample = DataSample.of(["000", "011", "101", "110"])
    report = recoding_strip_check(sample, Recoding.xor("100"), model_class="dfa", max_states=2)
    assert not report.passed
    assert report.details["max_violation"] == 3
    assert report.details["within_shifted_strip"]


def test_recoding_errors():
    sample = DataSample.of(["000"])
    with pytest.raises(DomainError):
        recoding_strip_check(sample, Recoding.xor("10"))
    with pytest.raises(DomainError):
        recoding_strip_check(sample, "reverse")
    with pytest.raises(DomainError):
        recoding_strip_check(sample, Recoding.xor("100"), model_class="grammar")


def test_capacity_limits():
    with pytest.raises(CapacityError):
        build_structure_table(DataSample.of(["00000"]), SubsetClass())
    with pytest.raises(CapacityError):
        build_structure_table(DataSample.of(["0"]), DfaClass(max_states=6))


def test_exports():
    sample = DataSample.of(["01", "10"])
    t = build_structure_table(sample, SubsetClass(), alpha_grid=[0, 10])
    lines = t.to_csv(["mdldfa x"]).splitlines()
    assert lines[0] == "# mdldfa x"
    assert lines[1] == "alpha,lambda,lambda_witness_id,beta,beta_witness_id"
    assert lines[2] == "0.0,inf,,inf,"
    doc = json.loads(t.to_json({"version": "v"}))
    assert doc["version"] == "v"
    assert doc["rows"][0]["lambda"] == "inf"
    assert doc["rows"][1]["lambda_witness_id"].startswith("set#")
