import json
import math
from fractions import Fraction

import pytest

from mdldfa.codelen import DomainError
from mdldfa.dfa import CapacityError
from mdldfa.experiments import (
    case1_threshold,
    oscillation_scenario,
    parity_samples,
    ratio_band,
    run_lemma1_counting,
    run_oscillation,
    run_parity,
)


def h(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def parity_ratio_oracle(n):
    """m(2,2) = 10 and m(1,2) = 2, plus 2 log n + l H(d/l) for each slice."""
    a1 = 10 + 2 * math.log2(n) + 2 ** (n - 1) * h(0.5)
    a2 = 2 + 2 * math.log2(n) + 2 ** n * h(0.25)
    return a1 / a2


# -- oscillation ----------------------------------------------------------


def test_oscillation_numbers():
    n = 90
    rep = run_oscillation(n)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert rep.quantity("mdl M0") == n
    assert rep.quantity("mdl M_n/3") == pytest.approx(n - n / 30)
    assert rep.quantity("mdl M_2n/3") == pytest.approx(n - 2 * n / 30)
    assert rep.quantity("deficiency M0") == pytest.approx(n / 3)
    assert rep.quantity("deficiency M_n/3") == pytest.approx(n / 9)
    assert rep.quantity("deficiency M_2n/3") == pytest.approx(2 * n / 9)
    assert rep.quantity("shortest M_n/3") == pytest.approx(7 * n / 9)
    assert rep.quantity("shortest M_2n/3") == pytest.approx(8 * n / 9)
    assert rep.quantity("margin 10 log n") == pytest.approx(10 * math.log2(n))
    assert rep.quantity("safe switch M0->M_n/3 (1 = accepted)") == 0


def test_oscillation_safe_switch_accepted_at_large_n():
    rep = run_oscillation(2700)
    assert rep.passed
    assert rep.quantity("safe switch M0->M_n/3 (1 = accepted)") == 1


def test_oscillation_scenario_structure():
    s = oscillation_scenario(180, seed=3)
    assert len(s.x) == 180
    u, w = s.x[:60], s.x[120:]
    assert u == u[:20] * 3 and w == w[:20] * 3
    assert s.mdl_length(60) - s.mdl_length(120) == Fraction(6)
    assert oscillation_scenario(180, seed=3) == s


def test_oscillation_notes_flag_unrealizable_stipulation():
    rep = run_oscillation(90)
    assert any("K(v)" in note for note in rep.notes)


@pytest.mark.parametrize("n", [0, 60, 91, 100])
def test_oscillation_domain(n):
    with pytest.raises(DomainError):
        run_oscillation(n)


# -- parity ---------------------------------------------------------------


@pytest.mark.parametrize("n", [8, 12, 16])
def test_parity_report(n):
    rep = run_parity(n, seed=7)
    assert rep.passed, [c.label for c in rep.checks if not c.passed]
    ratio = rep.quantity("ratio MDL(D0,A1)/MDL(D0,A2)")
    assert ratio == pytest.approx(parity_ratio_oracle(n), abs=1e-9)
    lo, hi = ratio_band(n)
    assert lo <= ratio <= hi
    assert rep.quantity("deficiency(D0|A1)") >= case1_threshold(n)
    assert abs(rep.quantity("deficiency(D1|A1)")) <= 2 * n + 64


def test_parity_ratio_limit():
    # the limit is 1 / (2 H(1/4)), about 0.6163, which 5/8 approximates
    limit = 1 / (2 * h(0.25))
    assert abs(parity_ratio_oracle(20) - limit) < abs(parity_ratio_oracle(12) - limit) < 0.01
    assert abs(limit - 5 / 8) < 0.01


def test_parity_samples_deterministic():
    d0, d1 = parity_samples(10, 7)
    assert d0.d == d1.d == 256
    assert d0.words[:3] == ("0000000000", "0000000011", "0000000101")
    assert parity_samples(10, 7) == (d0, d1)
    assert parity_samples(10, 8)[1] != d1
    assert all(w.count("1") % 2 == 0 for w in d1.words)


def test_parity_report_is_deterministic_and_serializable():
    a = run_parity(8, seed=1).as_dict()
    b = run_parity(8, seed=1).as_dict()
    assert a == b
    doc = json.loads(run_parity(8, seed=1).to_json({"version": "x"}))
    assert doc["version"] == "x"
    assert {"label", "lhs", "rhs", "pass"} <= set(doc["checks"][0])


@pytest.mark.parametrize("n", [7, 21])
def test_parity_capacity(n):
    with pytest.raises(CapacityError):
        run_parity(n)


# -- counting -------------------------------------------------------------


def test_lemma1_counting():
    rep = run_lemma1_counting()
    assert rep.passed
    assert rep.quantity("cells") == sum(m + 1 for m in range(1, 9)) * 3 == 132
    # a non-prefix-free index would be shorter than the counting argument allows
    assert rep.quantity("cells failing with plain floor(log(rank+1)) lengths") > 0


def test_lemma1_domain():
    with pytest.raises(DomainError):
        run_lemma1_counting(n=5)


def test_report_table_rendering():
    text = run_oscillation(90).to_table()
    assert "oscillation" in text
    assert "mdl M0" in text
