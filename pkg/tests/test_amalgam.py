import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from tame3.amalgam import (LetterNotInFactors, NotCyclicallyReduced, classify_isometry, cyclic_reduce,
                           fixed_point_weight, normal_form, random_letter, random_word, strip_data,
                           unfold_length_oracle)
from tame3.tame import TameWord, auto, compose_all
from tame3.valuation import is_fixed

TAU = "(x2, x1, x3)"
LOG2 = math.sqrt(2) * math.log(2)


def test_same_factor_merge():
    nf = normal_form("C", ["(2*x1, x2, x3)", TAU])
    assert len(nf) == 1 and nf.tags == ["K"]
    assert nf.realized == auto("(2*x2, x1, x3)")


def test_alternating_word_untouched():
    nf = normal_form("C", [TAU, "(x1 + x2^2*x3, x2, x3)"])
    assert nf.tags == ["K", "H"]


def test_common_subgroup_absorbed():
    w = ["(x1 + x2^2, x2, x3)", "(x1, x2, 2*x3)", TAU]
    nf = normal_form("C", w)
    assert len(nf) == 2
    assert nf.realized == compose_all(auto(x) for x in w)


def test_letter_outside_factors():
    with pytest.raises(LetterNotInFactors):
        normal_form("B'", ["(x1, x2 + x1^2, x3)"])


def test_cyclic_reduce():
    nf = normal_form("C", [TAU, "(x1 + x2^2, x2, x3)"])
    red, conj = cyclic_reduce(nf)
    assert red.tags == nf.tags and len(conj) == 0
    h, hp = "(x1 + x2^2, x2, x3)", "(x1 - x2^2 + x2^3, x2, x3)"
    nf = normal_form("C", [h, TAU, hp])
    red, conj = cyclic_reduce(nf)
    assert len(red) == 2 and len(conj) == 1
    c = conj.realize()
    assert c.compose(red.realized).compose(c.inverse()) == nf.realized
    one = normal_form("C", [TAU])
    assert len(cyclic_reduce(one)[0]) == 1


def test_classification_examples():
    e = classify_isometry("C", ["(x1 + x2*x3, x2, x3)"])
    assert e.kind == "elliptic" and e.length == 0
    p = classify_isometry("C", ["(x2, x1 + x2*x3, x3)"])
    assert p.kind == "parabolic" and p.length == 0
    q = classify_isometry("C", ["(x2, x1 + x2^2*x3, x3)"])
    assert q.kind == "parabolic" and q.length == pytest.approx(LOG2, rel=1e-12) and q.length > 0
    lox = classify_isometry("C", ["(x2, x1 + x2^2, x3)"])
    assert lox.kind == "loxodromic-not-rank-1" and lox.length_expr() == "sqrt(2)*log(2)"


def test_strip_examples():
    s = strip_data("C", [TAU, "(x1 + x2^2, x2, x3)"])
    assert [b.kind for b in s.boundary] == ["principal-ray", "curve-on-line"]
    assert (s.boundary[1].a, s.boundary[1].m3) == (2, 0)
    assert s.gaps == pytest.approx([math.log(2) / math.sqrt(2)] * 2)
    b = classify_isometry("B'", ["(x1, x2 + x3^3, x3)", "(x1, x3, x2)"])
    assert [x.offset for x in b.strip.boundary] == pytest.approx([math.log(3) / math.sqrt(2), 0])
    assert b.length == pytest.approx(math.sqrt(2) * math.log(3))
    par = strip_data("C", [TAU, "(x1 + x2*x3, x2, x3)"])
    assert par.gaps == [0, 0]
    with pytest.raises(NotCyclicallyReduced):
        strip_data("C", ["(x1 + x2^2, x2, x3)"])


def test_oracle_examples():
    s = strip_data("C", [TAU, "(x1 + x2^2, x2, x3)"])
    assert unfold_length_oracle(s, 8) == pytest.approx(LOG2, rel=0.01)
    assert unfold_length_oracle(s, 16) <= unfold_length_oracle(s, 4) + 1e-6
    flat = strip_data("C", [TAU, "(x1 + x2*x3, x2, x3)"])
    assert unfold_length_oracle(flat, 3) == pytest.approx(0, abs=1e-4)


@given(st.integers(0, 10_000))
@settings(max_examples=30)
def test_normal_form_confluent(seed):
    rng = random.Random(seed)
    group = rng.choice(["C", "B'"])
    fa, fb = ("K", "H") if group == "C" else ("B", "H")
    letters = [random_letter(group, rng.choice([fa, fb]), rng) for _ in range(rng.randint(1, 6))]
    a = normal_form(group, letters)
    assert a.realized == compose_all(letters)
    # a different rewrite order: normalise both halves first, then the concatenation
    cut = rng.randint(0, len(letters))
    left = normal_form(group, letters[:cut]).letters if cut else []
    right = normal_form(group, letters[cut:]).letters if cut < len(letters) else []
    b = normal_form(group, left + right)
    assert b.realized == a.realized and len(b) == len(a)
    assert all(t1 != t2 for t1, t2 in zip(a.tags, a.tags[1:]))


@given(st.integers(0, 10_000))
@settings(max_examples=15)
def test_kind_is_conjugacy_invariant(seed):
    rng = random.Random(seed)
    group = rng.choice(["C", "B'"])
    w = random_word(group, rng, max_pairs=2)
    base = classify_isometry(group, w)
    fa, fb = ("K", "H") if group == "C" else ("B", "H")
    for _ in range(10):
        k = random_letter(group, rng.choice([fa, fb]), rng)
        conj = TameWord([k, *w, k.inverse()])
        got = classify_isometry(group, conj)
        assert got.kind == base.kind
        assert got.length == pytest.approx(base.length, abs=1e-9)
    if group == "B'":
        assert base.kind != "parabolic"


@pytest.mark.parametrize("w", ["(x1 + x2*x3, x2, x3)", TAU, "(x1 + x2^3 + x3, x2 + x3^2, 2*x3)",
                               "(x1, x3, x2)"])
def test_elliptic_elements_fix_a_weight(w):
    group = "B'" if w == "(x1, x3, x2)" else "C"
    assert classify_isometry(group, [w]).kind == "elliptic"
    a = fixed_point_weight(auto(w))
    assert a is not None and a.is_dominant() and is_fixed(w, a)
