"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import contextlib
import math
import os
import random
import sys
import time
from fractions import Fraction

import pytest

from tame3.amalgam import classify_isometry, random_letter, random_word, unfold_length_oracle
from tame3.certify import (invariant_set, is_invariant, random_instance, critical_kernels, spade, sweep_plain,
                           sweep_weighted, y_model)
from tame3.discdiag import gauss_bonnet, random_diagram
from tame3.links import build_cycle, classify_cycle, random_link_cycles
from tame3.nabla import chamber_link, lines_through
from tame3.poly import Polynomial
from tame3.tame import Automorphism, auto, compose_all, compose_auto
from tame3.valuation import Weight, is_fixed, nu, random_stabilizer, stab_decompose

from test_links import CYCLE_HS, CYCLE_JUNCTIONS, SIX_HS, chain

PI = math.pi


@contextlib.contextmanager
def criterion(capsys, n: int, desc: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        with capsys.disabled():
            print(f"\nFAIL criterion {n}: {desc} ({type(exc).__name__}: {exc})")
        raise
    with capsys.disabled():
        print(f"\nPASS criterion {n}: {desc} [{time.perf_counter() - start:.2f}s]")


def _poly(rng) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, 4)):
        terms[(rng.randint(0, 4), rng.randint(0, 4), rng.randint(0, 4))] = Fraction(rng.choice([-3, -2, -1, 1, 2, 5]))
    return Polynomial(terms)


def test_criterion_1_valuation(capsys):
    with criterion(capsys, 1, "valuation formula and axioms on 1000 pairs"):
        t0 = time.perf_counter()
        assert nu((3, 2, 1), "x1 + x2*x3") == -3
        rng = random.Random(1)
        for _ in range(1000):
            a = (rng.randint(1, 9), rng.randint(1, 9), rng.randint(1, 9))
            p, q = _poly(rng), _poly(rng)
            assert nu(a, p * q) == nu(a, p) + nu(a, q)
            if p + q:
                assert nu(a, p + q) >= min(nu(a, p), nu(a, q))
        assert time.perf_counter() - t0 < 1.0


def _random_pair(rng):
    x = sorted((rng.randint(1, 9) for _ in range(3)), reverse=True)
    a = Weight(*x)
    f = random_stabilizer(a, rng)
    r = rng.random()
    if r < 0.35:
        i, j = rng.randint(0, 4), rng.randint(0, 4)
        e = auto(f"(x1 + {rng.choice([-2, 1, 3])}*x2^{i}*x3^{j}, x2, x3)") if i + j else auto("(x1 + 1, x2, x3)")
        f = compose_auto(f, e)
    elif r < 0.6:
        group = rng.choice(["C", "B'"])
        f = compose_auto(f, random_letter(group, rng.choice(["H", "K" if group == "C" else "B"]), rng))
    return f, a


def test_criterion_2_stabilizer_vs_fixed_set(capsys):
    with criterion(capsys, 2, "is_fixed agrees with stab_decompose on 1000 samples"):
        t0 = time.perf_counter()
        rng = random.Random(2)
        kinds = set()
        for _ in range(1000):
            f, a = _random_pair(rng)
            fixed = is_fixed(f, a)
            dec = stab_decompose(f, a)
            assert fixed == (dec is not None), (str(f), a)
            if dec is not None:
                assert compose_auto(*dec) == f
            kinds.add(fixed)
        assert kinds == {True, False}
        assert time.perf_counter() - t0 < 30.0


def test_criterion_3_line_counts(capsys):
    with criterion(capsys, 3, "m + 2 admissible lines at [m,1,1], m = 2..20"):
        t0 = time.perf_counter()
        for m in range(2, 21):
            assert len(lines_through([m, 1, 1])) == m + 2, m
        assert time.perf_counter() - t0 < 1.0


def test_criterion_4_link_angles(capsys):
    with criterion(capsys, 4, "link at [m,m,1] is 3 edges of length pi/3, m = 2..6"):
        for m in range(2, 7):
            _, angles = chamber_link([m, m, 1])
            assert len(angles) == 3
            assert all(abs(x - PI / 3) < 1e-9 for x in angles)


def test_criterion_5_example_cycle(capsys):
    with criterion(capsys, 5, "six-chamber cycle at [2,1,1] has length 2pi + pi/3"):
        t0 = time.perf_counter()
        c = build_cycle("[2,1,1]", chain(CYCLE_HS), CYCLE_JUNCTIONS)
        assert abs(c.total_length - (2 * PI + PI / 3)) < 1e-6
        assert sorted(c.segment_lengths()) == pytest.approx([PI / 3] * 4 + [PI / 2] * 2, abs=1e-6)
        assert time.perf_counter() - t0 < 5.0


def test_criterion_6_product_identity(capsys):
    with criterion(capsys, 6, "product of the six example maps is the identity"):
        assert compose_all(auto(h) for h in SIX_HS) == Automorphism.identity()


def test_criterion_7_sweeps(capsys):
    with criterion(capsys, 7, "plain and weighted sweeps, critical kernels, spade(100)"):
        t0 = time.perf_counter()
        plain = sweep_plain(10, jobs=1)
        assert plain.violations == []
        assert {w["d"] for w in plain.witnesses} >= set(range(1, 11))
        assert sweep_weighted(4, 40, jobs=1).violations == []
        rows = critical_kernels()
        assert rows and all(r["weighted"] and r["weightedplus"] for r in rows)
        assert spade(100) == (Fraction(3, 4), 4)
        single = time.perf_counter() - t0
        assert single < 120.0
        # parallel runs must reproduce the single-threaded report; speedup needs more than one core
        par = sweep_plain(6, jobs=2)
        ref = sweep_plain(6, jobs=1)
        assert (par.instances, par.violations, par.witnesses) == (ref.instances, ref.violations, ref.witnesses)
        cpus = os.cpu_count() or 1
        if cpus >= 2:
            t1 = time.perf_counter()
            sweep_plain(10, jobs=1)
            serial = time.perf_counter() - t1
            t1 = time.perf_counter()
            sweep_plain(10, jobs=2)
            assert serial / (time.perf_counter() - t1) > 1.5
        else:
            with capsys.disabled():
                print(f"\n  criterion 7: single-threaded {single:.1f}s; speedup not measurable on {cpus} CPU")


def test_criterion_8_isometry_classes(capsys):
    with criterion(capsys, 8, "isometry kinds and closed-form lengths vs the unfolding oracle"):
        t0 = time.perf_counter()
        expect = [("(x1 + x2*x3, x2, x3)", "elliptic", False), ("(x2, x1 + x2*x3, x3)", "parabolic", False),
                  ("(x2, x1 + x2^2*x3, x3)", "parabolic", True), ("(x2, x1 + x2^2, x3)", "loxodromic-not-rank-1", True)]
        cases = []
        for w, kind, positive in expect:
            c = classify_isometry("C", [w])
            assert c.kind == kind
            assert (c.length > 0) == positive
            cases.append(c)
        rng = random.Random(0)
        for _ in range(20):
            group = rng.choice(["C", "B'"])
            cases.append(classify_isometry(group, random_word(group, rng)))
        for c in cases:
            if c.strip is None:
                continue
            got = unfold_length_oracle(c.strip, 16)
            if c.length > 0:
                assert abs(got - c.length) <= 0.01 * c.length, (c.length, got)
            else:
                assert abs(got) < 1e-3
        assert time.perf_counter() - t0 < 120.0


def test_criterion_9_gauss_bonnet(capsys):
    with criterion(capsys, 9, "Gauss-Bonnet on 100 random disc diagrams"):
        t0 = time.perf_counter()
        rng = random.Random(9)
        for _ in range(100):
            D = random_diagram(rng, max_faces=30)
            assert len(D.faces) <= 30
            assert abs(gauss_bonnet(D) - 2 * PI) < 1e-8
        assert time.perf_counter() - t0 < 60.0


def test_criterion_10_link_girth(capsys):
    with criterion(capsys, 10, "200 random link cycles have length >= 2pi"):
        short = []
        fams = set()
        for v, c in random_link_cycles(200, seed=10):
            a = v.alpha
            fams.add("mm1" if a[0] == a[1] else "m11" if a[1] == a[2] else "mp1")
            if c.total_length < 2 * PI - 1e-6:
                short.append((str(v), c.total_length, classify_cycle(c).contradiction))
        assert not short, f"cycle below 2pi: {short}"
        assert fams == {"mm1", "m11", "mp1"}


def test_criterion_11_invariant_set(capsys):
    with criterion(capsys, 11, "Y-model invariant set and 50 random instances"):
        inst = y_model(k=3, theta=2)
        assert invariant_set(inst) == frozenset({"ξ", "η", "ζ"})
        rng = random.Random(11)
        for _ in range(50):
            inst = random_instance(rng)
            assert is_invariant(inst, invariant_set(inst))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
