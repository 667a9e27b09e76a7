import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from tame3 import _kernels, certify
from tame3.certify import (BadConstants, DependentForms, STANDARD_FORMS, Triple, derivative_identity_check,
                           invariant_set, is_invariant, kernel_plain, kernel_weighted, plain_bound, random_forms,
                           random_instance, critical_kernels, spade, sweep_plain, sweep_weighted, y_model)
from tame3.poly import X2, X3, Polynomial, poly

try:
    from tame3 import _modrank
except ImportError:
    _modrank = None


def form(ab):
    return X2.scale(ab[0]) + X3.scale(ab[1])


def plain_sum(k: Triple, r, t, u, forms=STANDARD_FORMS):
    l1, l2, l3 = (form(f) for f in forms)
    return l1 ** r * k.R + l2 ** t * k.T + l3 ** u * k.U


def sympy_kernel_dim(d, r, t, u, forms=STANDARD_FORMS):
    """Independent oracle: the same linear map assembled and ranked by sympy."""
    x2, x3 = sympy.symbols("x2 x3")
    ls = [a * x2 + b * x3 for a, b in forms]
    cols = []
    for l, e in zip(ls, (r, t, u)):
        for i in range(d - e + 1):
            p = sympy.Poly(sympy.expand(l ** e * x2 ** i * x3 ** (d - e - i)), x2, x3)
            cols.append([p.coeff_monomial(x2 ** j * x3 ** (d - j)) for j in range(d + 1)])
    if not cols:
        return 0
    return len(cols) - sympy.Matrix(cols).T.rank()


def test_plain_examples():
    assert kernel_plain(2, 2, 2, 2) == []
    (k,) = kernel_plain(2, 2, 1, 2)
    assert plain_sum(k, 2, 1, 2) == Polynomial()
    assert (k.R, k.T, k.U) == (poly("1"), poly("x3 - x2"), poly("-1"))
    assert len(kernel_plain(0, 0, 0, 0)) == 2


@pytest.mark.parametrize("d", range(0, 6))
def test_plain_kernel_against_sympy(d):
    rng = random.Random(d)
    forms = random_forms(1, seed=d)[0]
    for _ in range(6):
        r, t, u = (rng.randint(0, d) for _ in range(3))
        ker = kernel_plain(d, r, t, u, forms)
        assert len(ker) == sympy_kernel_dim(d, r, t, u, forms)
        for k in ker:
            assert plain_sum(k, r, t, u, forms) == Polynomial()


def test_dependent_forms_rejected():
    with pytest.raises(DependentForms):
        kernel_plain(2, 1, 1, 1, ((1, 1), (2, 2), (0, 1)))


def test_weighted_examples():
    (k,) = kernel_weighted("weighted", 2, 3, 1, 1, 1, 1, 2)
    s = k.R.scale(-1)
    assert (k.R, k.T, k.U) == (X3.scale(1) * 1, X3.scale(-2), X3) or (s, k.T.scale(-1), k.U.scale(-1)) == (
        X3.scale(-1), X3.scale(2), X3.scale(-1))
    lhs = X2 * k.R + (X2 + X3 ** 2) * k.T + (X2 + (X3 ** 2).scale(2)) * k.U
    assert lhs == Polynomial()
    (kp,) = kernel_weighted("weightedplus", 2, 3, 1, 1, 3, 1)
    assert X2 * kp.R + (X2 + X3 ** 2) * kp.T + X3 ** 3 * kp.U == Polynomial()
    assert kp.T == kp.R.scale(-1) and kp.U.is_constant()
    assert kernel_weighted("weighted", 3, 12, 4, 4, 4, 1, 2) == []
    with pytest.raises(BadConstants):
        kernel_weighted("weighted", 2, 3, 1, 1, 1, 1, 1)


def test_critical_kernel_generators():
    rows = critical_kernels(ps=range(2, 4), samples=2)
    assert rows and all(r["weighted"] and r["weightedplus"] for r in rows)


def test_small_sweeps():
    rep = sweep_plain(5, forms=[STANDARD_FORMS, *random_forms(2, seed=1)], jobs=1)
    assert rep.violations == []
    assert {w["d"] for w in rep.witnesses} >= set(range(1, 6))
    assert sweep_weighted(2, 12, jobs=1).violations == []


def test_sweep_is_deterministic_across_jobs():
    a = sweep_plain(4, jobs=1)
    b = sweep_plain(4, jobs=2)
    assert (a.instances, a.violations, a.witnesses) == (b.instances, b.violations, b.witnesses)


def test_spade():
    assert spade(4) == (Fraction(3, 4), 4)
    assert spade(2) == (Fraction(1, 2), 2)
    assert spade(100) == (Fraction(3, 4), 4)


def test_spade_matches_brute_sharpness():
    # largest min(r,t,u) admitting a relation with all three parts nonzero, by brute force over (r,t,u)
    ratios = {}
    for d in range(2, 7):
        best = max(min(r, t, u) for r in range(d + 1) for t in range(d + 1) for u in range(d + 1)
                   if certify._nonzero_relation(kernel_plain(d, r, t, u)) is not None)
        assert best == plain_bound(d)
        ratios[d] = Fraction(best, d)
    assert (max(ratios.values()), max(ratios, key=ratios.get)) == spade(6)


@given(st.integers(0, 4), st.sampled_from([((1, 2), (0, 1)), ((2, 1), (1, 1)), ((3, -1), (1, 2))]))
@settings(max_examples=20)
def test_kernel_dimension_coordinate_free(d, mat):
    (a, b), (c, e) = mat
    change = [(x * a + y * c, x * b + y * e) for x, y in STANDARD_FORMS]
    for r, t, u in [(d, 0, 0), (1, 1, 1), (0, d, 1), (2, 1, 0)]:
        if max(r, t, u) <= d:
            assert len(kernel_plain(d, r, t, u)) == len(kernel_plain(d, r, t, u, change))


def test_derivative_identity():
    assert derivative_identity_check(poly("x3"), 1, 1, 2)
    assert derivative_identity_check(poly("1"), 2, 3, 5)
    assert derivative_identity_check(poly("x2^2 + x2*x3"), 1, -1, 3)


def test_y_model():
    inst = y_model()
    got = invariant_set(inst)
    assert got == frozenset({"ξ", "η", "ζ"})
    assert is_invariant(inst, got)


def test_invariant_input_returns_itself():
    inst = y_model()
    inst.Z = frozenset({"ξ", "η", "ζ"})
    assert invariant_set(inst) == inst.Z
    single = y_model(k=2)
    single.generators = [tuple(range(len(single.points)))]
    single.Z = frozenset({"ξ"})
    assert invariant_set(single) == {"ξ"}


@given(st.integers(0, 10_000))
@settings(max_examples=25)
def test_invariant_set_properties(seed):
    inst = random_instance(random.Random(seed))
    out = invariant_set(inst)
    union = frozenset().union(*certify.translates(inst, inst.Z))
    assert out and out <= union and is_invariant(inst, out)


@pytest.mark.skipif(_modrank is None, reason="compiled core not built")
@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2 ** 31))
@settings(max_examples=40)
def test_compiled_and_fallback_ranks_agree(n, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(-5, 6, size=(n, m))
    if n > 2:
        a[-1] = a[0] + a[1]
    rows = a.tolist()
    want = sympy.Matrix(rows).rank() if n * m <= 100 else None
    r1 = _modrank.rank_mod_p(np.ascontiguousarray(a % certify.PRIME, dtype=np.int64), certify.PRIME)
    r2 = _kernels.rank_mod_p(np.array(rows, dtype=np.int64), certify.PRIME)
    assert r1 == r2
    if want is not None:
        assert r1 == want
