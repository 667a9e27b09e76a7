import os
import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from tame3.poly import Polynomial
from tame3.tame import Automorphism, permutation_map

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

coeffs = st.integers(-4, 4).filter(bool)
monos = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(monos, coeffs, max_size=5).map(Polynomial)
nonzero_polys = st.dictionaries(monos, coeffs, min_size=1, max_size=5).map(Polynomial)
pos = st.integers(1, 9)
weights = st.tuples(pos, pos, pos)


def _in_vars(draw, allowed, max_deg=3):
    terms = draw(st.dictionaries(st.tuples(*(st.integers(0, max_deg) if i in allowed else st.just(0)
                                             for i in (1, 2, 3))), coeffs, max_size=3))
    return Polynomial(terms)


@st.composite
def letters(draw):
    """Elementary maps, permutations and diagonal scalings."""
    kind = draw(st.sampled_from(["elem", "perm", "diag"]))
    if kind == "elem":
        i = draw(st.integers(1, 3))
        p = _in_vars(draw, {1, 2, 3} - {i})
        return Automorphism.elementary(p, i)
    if kind == "perm":
        return permutation_map(draw(st.permutations([1, 2, 3])))
    d = draw(st.tuples(coeffs, coeffs, coeffs))
    return Automorphism.linear([[d[0], 0, 0], [0, d[1], 0], [0, 0, d[2]]])


words = st.lists(letters(), max_size=4)


@pytest.fixture
def rng():
    return random.Random(0)
