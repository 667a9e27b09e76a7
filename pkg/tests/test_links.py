import json
import math

import pytest

from tame3.links import (JunctionNotShared, NotInStabilizer, VertexLink, build_cycle, classify_cycle,
                         cycle_from_json, link_profile, random_link_cycles)
from tame3.tame import Automorphism, auto

PI = math.pi
ID = "(x1, x2, x3)"


def chain(hs):
    """Chambers f_0 = id, f_{i+1} = f_i o h_i; the product of all h_i must be the identity."""
    fs = [Automorphism.identity()]
    for h in hs[:-1]:
        fs.append(fs[-1].compose(auto(h)))
    assert fs[-1].compose(auto(hs[-1])).is_identity()
    return fs


CYCLE_HS = ["(x1, x2, x3 - x2)", "(x1 + x3*(x3 - 2*x2), x2, x3)", "(x1, x3, x2 + x3)",
            "(x1 + x3^2, x2, x3)", "(x1, x3, x2)", "(x1 - x3^2, x2, x3)"]
CYCLE_JUNCTIONS = ["s", "[1,1,0]", "s", "[0,1,0]", "s", "[0,1,0]"]

SIX_HS = ["(x1, x2 - 2*x3^2, x3)", "(x1 - x2*x3, x2, x3)", "(x1, x2 + x3^2, x3)",
          "(x1 + 2*x2*x3, x2, x3)", "(x1, x2 + x3^2, x3)", "(x1 - x2*x3, x2, x3)"]


def four_branch():
    h0, h2, h3 = auto("(x1, x2 - x3^2, x3)"), auto("(x1, x2 + x3^2, x3)"), auto("(x1 + x2^10, x2, x3)")
    h1 = h0.inverse().compose(h3.inverse()).compose(h2.inverse())
    return chain([h0, h1, h2, h3])


def test_profile_along_curved_line():
    p = link_profile("[2,1,1]", ID, "(x1 + x2*x3, x2, x3)")
    assert p.rows == [(1, -1, -1)]
    assert p.names() == ["q", "a1 = 2*a2", "a1 = a2 + a3"]
    assert [[p.link.name(a), p.link.name(b)] for a, b in p.arcs][-1] == ["a1 = 2*a2", "a1 = a2 + a3"]


def test_profile_mixing_shares_only_endpoints():
    p = link_profile("[2,1,1]", ID, "(x1, x2, x3 - x2)")
    assert sorted(p.names()) == ["q", "s"]
    assert p.arcs == []


def test_profile_identical_chambers():
    f = "(x1 + x3^2, x2, x3)"
    p = link_profile("[2,1,1]", f, f)
    assert p.is_whole()
    assert len(p.shared) == len(p.link.candidates)


def test_profile_is_symmetric():
    a = link_profile("[3,2,1]", ID, "(x1 + x2*x3, x2 + x3^2, x3)")
    b = link_profile("[3,2,1]", "(x1 + x2*x3, x2 + x3^2, x3)", ID)
    assert sorted(a.names()) == sorted(b.names())


def test_profile_requires_stabilizer():
    with pytest.raises(NotInStabilizer):
        link_profile("[2,1,1]", ID, "(x1 + x2^3, x2, x3)")


def test_example_cycle():
    c = build_cycle("[2,1,1]", chain(CYCLE_HS), CYCLE_JUNCTIONS)
    assert c.total_length == pytest.approx(2 * PI + PI / 3, abs=1e-6)
    assert sorted(c.segment_lengths()) == pytest.approx([PI / 3] * 4 + [PI / 2] * 2, abs=1e-9)
    cl = classify_cycle(c)
    assert cl.label == "exceeds-threshold" and cl.epsilon < PI / 3
    assert cl.contradiction is None


def test_apartment_cycles():
    for v, sigma in [("[2,1,1]", "(x1, x3, x2)"), ("[3,3,1]", "(x2, x1, x3)"), ("[3,2,1]", ID)]:
        c = build_cycle(v, [ID, sigma], ["s", "q"])
        assert c.total_length == pytest.approx(2 * PI, abs=1e-9)
        assert classify_cycle(c).label == "single-apartment"


def test_six_segment_example_closes():
    c = build_cycle("[3,2,1]", chain(SIX_HS), ["s", "[1,0,1]"] * 3)
    assert len(c.segments) == 6
    assert c.total_length >= 2 * PI - 1e-6
    assert classify_cycle(c).pattern == "interior-6"


def test_four_branch_equality_case():
    c = build_cycle("[20,2,1]", four_branch(), ["s", "[20,0,1]", "s", "[0,0,1]"])
    assert c.total_length == pytest.approx(2 * PI, abs=1e-9)
    assert classify_cycle(c).label == "interior-4"


def test_junction_must_be_shared():
    with pytest.raises(JunctionNotShared):
        build_cycle("[2,1,1]", [ID, "(x1, x2, x3 - x2)"], ["s", "[1,1,0]"])


def test_cycle_json():
    data = {"vertex": "[2,1,1]", "chambers": [str(f) for f in chain(CYCLE_HS)], "junctions": CYCLE_JUNCTIONS}
    c = cycle_from_json(json.dumps(data))
    out = c.to_dict()
    assert out["total_length"] == pytest.approx(7 * PI / 3, abs=1e-6)
    assert len(out["segments"]) == 6


def test_epsilon_defaults_independent_of_m():
    for fam in (lambda m: (m, 1, 1), lambda m: (m + 1, m, 1), lambda m: (2 * m + 1, m, 1)):
        eps = {round(VertexLink(fam(m)).default_epsilon(), 12) for m in range(2, 9)}
        assert len(eps) == 1


def test_classification_invariant_under_left_translation():
    k = auto("(x1 + x2^2 - x3^2, x2 + 3*x3, x3)")   # fixes [2,1,1]
    fs = chain(CYCLE_HS)
    a = classify_cycle(build_cycle("[2,1,1]", fs, CYCLE_JUNCTIONS))
    b = classify_cycle(build_cycle("[2,1,1]", [k.compose(f) for f in fs], CYCLE_JUNCTIONS))
    assert (a.label, a.pattern, a.runs) == (b.label, b.pattern, b.runs)
    assert a.length == pytest.approx(b.length, abs=1e-12)


def test_random_cycles_respect_lower_bound():
    for v, c in random_link_cycles(40, seed=11):
        assert c.total_length >= 2 * PI - 1e-6, (v, c.to_dict())
        cl = classify_cycle(c)
        assert cl.contradiction is None, cl
        if VertexLink(v).kind == "m11" and cl.runs == 6:
            assert cl.exceeds_threshold
