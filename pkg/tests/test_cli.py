import json
import math
import random

import pytest

from tame3.cli import run
from tame3.discdiag import random_diagram, folded_pair, edge_on_line
from tame3.nabla import arrangement

from test_links import CYCLE_HS, CYCLE_JUNCTIONS, chain


def call(capsys, *argv):
    rc = run(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def payload(capsys, *argv):
    rc, out, _ = call(capsys, *argv, "--json")
    assert rc == 0
    data = json.loads(out)
    assert data["schema"] == "tame3/1"
    return data


def test_val(capsys):
    rc, out, _ = call(capsys, "val", "--weight", "[3,2,1]", "--poly", "x1 + x2*x3")
    assert rc == 0 and out.strip() == "-3"
    assert payload(capsys, "val", "--weight", "[3,2,1]", "--poly", "x1", "--label", "(x1 + x2^2, x2, x3)")[
        "value"] == "-4"


def test_classify(capsys):
    rc, out, _ = call(capsys, "classify", "--group", "C", "--word", "(x2, x1+x2*x3, x3)")
    assert rc == 0 and "parabolic" in out
    data = payload(capsys, "classify", "--group", "C", "--word", "(x2, x1+x2*x3, x3)")
    assert data["kind"] == "parabolic" and data["length"] == "0"
    data = payload(capsys, "classify", "--group", "C", "--word", "(x2, x1+x2^2, x3)")
    assert data["length"] == "sqrt(2)*log(2)" and data["length_float"] == pytest.approx(0.980258, abs=1e-6)


def test_normal_form(capsys):
    data = payload(capsys, "normal-form", "--group", "Bp", "--word", "(x1, x2 + x3^3, x3); (x1, x3, x2)")
    assert [x["factor"] for x in data["normal_form"]["letters"]] == ["H", "B"]


def test_certify_spade(capsys):
    data = payload(capsys, "certify", "spade", "--alphamax", "100")
    assert data["value"] == "3/4" and data["argmax"] == 4


def test_certify_plain_small(capsys):
    data = payload(capsys, "certify", "plain", "--dmax", "4", "--random-forms", "2", "--jobs", "1")
    assert data["violations"] == [] and data["instances"] > 0


def test_fixed_region_and_stab(capsys):
    assert payload(capsys, "fixed-region", "--auto", "(x1 + x2*x3, x2, x3)")["inequalities"] == ["a1 >= a2 + a3"]
    data = payload(capsys, "stab", "--auto", "(x1 + x2^3, x2, x3)", "--weight", "[2,1,1]")
    assert data["in_stabilizer"] is False


def test_lines_and_arrange(capsys):
    data = payload(capsys, "lines", "--weight", "[2,1,1]")
    assert len(data["lines"]) == 4
    data = payload(capsys, "arrange", "--window", "a1/a2 in [1,5]; a2/a3 in [1,5]")
    assert len(data["nodes"]) - len(data["edges"]) + len(data["faces"]) == 1


def test_link_cycle(capsys, tmp_path):
    args = ["link-cycle", "--vertex", "[2,1,1]", "--chambers", "; ".join(str(f) for f in chain(CYCLE_HS)),
            "--junctions", ";".join(CYCLE_JUNCTIONS)]
    data = payload(capsys, *args)
    assert data["cycle"]["total_length"] == pytest.approx(7 * math.pi / 3, abs=1e-6)
    assert data["classification"]["label"] == "exceeds-threshold"
    f = tmp_path / "cycle.json"
    f.write_text(json.dumps({"vertex": "[2,1,1]", "chambers": ["(x1,x2,x3)", "(x1,x3,x2)"],
                             "junctions": ["s", "q"]}))
    assert payload(capsys, "link-cycle", "--file", str(f))["classification"]["label"] == "single-apartment"


def test_gb_and_fold(capsys, tmp_path):
    data = payload(capsys, "gb-check", "--random", "5", "--seed", "3")
    assert data["ok"] is True
    arr = arrangement("a1/a2 in [3/2,4]; a2/a3 in [1,5/2]")
    face, a, b = edge_on_line(arr, "a1 = 2*a2")
    f = tmp_path / "d.json"
    f.write_text(json.dumps(folded_pair(arr, face, (a, b), "(x1,x2,x3)", "(x1 + x2^2, x2, x3)").to_dict()))
    data = payload(capsys, "fold", "--file", str(f))
    assert len(data["folds"]) == 1 and data["x_reduced"] is False


def test_deterministic_output(capsys):
    a = call(capsys, "gb-check", "--random", "4", "--seed", "7", "--json")[1]
    b = call(capsys, "gb-check", "--random", "4", "--seed", "7", "--json")[1]
    assert a == b


def test_domain_error_exit_code(capsys):
    rc, _, err = call(capsys, "val", "--weight", "[3,2,1]", "--poly", "x1 +")
    assert rc == 1 and "error" in err
    rc, _, _ = call(capsys, "fixed-region", "--auto", "(x1, x1, x3)")
    assert rc == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["val", "--weight", "[3,2,1]"])
    assert exc.value.code == 2
