"""Command-line front end.  Exit codes: 0 success, 1 domain error, 2 usage error."""

from __future__ import annotations

import argparse
import json
import math
import random
import sys

SCHEMA = "tame3/1"


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"schema": SCHEMA, **payload}, sort_keys=True))
    else:
        print(text)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _word(text: str) -> list[str]:
    return [p.strip() for p in text.split(";") if p.strip()]


# Handlers ---------------------------------------------------------------

def cmd_val(args) -> None:
    from .valuation import Valuation, nu

    v = Valuation(args.label, args.weight)(args.poly) if args.label else nu(args.weight, args.poly)
    _emit(args, {"value": str(v)}, str(v))


def cmd_fixed_region(args) -> None:
    from .valuation import fixed_region

    r = fixed_region(args.auto)
    ineq = r.inequalities()
    _emit(args, {"rows": [list(x) for x in r.rows], "inequalities": ineq}, "\n".join(ineq) or "everything")


def cmd_stab(args) -> None:
    from .valuation import stab_decompose

    res = stab_decompose(args.auto, args.weight)
    if res is None:
        _emit(args, {"in_stabilizer": False}, "not in the stabilizer")
    else:
        m, l = res
        _emit(args, {"in_stabilizer": True, "m": str(m), "l": str(l)}, f"m = {m}\nl = {l}")


def cmd_lines(args) -> None:
    from .nabla import lines_through

    ls = lines_through(args.weight, interior_only=args.interior)
    _emit(args, {"lines": [str(x) for x in ls], "count": len(ls)}, "\n".join(str(x) for x in ls))


def cmd_arrange(args) -> None:
    from .nabla import arrangement

    arr = arrangement(args.window)
    if args.json:
        print(arr.to_json())
    else:
        print(f"{len(arr.lines)} lines, {len(arr.nodes)} nodes, {len(arr.edges)} edges, "
              f"{len(arr.faces)} faces, {len(arr.vertices)} vertices")


def _cycle(args):
    from .links import build_cycle, cycle_from_json

    if args.file:
        return cycle_from_json(_read(args.file))
    if not (args.vertex and args.chambers and args.junctions):
        raise ValueError("give --file or all of --vertex, --chambers, --junctions")
    return build_cycle(args.vertex, _word(args.chambers), _word(args.junctions),
                       _word(args.arcs) if args.arcs else None)


def cmd_link_cycle(args) -> None:
    from .links import classify_cycle

    c = _cycle(args)
    cl = classify_cycle(c, args.epsilon)
    payload = {"cycle": c.to_dict(), "classification": cl.to_dict()}
    lens = ", ".join(f"{math.degrees(x):.4f}" for x in c.segment_lengths())
    _emit(args, payload, f"segments (deg): {lens}\ntotal: {c.total_length:.12f}\nlabel: {cl.label}")
    if cl.contradiction:
        print(f"contradiction: {cl.contradiction}", file=sys.stderr)


def cmd_classify(args) -> None:
    from .amalgam import classify_isometry

    c = classify_isometry(args.group, _word(args.word))
    d = c.to_dict()
    d.pop("schema")
    _emit(args, d, f"kind={c.kind}, length={c.length_expr()}")


def cmd_normal_form(args) -> None:
    from .amalgam import cyclic_reduce, normal_form

    nf = normal_form(args.group, _word(args.word))
    red, conj = cyclic_reduce(nf)
    payload = {"normal_form": nf.to_dict(), "cyclically_reduced": red.to_dict(),
               "conjugator": [str(x) for x in conj.letters]}
    lines = [f"{t}: {a}" for a, t in zip(nf.letters, nf.tags)]
    _emit(args, payload, "\n".join(lines) + f"\ncyclically reduced length {len(red)}")


def cmd_certify(args) -> None:
    from . import certify

    if args.kind == "spade":
        v, a = certify.spade(args.alphamax)
        _emit(args, {"value": str(v), "argmax": a}, f"{v} at alpha = {a}")
        return
    if args.kind == "plain":
        forms = None
        if args.forms:
            forms = json.loads(_read(args.forms))
        elif args.random_forms:
            forms = [certify.STANDARD_FORMS] + certify.random_forms(args.random_forms, args.seed)
        rep = certify.sweep_plain(args.dmax, forms, args.jobs)
    elif args.kind == "weighted":
        rep = certify.sweep_weighted(args.pmax, args.mmax, args.jobs)
    else:
        rem = certify.critical_kernels(seed=args.seed)
        ok = all(r["weighted"] and r["weightedplus"] for r in rem)
        _emit(args, {"instances": rem, "ok": ok}, f"{len(rem)} instances, all one-dimensional as stated: {ok}")
        if not ok:
            raise ValueError("a critical kernel differs from the stated generator")
        return
    d = rep.to_dict()
    d.pop("schema")
    _emit(args, d, f"{rep.kind}: {rep.instances} instances, {len(rep.violations)} violations, "
                   f"{len(rep.witnesses)} witnesses, {rep.wall_time:.2f}s ({rep.backend})")
    if rep.violations:
        raise ValueError(f"{len(rep.violations)} violations")


def _diagrams(args):
    from .discdiag import DiscDiagram, random_diagram
    from .nabla import arrangement

    if args.file:
        return [DiscDiagram.from_json(_read(args.file))]
    rng = random.Random(args.seed)
    arr = arrangement(args.window)
    return [random_diagram(rng, args.max_faces, arr=arr) for _ in range(args.random)]


def cmd_gb_check(args) -> None:
    from .discdiag import gauss_bonnet

    rows = []
    for D in _diagrams(args):
        s = gauss_bonnet(D)
        rows.append({"faces": len(D.faces), "sum": s, "error": s - 2 * math.pi})
    worst = max(abs(r["error"]) for r in rows)
    ok = worst <= args.tol
    _emit(args, {"diagrams": rows, "max_error": worst, "ok": ok},
          f"{len(rows)} diagrams, max |sum - 2pi| = {worst:.3e}, ok={ok}")
    if not ok:
        raise ValueError("Gauss-Bonnet sum off by more than the tolerance")


def cmd_fold(args) -> None:
    from .discdiag import AngleTooLarge, DiscDiagram, folding_locus, is_x_reduced, star_classify

    D = DiscDiagram.from_json(_read(args.file))
    locus = folding_locus(D)
    reduced, bad = is_x_reduced(D)
    stars = {}
    for v in D.interior_vertices:
        try:
            stars[str(v)] = star_classify(D, v, args.epsilon).to_dict()
        except AngleTooLarge as e:
            stars[str(v)] = {"template": None, "error": str(e)}
    payload = {"folds": [f.to_dict() for f in locus], "x_reduced": reduced,
               "witnesses": [f.to_dict() for f in bad], "stars": stars}
    text = [f"{len(locus)} fold edges, x-reduced={reduced}"]
    text += [f"vertex {v}: {s.get('template')}" for v, s in stars.items()]
    _emit(args, payload, "\n".join(text))


def cmd_plot(args) -> None:
    from .render import render_svg

    if args.what == "arrangement":
        from .nabla import arrangement
        payload, kw = arrangement(args.window), {}
    elif args.what == "fixed-region":
        from .nabla import Window
        from .valuation import fixed_region
        payload, kw = fixed_region(args.auto), {"window": Window.parse(args.window)}
    elif args.what == "strip":
        from .amalgam import cyclic_reduce, normal_form, strip_data
        red, _ = cyclic_reduce(normal_form(args.group, _word(args.word)))
        payload, kw = strip_data(args.group, red.word()), {}
    else:
        from .discdiag import DiscDiagram
        payload, kw = DiscDiagram.from_json(_read(args.file)), {}
    svg = render_svg(payload, args.out, **kw)
    if not args.out:
        sys.stdout.write(svg)


# Parser -----------------------------------------------------------------

def _jobs_default() -> int | None:
    import os
    v = os.environ.get("TAME3_JOBS")
    return int(v) if v and v.isdigit() else None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    p = argparse.ArgumentParser(prog="tame3", description="Valuations, links and diagrams for tame automorphisms.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("val", parents=[common], help="evaluate a monomial valuation")
    s.add_argument("--weight", required=True)
    s.add_argument("--poly", required=True)
    s.add_argument("--label", help="automorphism f for nu_{f,alpha}")
    s.set_defaults(fn=cmd_val)

    s = sub.add_parser("fixed-region", parents=[common], help="inequalities of the fixed region")
    s.add_argument("--auto", required=True)
    s.set_defaults(fn=cmd_fixed_region)

    s = sub.add_parser("stab", parents=[common], help="stabilizer decomposition f = m o l")
    s.add_argument("--auto", required=True)
    s.add_argument("--weight", required=True)
    s.set_defaults(fn=cmd_stab)

    s = sub.add_parser("lines", parents=[common], help="admissible lines through a weight")
    s.add_argument("--weight", required=True)
    s.add_argument("--interior", action="store_true")
    s.set_defaults(fn=cmd_lines)

    s = sub.add_parser("arrange", parents=[common], help="arrangement of a window")
    s.add_argument("--window", required=True)
    s.set_defaults(fn=cmd_arrange)

    s = sub.add_parser("link-cycle", parents=[common], help="build and classify a link cycle")
    s.add_argument("--file")
    s.add_argument("--vertex")
    s.add_argument("--chambers", help="automorphisms separated by ';'")
    s.add_argument("--junctions", help="directions separated by ';'")
    s.add_argument("--arcs", help="ccw/cw per segment, separated by ';'")
    s.add_argument("--epsilon", type=float)
    s.set_defaults(fn=cmd_link_cycle)

    for name, fn, text in (("classify", cmd_classify, "isometry type and translation length"),
                           ("normal-form", cmd_normal_form, "alternating normal form in C or B'")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--group", required=True, choices=["C", "B'", "Bp"])
        s.add_argument("--word", required=True, help="letters separated by ';'")
        s.set_defaults(fn=fn)

    s = sub.add_parser("certify", parents=[common], help="exact kernel sweeps")
    s.add_argument("kind", choices=["plain", "weighted", "spade", "critical"])
    s.add_argument("--dmax", type=int, default=10)
    s.add_argument("--forms", help="JSON list of form triples [[a,b],[a,b],[a,b]]")
    s.add_argument("--random-forms", type=int, default=0)
    s.add_argument("--pmax", type=int, default=4)
    s.add_argument("--mmax", type=int, default=40)
    s.add_argument("--alphamax", type=int, default=100)
    s.add_argument("--jobs", type=int, default=_jobs_default())
    s.set_defaults(fn=cmd_certify)

    s = sub.add_parser("gb-check", parents=[common], help="Gauss-Bonnet sums")
    s.add_argument("--file")
    s.add_argument("--random", type=int, default=100)
    s.add_argument("--max-faces", type=int, default=30)
    s.add_argument("--window", default="a1/a2 in [3/2,4]; a2/a3 in [1,5/2]")
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(fn=cmd_gb_check)

    s = sub.add_parser("fold", parents=[common], help="folding locus, reducedness and star templates")
    s.add_argument("--file", required=True)
    s.add_argument("--epsilon", type=float)
    s.set_defaults(fn=cmd_fold)

    s = sub.add_parser("plot", parents=[common], help="SVG rendering")
    s.add_argument("what", choices=["arrangement", "fixed-region", "strip", "diagram"])
    s.add_argument("--window", default="a1/a2 in [1,3]; a2/a3 in [1,3]")
    s.add_argument("--auto")
    s.add_argument("--group", default="C")
    s.add_argument("--word")
    s.add_argument("--file")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_plot)
    return p


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except (ValueError, KeyError, ArithmeticError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
