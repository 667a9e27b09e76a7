"""Disc diagrams over a window of the admissible-line arrangement.

A diagram is a planar disc glued from copies of arrangement faces.  Each copy carries a chamber
label and may be flipped (its diagram orientation is the mirror of the chart orientation), which
is how folds are represented.  Curvature bookkeeping is intrinsic: corner angles and side
turnings are read off the arrangement face a copy maps to.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .links import LinkCycle, VertexLink
from .nabla import Arrangement, Window, arrangement, ccw_angle, segment_turning, tangent, tangent_vector, _cross3
from .tame import Automorphism, auto
from .valuation import Weight, fixed_region

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
THIRD = math.pi / 3
TOL = 1e-9
WALL_ROWS = ((1, -1, 0), (0, 1, -1))


class InvalidDiagram(ValueError):
    pass


class AngleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DFace:
    arr_face: int
    chamber: Automorphism
    vertices: tuple[int, ...]   # diagram vertices in diagram-counterclockwise order
    flipped: bool = False


def _rotation_of(seq: Sequence[int], cyc: Sequence[int]) -> bool:
    n = len(cyc)
    if len(seq) != n or not seq or seq[0] not in cyc:
        return False
    k = cyc.index(seq[0])
    return all(seq[i] == cyc[(k + i) % n] for i in range(n))


def _line_row(wa: Weight, wb: Weight) -> tuple[Fraction, Fraction, Fraction]:
    r = _cross3(wa.alpha, wb.alpha)
    g = next(x for x in r if x)
    return tuple(x / abs(g) for x in r)


def _same_row(r, s) -> bool:
    return _cross3(r, s) == (0, 0, 0)


class DiscDiagram:
    def __init__(self, arr: Arrangement, faces: Sequence[DFace], vmap: dict[int, int]):
        self.arr = arr
        self.faces = list(faces)
        self.vmap = dict(vmap)
        self._corner_cache: dict[tuple[int, int], float] = {}
        self._validate()

    # Construction ---------------------------------------------------------

    @classmethod
    def embedded(cls, arr: Arrangement, face_ids: Sequence[int], chambers: Sequence | None = None) -> DiscDiagram:
        """The union of distinct arrangement faces, with diagram vertices equal to arrangement nodes."""
        chambers = chambers or [Automorphism.identity()] * len(face_ids)
        faces = [DFace(f, auto(c), tuple(arr.faces[f])) for f, c in zip(face_ids, chambers)]
        used = {v for f in faces for v in f.vertices}
        return cls(arr, faces, {v: v for v in used})

    def _validate(self) -> None:
        arr = self.arr
        if not self.faces:
            raise InvalidDiagram("no faces")
        directed: dict[tuple[int, int], int] = {}
        for k, f in enumerate(self.faces):
            if not 0 <= f.arr_face < len(arr.faces):
                raise InvalidDiagram(f"face {k}: no arrangement face {f.arr_face}")
            if len(set(f.vertices)) != len(f.vertices):
                raise InvalidDiagram(f"face {k} repeats a vertex")
            try:
                image = [self.vmap[v] for v in f.vertices]
            except KeyError as e:
                raise InvalidDiagram(f"face {k}: vertex {e} has no image") from None
            cyc = arr.faces[f.arr_face]
            if not _rotation_of(image[::-1] if f.flipped else image, cyc):
                raise InvalidDiagram(f"face {k} does not map onto arrangement face {f.arr_face}")
            n = len(f.vertices)
            for i in range(n):
                e = (f.vertices[i], f.vertices[(i + 1) % n])
                if e in directed:
                    raise InvalidDiagram(f"edge {e} traversed twice in the same direction")
                directed[e] = k
        self.edge_faces: dict[tuple[int, int], list[int]] = {}
        for (a, b), k in directed.items():
            self.edge_faces.setdefault((min(a, b), max(a, b)), []).append(k)
        self.boundary_edges = [(a, b) for (a, b) in directed if (b, a) not in directed]
        nxt: dict[int, int] = {}
        for a, b in self.boundary_edges:
            if a in nxt:
                raise InvalidDiagram(f"vertex {a} is pinched")
            nxt[a] = b
        if not nxt:
            raise InvalidDiagram("closed surface, not a disc")
        start = next(iter(nxt))
        cycle, v = [start], nxt[start]
        while v != start:
            cycle.append(v)
            v = nxt[v]
        if len(cycle) != len(nxt):
            raise InvalidDiagram("boundary has several components")
        self.boundary_cycle = cycle
        verts = {v for f in self.faces for v in f.vertices}
        self.vertices = sorted(verts)
        if len(verts) - len(self.edge_faces) + len(self.faces) != 1:
            raise InvalidDiagram("Euler characteristic is not 1")
        self._check_connected()
        for k, f in enumerate(self.faces):
            for i in range(len(f.vertices)):
                if self.corner_angle(k, i) <= 0:
                    raise InvalidDiagram(f"non-positive corner in face {k}")

    def _check_connected(self) -> None:
        adj: dict[int, set[int]] = {k: set() for k in range(len(self.faces))}
        for fs in self.edge_faces.values():
            if len(fs) == 2:
                adj[fs[0]].add(fs[1])
                adj[fs[1]].add(fs[0])
        seen, todo = {0}, [0]
        while todo:
            for m in adj[todo.pop()]:
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        if len(seen) != len(self.faces):
            raise InvalidDiagram("faces are not connected across edges")

    # Geometry ------------------------------------------------------------

    def weight(self, v: int) -> Weight:
        return self.arr.weight_of(self.vmap[v])

    @property
    def interior_vertices(self) -> list[int]:
        bd = set(self.boundary_cycle)
        return [v for v in self.vertices if v not in bd]

    def corner_angle(self, k: int, i: int) -> float:
        f = self.faces[k]
        node = self.vmap[f.vertices[i]]
        key = (f.arr_face, node)
        if key not in self._corner_cache:
            cyc = self.arr.faces[f.arr_face]
            j = cyc.index(node)
            w = self.arr.weight_of(node)
            nxt = self.arr.weight_of(cyc[(j + 1) % len(cyc)])
            prv = self.arr.weight_of(cyc[j - 1])
            self._corner_cache[key] = ccw_angle(tangent(w, nxt.alpha), tangent(w, prv.alpha))
        return self._corner_cache[key]

    def side_turning(self, k: int, i: int) -> float:
        """Turning of side i of face k, traversed counterclockwise around its arrangement face."""
        f = self.faces[k]
        n = len(f.vertices)
        a, b = self.weight(f.vertices[i]), self.weight(f.vertices[(i + 1) % n])
        return segment_turning(b, a) if f.flipped else segment_turning(a, b)

    def edge_line(self, e: tuple[int, int]) -> tuple[Fraction, Fraction, Fraction]:
        return _line_row(self.weight(e[0]), self.weight(e[1]))

    def on_wall(self, e: tuple[int, int]) -> bool:
        row = self.edge_line(e)
        return any(_same_row(row, w) for w in WALL_ROWS)

    def fan(self, v: int) -> list[tuple[int, int]]:
        """(face, corner index) around an interior vertex in counterclockwise order."""
        corners = {}
        for k, f in enumerate(self.faces):
            if v in f.vertices:
                i = f.vertices.index(v)
                corners[f.vertices[(i + 1) % len(f.vertices)]] = (k, i)
        if v in self.boundary_cycle:
            raise InvalidDiagram(f"vertex {v} is on the boundary")
        start = next(iter(corners))
        out, nb = [], start
        while True:
            k, i = corners[nb]
            out.append((k, i))
            nb = self.faces[k].vertices[i - 1]
            if nb == start:
                break
        if len(out) != len(corners):
            raise InvalidDiagram(f"the star of {v} is not a single fan")
        return out

    def to_dict(self) -> dict:
        return {"schema": "tame3/1", "window": str(self.arr.window),
                "faces": [{"arr_face": f.arr_face, "chamber": str(f.chamber), "vertices": list(f.vertices),
                           "flipped": f.flipped} for f in self.faces],
                "vmap": {str(k): v for k, v in sorted(self.vmap.items())}}

    @classmethod
    def from_json(cls, text: str | dict) -> DiscDiagram:
        d = json.loads(text) if isinstance(text, str) else text
        arr = arrangement(Window.parse(d["window"]))
        faces = d["faces"]
        if all("vertices" not in f for f in faces):
            return cls.embedded(arr, [f["arr_face"] for f in faces], [f.get("chamber", "(x1,x2,x3)") for f in faces])
        try:
            vmap = {int(k): int(v) for k, v in d["vmap"].items()}
            dfaces = [DFace(int(f["arr_face"]), auto(f.get("chamber", "(x1,x2,x3)")), tuple(f["vertices"]),
                            bool(f.get("flipped", False))) for f in faces]
        except (KeyError, TypeError) as e:
            raise InvalidDiagram(f"malformed diagram: {e}") from None
        return cls(arr, dfaces, vmap)


# Curvature --------------------------------------------------------------

@dataclass
class Curvatures:
    vertex: dict[int, float]            # kappa at interior vertices, kappa_boundary at boundary ones
    boundary: frozenset[int]
    edge: dict[tuple[int, int], float]

    def total(self) -> float:
        return math.fsum(self.vertex.values()) + math.fsum(self.edge.values())


def curvatures(D: DiscDiagram) -> Curvatures:
    angle = {v: 0.0 for v in D.vertices}
    edge = {e: 0.0 for e in D.edge_faces}
    for k, f in enumerate(D.faces):
        n = len(f.vertices)
        for i in range(n):
            angle[f.vertices[i]] += D.corner_angle(k, i)
            a, b = f.vertices[i], f.vertices[(i + 1) % n]
            edge[(min(a, b), max(a, b))] += D.side_turning(k, i)
    bd = frozenset(D.boundary_cycle)
    vertex = {v: (math.pi if v in bd else TWO_PI) - angle[v] for v in D.vertices}
    return Curvatures(vertex, bd, edge)


def gauss_bonnet(D: DiscDiagram) -> float:
    return curvatures(D).total()


# Folding locus ----------------------------------------------------------

@dataclass(frozen=True)
class FoldEdge:
    edge: tuple[int, int]
    line: tuple[Fraction, Fraction, Fraction]
    oriented: tuple[int, int] | None = None     # (tail, head) when the edge lies on a principal line

    def to_dict(self) -> dict:
        return {"edge": list(self.edge), "line": [str(x) for x in self.line],
                "oriented": list(self.oriented) if self.oriented else None}


def _principal_vertex(row) -> int | None:
    """For a row of the line a_i = m a_j, the index k of the coordinate vertex e_k on it."""
    zeros = [k for k in range(3) if row[k] == 0]
    return zeros[0] if len(zeros) == 1 else None


def _orientation(D: DiscDiagram, e: tuple[int, int], row) -> tuple[int, int] | None:
    k = _principal_vertex(row)
    if k is None:
        return None
    a, b = e
    wa = D.weight(a)
    away = tangent_vector(wa, tuple(-1 if i == k else 0 for i in range(3)))
    return (a, b) if tangent(wa, D.weight(b).alpha).same(away) else (b, a)


def folding_locus(D: DiscDiagram) -> list[FoldEdge]:
    out = []
    for e, fs in sorted(D.edge_faces.items()):
        if len(fs) != 2 or D.faces[fs[0]].arr_face != D.faces[fs[1]].arr_face:
            continue
        if D.on_wall(e):
            continue
        row = D.edge_line(e)
        out.append(FoldEdge(e, row, _orientation(D, e, row)))
    return out


def _line_in_region(row, region) -> bool:
    """Whether the part of the projective line in the closed dominant chamber lies in the region."""
    corners = ((1, 0, 0), (1, 1, 0), (1, 1, 1))
    pts = []
    for i in range(3):
        p, q = corners[i], corners[(i + 1) % 3]
        fp = sum(r * x for r, x in zip(row, p))
        fq = sum(r * x for r, x in zip(row, q))
        if fp == 0:
            pts.append(tuple(Fraction(x) for x in p))
        elif (fp < 0 < fq) or (fq < 0 < fp):
            s = Fraction(fp, 1) / (fp - fq)
            pts.append(tuple(p[j] + s * (q[j] - p[j]) for j in range(3)))
    return all(sum(c * x for c, x in zip(r, pt)) >= 0 for r in region.rows for pt in pts)


def is_x_reduced(D: DiscDiagram) -> tuple[bool, list[FoldEdge]]:
    """A fold is a non-reduction when the transition between its two labels fixes the whole
    supporting line inside the dominant chamber."""
    bad = []
    for fe in folding_locus(D):
        k1, k2 = D.edge_faces[fe.edge]
        h = D.faces[k1].chamber.inverse().compose(D.faces[k2].chamber)
        if _line_in_region(fe.line, fixed_region(h)):
            bad.append(fe)
    return (not bad, bad)


# Stars of interior vertices ---------------------------------------------

@dataclass
class StarMatch:
    template: str                      # "a".."i", "NoFold" or "NoMatch"
    angles: list[float]                # between consecutive fold edges, counterclockwise
    folds: list[tuple[tuple[int, int], str | None]]   # (edge, "in" / "out" / None)
    total_angle: float

    def to_dict(self) -> dict:
        return {"template": self.template, "angles": self.angles, "total_angle": self.total_angle,
                "folds": [{"edge": list(e), "orientation": o} for e, o in self.folds]}


def _mult3(x: float) -> bool:
    k = round(x / THIRD)
    return k >= 1 and abs(x - k * THIRD) < TOL


def _gt(x: float, y: float) -> bool:
    return x > y + TOL


def match_template(angles: Sequence[float]) -> str:
    """Match the cyclic sequence of angles between fold edges against the catalogue."""
    n = len(angles)
    if n == 0:
        return "NoFold"
    rots = [list(angles[i:]) + list(angles[:i]) for i in range(n)]
    if n == 3 and all(abs(a - 2 * THIRD) < TOL for a in angles):
        return "a"
    if n == 2:
        if all(abs(a - math.pi) < TOL for a in angles):
            return "b"
        if all(_gt(a, math.pi) for a in angles):
            return "c"
        if all(a > math.pi - TOL for a in angles):
            return "d"
    if n == 4:
        if all(_mult3(a) for a in angles):
            return "e"
        # Rotations read (top-left, top-right, bottom-right, bottom-left).
        if any(_mult3(r[0]) and _mult3(r[1]) and _gt(r[2], THIRD) and _gt(r[3], THIRD) for r in rots):
            return "f"
        if any(_gt(r[0], THIRD) and _gt(r[1], THIRD) and _gt(r[2], 2 * THIRD) and _gt(r[3], 2 * THIRD)
               for r in rots):
            return "h"
        if any(_gt(r[2], THIRD) and _gt(r[3], THIRD) and r[0] + r[3] > math.pi - TOL and r[1] + r[2] > math.pi - TOL
               for r in rots):
            return "g"
    if n == 6 and all(_gt(a, THIRD) for a in angles):
        return "i"
    return "NoMatch"


def star_classify(D: DiscDiagram, v: int, epsilon: float | None = None) -> StarMatch:
    fan = D.fan(v)
    total = math.fsum(D.corner_angle(k, i) for k, i in fan)
    if epsilon is None:
        epsilon = VertexLink(D.weight(v)).default_epsilon()
    if total >= TWO_PI + epsilon:
        raise AngleTooLarge(f"angle {total:.9f} at vertex {v} is not below 2pi + {epsilon:.9f}")
    folds = {fe.edge: fe for fe in folding_locus(D)}
    marks, acc = [], 0.0
    for k, i in fan:
        f = D.faces[k]
        nb = f.vertices[(i + 1) % len(f.vertices)]
        e = (min(v, nb), max(v, nb))
        if e in folds:
            o = folds[e].oriented
            marks.append((acc, e, None if o is None else ("out" if o[0] == v else "in")))
        acc += D.corner_angle(k, i)
    angles = [(marks[(j + 1) % len(marks)][0] - marks[j][0]) % total or total for j in range(len(marks))]
    if len(marks) == 1:
        angles = [total]
    tpl = match_template(angles)
    if tpl == "NoMatch" and is_x_reduced(D)[0]:
        log.warning("star at vertex %d matches no template: angles %s", v, [round(a, 6) for a in angles])
    return StarMatch(tpl, angles, [(e, o) for _, e, o in marks], total)


# Builders ---------------------------------------------------------------

def _sectors(arr: Arrangement, node: int) -> list[tuple[int, int, int]]:
    """(face, next node, previous node) for each arrangement face at the node."""
    out = []
    for f, cyc in enumerate(arr.faces):
        if node in cyc:
            j = cyc.index(node)
            out.append((f, cyc[(j + 1) % len(cyc)], cyc[j - 1]))
    return out


def star_from_cycle(cycle: LinkCycle, delta: Fraction = Fraction(1, 40)) -> tuple[DiscDiagram, int]:
    """The star of a vertex in a disc diagram whose link is the given cycle."""
    w = cycle.vertex
    a = w.alpha
    r1, r2 = a[0] / a[1], a[1] / a[2]
    win = Window.make(r1 * (1 - delta), r1 * (1 + delta), r2 * (1 - delta), r2 * (1 + delta))
    arr = arrangement(win)
    center = next((i for i, p in enumerate(arr.nodes) if (p[0], p[1]) == (a[0] / a[2], a[1] / a[2])), None)
    if center is None:
        raise InvalidDiagram(f"{w} is not a node of the arrangement")
    sectors = _sectors(arr, center)

    def node_toward(d):
        for f, nb, _ in sectors:
            if tangent(w, arr.weight_of(nb).alpha).same(d):
                return nb
        raise InvalidDiagram(f"no arrangement edge at {w} in direction {d!r}")

    link = cycle.link
    copies = []   # (arrangement face, chamber, flipped, entry node, exit node)
    for seg in cycle.segments:
        if seg.length == 0:
            continue
        ccw = seg.step * link.orient > 0
        cur = node_toward(seg.start)
        end = node_toward(seg.end)
        swept = 0.0
        while True:
            if ccw:
                f, nb, pv = next(s for s in sectors if s[1] == cur)
                copies.append((f, seg.chamber, False, nb, pv))
                cur = pv
            else:
                f, nb, pv = next(s for s in sectors if s[2] == cur)
                copies.append((f, seg.chamber, True, pv, nb))
                cur = nb
            swept += ccw_angle(tangent(w, arr.weight_of(nb).alpha), tangent(w, arr.weight_of(pv).alpha))
            if cur == end and (not seg.full or swept > math.pi):
                break
    vmap = {0: center}
    faces = []
    n = len(copies)
    radial = []
    for k in range(n):
        rid = len(vmap)
        vmap[rid] = copies[k][4]
        radial.append(rid)
    for k, (f, chamber, flipped, entry, exit_) in enumerate(copies):
        cyc = arr.faces[f]
        j = cyc.index(center)
        order = [cyc[(j + i) % len(cyc)] for i in range(len(cyc))]
        if flipped:
            order = [order[0]] + order[1:][::-1]
        verts = [0]
        for node in order[1:]:
            if node == entry:
                verts.append(radial[k - 1])
            elif node == exit_:
                verts.append(radial[k])
            else:
                vid = len(vmap)
                vmap[vid] = node
                verts.append(vid)
        faces.append(DFace(f, chamber, tuple(verts), flipped))
    return DiscDiagram(arr, faces, vmap), 0


GROWTH_WINDOW = "a1/a2 in [3/2,4]; a2/a3 in [1,5/2]"


def random_diagram(rng: random.Random, max_faces: int = 30, window: str | Window = GROWTH_WINDOW,
                   arr: Arrangement | None = None) -> DiscDiagram:
    """Grow a disc face by face across boundary edges, rejecting additions that break the disc."""
    arr = arr or arrangement(window)
    target = rng.randint(1, max_faces)
    by_edge = arr.edge_faces()
    faces = [rng.randrange(len(arr.faces))]
    D = DiscDiagram.embedded(arr, faces)
    tried: set[int] = set()
    while len(faces) < target:
        cands = sorted({g for f in faces for e in arr.face_edges[f] for g in by_edge[e]
                        if g not in faces and g not in tried})
        if not cands:
            break
        g = rng.choice(cands)
        try:
            D = DiscDiagram.embedded(arr, faces + [g])
            faces.append(g)
            tried.clear()
        except InvalidDiagram:
            tried.add(g)
    return D


def folded_pair(arr: Arrangement, face: int, edge: tuple[int, int], f="(x1,x2,x3)", g="(x1,x2,x3)") -> DiscDiagram:
    """An arrangement face and its mirror copy glued along one of its edges."""
    cyc = arr.faces[face]
    a, b = edge
    n = len(cyc)
    j = cyc.index(a)
    if cyc[(j + 1) % n] != b:
        if cyc[j - 1] != b:
            raise InvalidDiagram(f"{edge} is not an edge of face {face}")
        a, b = b, a
    vmap = {v: v for v in cyc}
    mirror = []
    for v in cyc:
        if v in (a, b):
            mirror.append(v)
        else:
            vid = max(vmap) + 1
            vmap[vid] = v
            mirror.append(vid)
    faces = [DFace(face, auto(f), tuple(cyc)), DFace(face, auto(g), tuple(mirror[::-1]), True)]
    return DiscDiagram(arr, faces, vmap)


def edge_on_line(arr: Arrangement, line: str) -> tuple[int, int, int]:
    """(face, node, node) for the first arrangement edge on the named line with a face on each side."""
    by_edge = arr.edge_faces()
    for e, (a, b, lab) in enumerate(arr.edges):
        if lab == line and len(by_edge[e]) == 2:
            return by_edge[e][0], a, b
    raise InvalidDiagram(f"no interior edge on {line}")
