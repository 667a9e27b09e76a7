"""Euclidean geometry of the weight space in the logarithmic chart.

A weight ``[a1,a2,a3]`` maps to ``beta = log(a) - mean(log(a))`` and then to
orthogonal coordinates ``y = (b1 - b2)/sqrt2``, ``t = sqrt3 (b1 + b2)/sqrt2``.

Tangent directions at a rational weight toward a rational target are exact:
the derivative of ``log(alpha + s w)`` at ``s = 0`` is ``w_i / alpha_i``.  A
direction is stored as the rational pair ``(p, r)`` with chart vector
``(p/sqrt2, sqrt3 r/sqrt2)``, so orientation tests are exact.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from .valuation import Weight, weight

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


class DegenerateSegment(ValueError):
    pass


class PointsNotOnLine(ValueError):
    pass


class EmptyWindow(ValueError):
    pass


def proj(x) -> tuple[Fraction, Fraction, Fraction]:
    """A projective point with non-negative or arbitrary rational entries, not all zero."""
    if isinstance(x, Weight):
        return x.alpha
    if isinstance(x, str):
        m = re.fullmatch(r"\s*\[([^\]]*)\]\s*", x)
        if not m:
            raise ValueError(f"expected [a,b,c], got {x!r}")
        x = [Fraction(p.strip()) for p in m.group(1).split(",")]
    vals = tuple(Fraction(v) for v in x)
    if len(vals) != 3 or not any(vals):
        raise ValueError(f"bad projective point {x!r}")
    return vals


def _cross3(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


# Chart ----------------------------------------------------------------

@dataclass(frozen=True)
class LogChartPoint:
    y: float
    t: float

    def __sub__(self, other: LogChartPoint) -> tuple[float, float]:
        return (self.y - other.y, self.t - other.t)


def chart(alpha) -> LogChartPoint:
    a = [float(x) for x in weight(alpha).alpha]
    logs = [math.log(x) for x in a]
    mean = sum(logs) / 3
    b1, b2 = logs[0] - mean, logs[1] - mean
    return LogChartPoint((b1 - b2) / SQRT2, SQRT3 * (b1 + b2) / SQRT2)


def chart_float(alpha: Sequence[float]) -> tuple[float, float]:
    logs = [math.log(x) for x in alpha]
    mean = sum(logs) / 3
    b1, b2 = logs[0] - mean, logs[1] - mean
    return ((b1 - b2) / SQRT2, SQRT3 * (b1 + b2) / SQRT2)


def from_chart(y: float, t: float) -> tuple[float, float, float]:
    """A positive representative (min entry 1) of the weight with chart image (y, t)."""
    s = t / SQRT3
    b1 = (s + y) / SQRT2
    b2 = (s - y) / SQRT2
    b3 = -b1 - b2
    e = [math.exp(b) for b in (b1, b2, b3)]
    lo = min(e)
    return tuple(x / lo for x in e)


def distance(a, b) -> float:
    pa, pb = chart(a), chart(b)
    return math.hypot(pa.y - pb.y, pa.t - pb.t)


# Directions -------------------------------------------------------------

class Direction:
    """A unit tangent direction at a base weight, held exactly up to positive scale."""

    __slots__ = ("p", "r", "base", "label")

    def __init__(self, p: Fraction, r: Fraction, base: Weight | None = None, label: str | None = None):
        if p == 0 and r == 0:
            raise DegenerateSegment("zero tangent vector")
        self.p = Fraction(p)
        self.r = Fraction(r)
        self.base = base
        self.label = label

    @property
    def vector(self) -> tuple[float, float]:
        y, t = float(self.p) / SQRT2, SQRT3 * float(self.r) / SQRT2
        n = math.hypot(y, t)
        return (y / n, t / n)

    @property
    def angle(self) -> float:
        """Polar angle of the chart vector, measured from the y axis toward t."""
        y, t = self.vector
        return math.atan2(t, y)

    def cross(self, other: Direction) -> Fraction:
        # Proportional (factor sqrt3/2) to the chart cross product.
        return self.p * other.r - self.r * other.p

    def dot(self, other: Direction) -> Fraction:
        # Twice the chart dot product.
        return self.p * other.p + 3 * self.r * other.r

    def same(self, other: Direction) -> bool:
        return self.cross(other) == 0 and self.dot(other) > 0

    def opposite(self) -> Direction:
        return Direction(-self.p, -self.r, self.base)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Direction) and self.same(other)

    def __hash__(self) -> int:
        # Hash the normalized ray so equal directions collide.
        n = max(abs(self.p), abs(self.r))
        return hash((self.p / n, self.r / n))

    def __repr__(self) -> str:
        tag = f" {self.label}" if self.label else ""
        return f"Direction({math.degrees(self.angle):.3f}deg{tag})"

    def rotated(self) -> Direction:
        """The direction turned by +pi/2 in the chart."""
        # (y, t) -> (-t, y) translated back to (p, r).
        return Direction(-3 * self.r, self.p, self.base)


def tangent_vector(base, w: Sequence) -> Direction:
    """Tangent at ``base`` of the projective segment ``base + s w`` for small s > 0."""
    a = weight(base).alpha if not isinstance(base, tuple) else base
    v = [Fraction(w[i]) / a[i] for i in range(3)]
    p = v[0] - v[1]
    r = (v[0] + v[1] - 2 * v[2]) / 3
    if p == 0 and r == 0:
        raise DegenerateSegment(f"no segment from {list(a)} along {list(w)}")
    return Direction(p, r, base if isinstance(base, Weight) else None)


def tangent(base, target) -> Direction:
    """Direction at ``base`` toward the projective point ``target`` (entries may be zero)."""
    b = weight(base)
    return tangent_vector(b, proj(target))


def signed_angle(d1: Direction, d2: Direction) -> float:
    """Counterclockwise angle from d1 to d2 in (-pi, pi]."""
    cross = SQRT3 / 2 * float(d1.cross(d2))
    dot = float(d1.dot(d2)) / 2
    if d1.cross(d2) == 0:
        return 0.0 if d1.dot(d2) > 0 else math.pi
    return math.atan2(cross, dot)


def ccw_angle(d1: Direction, d2: Direction) -> float:
    """Counterclockwise sweep from d1 to d2 in [0, 2pi)."""
    a = signed_angle(d1, d2)
    return a if a >= 0 else a + 2 * math.pi


def angle_between(d1: Direction, d2: Direction) -> float:
    return abs(signed_angle(d1, d2))


def angle_at(base, p, q) -> float:
    """Riemannian angle at ``base`` between the segments toward ``p`` and ``q``."""
    return angle_between(tangent(base, p), tangent(base, q))


def direction_key(d: Direction):
    """Exact sort key by counterclockwise angle starting at the +y axis."""
    half = 0 if (d.r > 0 or (d.r == 0 and d.p > 0)) else 1
    return (half, d)


def _dir_cmp(a: Direction, b: Direction) -> int:
    ka, kb = direction_key(a)[0], direction_key(b)[0]
    if ka != kb:
        return ka - kb
    c = a.cross(b)
    return -1 if c > 0 else (1 if c < 0 else 0)


def sort_directions(ds: Iterable[Direction]) -> list[Direction]:
    return sorted(ds, key=cmp_to_key(_dir_cmp))


# Admissible lines -------------------------------------------------------

_LINE_RE = re.compile(r"\s*a([123])\s*=\s*(.+)")


class AdmissibleLine:
    """The projective line ``alpha_i = m_j alpha_j + m_k alpha_k`` (j < k the other indices)."""

    __slots__ = ("target", "coeffs")

    def __init__(self, target: int, coeffs: Sequence[int]):
        others = [k for k in (1, 2, 3) if k != target]
        mj, mk = (int(c) for c in coeffs)
        if mj < 0 or mk < 0 or (mj == 0 and mk == 0):
            raise ValueError("coefficients must be non-negative and not both zero")
        # alpha_i = alpha_j is the same line as alpha_j = alpha_i; keep the smaller target.
        if mj + mk == 1:
            j = others[0] if mj else others[1]
            if j < target:
                target, j = j, target
                others = [k for k in (1, 2, 3) if k != target]
                mj, mk = (1, 0) if others[0] == j else (0, 1)
        self.target = target
        self.coeffs = (mj, mk)

    @property
    def others(self) -> tuple[int, int]:
        o = [k for k in (1, 2, 3) if k != self.target]
        return (o[0], o[1])

    def row(self) -> tuple[int, int, int]:
        r = [0, 0, 0]
        r[self.target - 1] = 1
        for k, m in zip(self.others, self.coeffs):
            r[k - 1] = -m
        return tuple(r)

    def contains(self, x) -> bool:
        a = proj(x)
        return sum(c * v for c, v in zip(self.row(), a)) == 0

    def is_principal(self) -> bool:
        return 0 in self.coeffs

    def is_boundary(self) -> bool:
        """One of the walls alpha_i = alpha_j."""
        return sorted(self.coeffs) == [0, 1]

    def meets_dominant_interior(self) -> bool:
        mj, mk = self.coeffs
        if self.target == 1:
            return mj + mk >= 2
        if self.target == 2:
            return mj == 0 and mk >= 2
        return False

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AdmissibleLine) and (self.target, self.coeffs) == (other.target, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.target, self.coeffs))

    def __lt__(self, other: AdmissibleLine) -> bool:
        return (self.target, self.coeffs) < (other.target, other.coeffs)

    def __str__(self) -> str:
        terms = []
        for k, m in zip(self.others, self.coeffs):
            if m:
                terms.append(f"a{k}" if m == 1 else f"{m}*a{k}")
        return f"a{self.target} = " + " + ".join(terms)

    def __repr__(self) -> str:
        return f"AdmissibleLine({self})"

    @classmethod
    def parse(cls, text: str) -> AdmissibleLine:
        m = _LINE_RE.fullmatch(text)
        if not m:
            raise ValueError(f"bad line {text!r}")
        target = int(m.group(1))
        others = [k for k in (1, 2, 3) if k != target]
        coeffs = {k: 0 for k in others}
        for term in m.group(2).split("+"):
            tm = re.fullmatch(r"\s*(?:(\d+)\s*\*?\s*)?a([123])\s*", term)
            if not tm or int(tm.group(2)) not in coeffs:
                raise ValueError(f"bad term {term!r} in {text!r}")
            coeffs[int(tm.group(2))] += int(tm.group(1) or 1)
        return cls(target, [coeffs[k] for k in others])

    def directions_at(self, base) -> tuple[Direction, Direction]:
        """The two germs of the line at a point lying on it."""
        b = weight(base)
        if not self.contains(b):
            raise PointsNotOnLine(f"{b} is not on {self}")
        w = _cross3(self.row(), b.alpha)
        d = tangent_vector(b, w)
        d.label = str(self)
        e = d.opposite()
        e.label = str(self)
        return d, e


def lines_through(alpha, interior_only: bool = False) -> list[AdmissibleLine]:
    """All admissible lines containing ``alpha``."""
    a = weight(alpha).alpha
    found = set()
    for i in (1, 2, 3):
        j, k = [x for x in (1, 2, 3) if x != i]
        ai, aj, ak = a[i - 1], a[j - 1], a[k - 1]
        for mj in range(int(ai / aj) + 1):
            rest = ai - mj * aj
            mk = rest / ak
            if mk.denominator == 1 and mk >= 0 and (mj or mk):
                found.add(AdmissibleLine(i, (mj, int(mk))))
    lines = sorted(found)
    if interior_only:
        lines = [ln for ln in lines if ln.meets_dominant_interior()]
    return lines


def line_turning(line: AdmissibleLine, a, b) -> float:
    """Signed turning of the chart image of the segment of ``line`` from a to b."""
    wa, wb = weight(a), weight(b)
    if not (line.contains(wa) and line.contains(wb)):
        raise PointsNotOnLine(f"{wa} or {wb} not on {line}")
    if wa == wb:
        return 0.0
    start = tangent(wa, wb.alpha)
    end = tangent(wb, wa.alpha).opposite()
    return signed_angle(start, end)


def segment_turning(a, b) -> float:
    """Turning of the chart image of the projective segment from a to b."""
    wa, wb = weight(a), weight(b)
    if wa == wb:
        return 0.0
    return signed_angle(tangent(wa, wb.alpha), tangent(wb, wa.alpha).opposite())


def numeric_turning(a, b, steps: int = 10_000) -> float:
    """Integrated geodesic curvature of the chart image of the segment from a to b (test oracle)."""
    pa = [float(x) for x in weight(a).alpha]
    pb = [float(x) for x in weight(b).alpha]
    # chords centred on the parameters k/steps, so the first and last chord directions are the end tangents
    pts = [chart_float([pa[i] + (pb[i] - pa[i]) * (k - 0.5) / steps for i in range(3)]) for k in range(steps + 2)]
    total = 0.0
    prev = None
    for k in range(steps + 1):
        dy, dt = pts[k + 1][0] - pts[k][0], pts[k + 1][1] - pts[k][1]
        ang = math.atan2(dt, dy)
        if prev is not None:
            d = ang - prev
            while d > math.pi:
                d -= 2 * math.pi
            while d <= -math.pi:
                d += 2 * math.pi
            total += d
        prev = ang
    return total


def chart_translation(src, dst):
    """The chart translation taking chart(src) to chart(dst), as a function on weights."""
    ps, pd = chart(src), chart(dst)
    dy, dt = pd.y - ps.y, pd.t - ps.t

    def move(x) -> tuple[float, float]:
        p = chart(x)
        return (p.y + dy, p.t + dt)

    return move


# Arrangement ------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    lo1: Fraction
    hi1: Fraction
    lo2: Fraction
    hi2: Fraction

    @classmethod
    def parse(cls, text: str) -> Window:
        m = re.fullmatch(r"\s*a1/a2\s+in\s+\[([^,\]]+),([^\]]+)\]\s*;\s*a2/a3\s+in\s+\[([^,\]]+),([^\]]+)\]\s*", text)
        if not m:
            raise ValueError(f"bad window {text!r}")
        return cls.make(*(Fraction(g.strip()) for g in m.groups()))

    @classmethod
    def make(cls, lo1, hi1, lo2, hi2) -> Window:
        w = cls(Fraction(lo1), Fraction(hi1), Fraction(lo2), Fraction(hi2))
        if not (0 < w.lo1 < w.hi1 and 0 < w.lo2 < w.hi2):
            raise EmptyWindow(f"window {w} is empty or not positive")
        return w

    def __str__(self) -> str:
        return f"a1/a2 in [{self.lo1},{self.hi1}]; a2/a3 in [{self.lo2},{self.hi2}]"

    def corners(self) -> list[tuple[Fraction, Fraction]]:
        """Counterclockwise corners in the affine coordinates (u, v) = (a1/a3, a2/a3)."""
        return [(self.lo1 * self.lo2, self.lo2), (self.hi1 * self.lo2, self.lo2),
                (self.hi1 * self.hi2, self.hi2), (self.lo1 * self.hi2, self.hi2)]

    def contains(self, x) -> bool:
        a = proj(x)
        if a[2] <= 0 or a[1] <= 0:
            return False
        r1, r2 = a[0] / a[1], a[1] / a[2]
        return self.lo1 <= r1 <= self.hi1 and self.lo2 <= r2 <= self.hi2


def _uv(a) -> tuple[Fraction, Fraction]:
    return (a[0] / a[2], a[1] / a[2])


def _to_weight(p: tuple[Fraction, Fraction]) -> Weight:
    return Weight(p[0], p[1], 1)


def _row_at(row, p) -> Fraction:
    return row[0] * p[0] + row[1] * p[1] + row[2]


def _clip(row, poly_pts) -> list[tuple[Fraction, Fraction]] | None:
    """Intersect the affine line row.(u,v,1)=0 with a convex polygon; None if it runs along a side."""
    pts = []
    n = len(poly_pts)
    for i in range(n):
        p, q = poly_pts[i], poly_pts[(i + 1) % n]
        fp, fq = _row_at(row, p), _row_at(row, q)
        if fp == 0 and fq == 0:
            return None
        if fp == 0:
            pts.append(p)
        elif (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            pts.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    uniq = []
    for p in pts:
        if p not in uniq:
            uniq.append(p)
    return uniq if len(uniq) == 2 else []


def _intersect(r1, r2):
    det = r1[0] * r2[1] - r1[1] * r2[0]
    if det == 0:
        return None
    u = (r1[1] * r2[2] - r1[2] * r2[1]) / det
    v = (r1[2] * r2[0] - r1[0] * r2[2]) / det
    return (u, v)


def _on_segment(p, a, b) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if cross != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _param(p, a, b) -> Fraction:
    if a[0] != b[0]:
        return (p[0] - a[0]) / (b[0] - a[0])
    return (p[1] - a[1]) / (b[1] - a[1])


def _half(d) -> int:
    return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1


def _vec_cmp(a, b) -> int:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    c = a[0] * b[1] - a[1] * b[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


@dataclass
class Arrangement:
    window: Window
    lines: list[AdmissibleLine]
    nodes: list[tuple[Fraction, Fraction]]          # affine (u, v)
    edges: list[tuple[int, int, str]]               # node ids and supporting line or "window:k"
    faces: list[list[int]]                          # counterclockwise node cycles
    face_edges: list[list[int]]                     # edge ids along each face, aligned with faces
    vertices: list[int]                             # nodes lying on at least two admissible lines

    def weight_of(self, node: int) -> Weight:
        return _to_weight(self.nodes[node])

    def edge_faces(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {i: [] for i in range(len(self.edges))}
        for f, es in enumerate(self.face_edges):
            for e in es:
                out[e].append(f)
        return out

    def face_point(self, f: int) -> tuple[Fraction, Fraction, Fraction]:
        cyc = self.faces[f]
        u = sum(self.nodes[i][0] for i in cyc) / len(cyc)
        v = sum(self.nodes[i][1] for i in cyc) / len(cyc)
        return (u, v, Fraction(1))

    def line_of(self, e: int) -> AdmissibleLine | None:
        lab = self.edges[e][2]
        return None if lab.startswith("window") else AdmissibleLine.parse(lab)

    def euler(self) -> int:
        return len(self.nodes) - len(self.edges) + len(self.faces)

    def to_json(self) -> str:
        return json.dumps({
            "schema": "tame3/1",
            "window": str(self.window),
            "lines": [str(ln) for ln in self.lines],
            "vertices": [[str(x) for x in _to_weight(self.nodes[i]).alpha] for i in self.vertices],
            "nodes": [[str(u), str(v), "1"] for u, v in self.nodes],
            "edges": [[a, b, lab] for a, b, lab in self.edges],
            "faces": self.face_edges,
        })


def window_lines(window: Window) -> list[AdmissibleLine]:
    corners = window.corners()
    pts = [(u, v, Fraction(1)) for u, v in corners]
    out = []
    for i in (1, 2, 3):
        j, k = [x for x in (1, 2, 3) if x != i]
        bj = max(p[i - 1] / p[j - 1] for p in pts)
        bk = max(p[i - 1] / p[k - 1] for p in pts)
        for mj in range(int(bj) + 1):
            for mk in range(int(bk) + 1):
                if mj or mk:
                    out.append(AdmissibleLine(i, (mj, mk)))
    return sorted(set(out))


def arrangement(window: Window | str) -> Arrangement:
    """Planar subdivision of the window by the admissible lines, with exact rational nodes."""
    if isinstance(window, str):
        window = Window.parse(window)
    corners = window.corners()
    segments = []  # (a, b, label, row or None)
    for k in range(4):
        segments.append((corners[k], corners[(k + 1) % 4], f"window:{k}", None))
    used_lines = []
    for ln in window_lines(window):
        row = ln.row()
        clip = _clip(row, corners)
        if not clip:
            continue
        used_lines.append(ln)
        segments.append((clip[0], clip[1], str(ln), row))
    cuts: list[list[tuple[Fraction, Fraction]]] = [[a, b] for a, b, _, _ in segments]
    for i in range(len(segments)):
        for j in range(i + 1, len(segments)):
            a1, b1, _, _ = segments[i]
            a2, b2, _, _ = segments[j]
            r1 = _seg_row(a1, b1)
            r2 = _seg_row(a2, b2)
            p = _intersect(r1, r2)
            if p is None:
                continue
            if _on_segment(p, a1, b1) and _on_segment(p, a2, b2):
                cuts[i].append(p)
                cuts[j].append(p)
    node_id: dict[tuple[Fraction, Fraction], int] = {}
    nodes: list[tuple[Fraction, Fraction]] = []

    def nid(p):
        if p not in node_id:
            node_id[p] = len(nodes)
            nodes.append(p)
        return node_id[p]

    edges: list[tuple[int, int, str]] = []
    for (a, b, label, _), pts in zip(segments, cuts):
        uniq = sorted(set(pts), key=lambda p: _param(p, a, b))
        for p, q in zip(uniq, uniq[1:]):
            edges.append((nid(p), nid(q), label))
    # Half-edge face extraction.
    out: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(nodes))}
    for e, (a, b, _) in enumerate(edges):
        out[a].append((b, e))
        out[b].append((a, e))
    order: dict[int, list[tuple[int, int]]] = {}
    for v, nbrs in out.items():
        p = nodes[v]
        order[v] = sorted(nbrs, key=cmp_to_key(
            lambda x, y: _vec_cmp((nodes[x[0]][0] - p[0], nodes[x[0]][1] - p[1]),
                                  (nodes[y[0]][0] - p[0], nodes[y[0]][1] - p[1]))))
    seen = set()
    faces, face_edges = [], []
    for e, (a, b, _) in enumerate(edges):
        for start in ((a, b), (b, a)):
            if start in seen:
                continue
            cyc, ces = [], []
            u, v = start
            while (u, v) not in seen:
                seen.add((u, v))
                cyc.append(u)
                lst = order[v]
                idx = next(i for i, (w, _) in enumerate(lst) if w == u)
                nxt, eid = lst[(idx - 1) % len(lst)]
                back = next(eid2 for w, eid2 in lst if w == u)
                ces.append(back)
                u, v = v, nxt
            area = sum(nodes[cyc[i]][0] * nodes[cyc[(i + 1) % len(cyc)]][1]
                       - nodes[cyc[(i + 1) % len(cyc)]][0] * nodes[cyc[i]][1] for i in range(len(cyc)))
            if area > 0:
                faces.append(cyc)
                face_edges.append(ces)
    vertices = []
    for i, p in enumerate(nodes):
        on = sum(1 for ln in used_lines if _row_at(ln.row(), p) == 0)
        if on >= 2:
            vertices.append(i)
    return Arrangement(window, used_lines, nodes, edges, faces, face_edges, vertices)


def _seg_row(a, b):
    # Affine line through a and b as (c1, c2, c3) with c1 u + c2 v + c3 = 0.
    c1 = b[1] - a[1]
    c2 = a[0] - b[0]
    return (c1, c2, -(c1 * a[0] + c2 * a[1]))


def local_faces_at(arr: Arrangement, node: int) -> int:
    return sum(1 for cyc in arr.faces if node in cyc)


# Link of a weight inside the dominant chamber ---------------------------

def germ_log_vector(d: Direction) -> tuple[Fraction, Fraction, Fraction]:
    """The zero-sum log-derivative vector whose chart image is d."""
    return ((d.r + d.p) / 2, (d.r - d.p) / 2, -d.r)


def first_order(row: Sequence, alpha, d: Direction) -> Fraction:
    """Derivative of ``row . alpha`` along d, up to a positive factor, for rows tight at alpha."""
    a = proj(alpha)
    v = germ_log_vector(d)
    return sum(Fraction(c) * x * y for c, x, y in zip(row, a, v))


def inside_sweep(d1: Direction, d2: Direction) -> Direction:
    """A direction strictly inside the counterclockwise sweep from d1 to d2."""
    c = d1.cross(d2)
    if c > 0:
        return Direction(d1.p + d2.p, d1.r + d2.r)
    if c < 0:
        return Direction(-(d1.p + d2.p), -(d1.r + d2.r))
    if d1.dot(d2) < 0:
        return d1.rotated()
    return d1.opposite()


def in_dominant_cone(d: Direction, alpha) -> bool:
    """Whether the germ in direction d at alpha stays in the closed dominant chamber."""
    a = proj(alpha)
    for row in ((1, -1, 0), (0, 1, -1)):
        if sum(r * x for r, x in zip(row, a)) == 0 and first_order(row, a, d) < 0:
            return False
    return True


def chamber_link(alpha) -> tuple[list[Direction], list[float]]:
    """Germs of admissible lines at alpha inside the dominant chamber in angular order, with
    the angles between consecutive germs.  For interior weights the list is cyclic; on the
    walls it runs from one wall germ to the other across the chamber."""
    w = weight(alpha)
    if not w.is_dominant():
        raise ValueError(f"{w} is not dominant")
    dirs: list[Direction] = []
    for ln in lines_through(w):
        for d in ln.directions_at(w):
            if in_dominant_cone(d, w) and not any(d.same(x) for x in dirs):
                dirs.append(d)
    dirs = sort_directions(dirs)
    n = len(dirs)
    interior = w.alpha[0] > w.alpha[1] > w.alpha[2]
    if interior:
        return dirs, [ccw_angle(dirs[i], dirs[(i + 1) % n]) for i in range(n)]
    start = next(i for i in range(n) if not in_dominant_cone(inside_sweep(dirs[i - 1], dirs[i]), w))
    dirs = dirs[start:] + dirs[:start]
    return dirs, [ccw_angle(dirs[i], dirs[i + 1]) for i in range(n - 1)]
