"""Deterministic SVG output in chart coordinates."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .amalgam import InvariantStrip
from .discdiag import DiscDiagram, folding_locus
from .nabla import Arrangement, Window, chart_float
from .valuation import FixedRegion

SIZE = 480
PAD = 20
SAMPLES = 24


def _uv_chart(p) -> tuple[float, float]:
    return chart_float((float(p[0]), float(p[1]), 1.0))


def _segment(a, b, n: int = SAMPLES) -> list[tuple[float, float]]:
    """Chart image of the affine segment from a to b in (u, v) coordinates."""
    return [_uv_chart((a[0] + (b[0] - a[0]) * Fraction(k, n), a[1] + (b[1] - a[1]) * Fraction(k, n)))
            for k in range(n + 1)]


class _Canvas:
    def __init__(self, points: Iterable[tuple[float, float]]):
        pts = list(points)
        xs, ys = [p[0] for p in pts], [p[1] for p in pts]
        self.x0, self.y0 = min(xs), min(ys)
        span = max(max(xs) - self.x0, max(ys) - self.y0) or 1.0
        self.scale = (SIZE - 2 * PAD) / span
        self.items: list[str] = []

    def xy(self, p) -> str:
        x = PAD + (p[0] - self.x0) * self.scale
        y = SIZE - PAD - (p[1] - self.y0) * self.scale
        return f"{x:.3f},{y:.3f}"

    def polyline(self, pts, stroke="black", width=1.0, fill="none", closed=False, label: str | None = None) -> None:
        tag = "polygon" if closed else "polyline"
        extra = f' data-line="{label}"' if label else ""
        self.items.append(f'<{tag} points="{" ".join(self.xy(p) for p in pts)}" fill="{fill}" '
                          f'stroke="{stroke}" stroke-width="{width:.2f}"{extra}/>')

    def text(self, p, s: str) -> None:
        x, y = self.xy(p).split(",")
        self.items.append(f'<text x="{x}" y="{y}" font-size="10">{s}</text>')

    def svg(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
                f'viewBox="0 0 {SIZE} {SIZE}">')
        defs = ('<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
                '<path d="M0,0 L6,3 L0,6 z" fill="red"/></marker></defs>')
        return "\n".join([head, defs, *self.items, "</svg>"]) + "\n"


def arrangement_svg(arr: Arrangement) -> str:
    segs = [_segment(arr.nodes[a], arr.nodes[b]) for a, b, _ in arr.edges]
    cv = _Canvas(p for s in segs for p in s)
    for (a, b, lab), pts in zip(arr.edges, segs):
        if lab.startswith("window"):
            cv.polyline(pts, stroke="gray")
        else:
            cv.polyline(pts, label=lab)
    return cv.svg()


def _clip_halfplane(poly, row) -> list:
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = row[0] * p[0] + row[1] * p[1] + row[2]
        fq = row[0] * q[0] + row[1] * q[1] + row[2]
        if fp >= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = Fraction(fp) / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def fixed_region_svg(region: FixedRegion, window: Window) -> str:
    corners = window.corners()
    poly = list(corners)
    for r in region.rows:
        poly = _clip_halfplane(poly, r)
        if not poly:
            break
    frame = [p for i in range(4) for p in _segment(corners[i], corners[(i + 1) % 4])]
    cv = _Canvas(frame)
    if poly:
        shade = [p for i in range(len(poly)) for p in _segment(poly[i], poly[(i + 1) % len(poly)])]
        cv.polyline(shade, stroke="none", fill="#9ecae1", closed=True)
    cv.polyline(frame, stroke="gray", closed=True)
    return cv.svg()


def strip_svg(strip: InvariantStrip, xmax: float = 6.0) -> str:
    xs = [xmax * k / 60 for k in range(61)]
    curves = [[(x, b.curve_offset(x)) for x in xs] for b in strip.boundary]
    cv = _Canvas([p for c in curves for p in c] + [(0.0, 0.0)])
    cv.polyline([(0.0, 0.0), (xmax, 0.0)], stroke="gray")
    for b, c in zip(strip.boundary, curves):
        cv.polyline(c, stroke="blue")
        cv.text(c[-1], b.kind)
    return cv.svg()


def diagram_svg(D: DiscDiagram) -> str:
    faces = []
    for f in D.faces:
        vs = f.vertices
        pts = []
        for i in range(len(vs)):
            a, b = D.arr.nodes[D.vmap[vs[i]]], D.arr.nodes[D.vmap[vs[(i + 1) % len(vs)]]]
            pts += _segment(a, b)[:-1]
        faces.append(pts)
    cv = _Canvas(p for f in faces for p in f)
    for pts in faces:
        cv.polyline(pts, stroke="black", fill="#f0f0f0", closed=True, width=0.5)
    for fe in folding_locus(D):
        a, b = fe.oriented or fe.edge
        pts = _segment(D.arr.nodes[D.vmap[a]], D.arr.nodes[D.vmap[b]])
        cv.polyline(pts, stroke="red", width=2.0)
        if fe.oriented:
            mid = len(pts) // 2
            cv.items.append(f'<polyline points="{cv.xy(pts[mid - 1])} {cv.xy(pts[mid])}" stroke="red" '
                            f'marker-end="url(#arrow)"/>')
    return cv.svg()


def render_svg(payload, path: str | None = None, **kw) -> str:
    if isinstance(payload, Arrangement):
        out = arrangement_svg(payload)
    elif isinstance(payload, FixedRegion):
        out = fixed_region_svg(payload, kw["window"])
    elif isinstance(payload, InvariantStrip):
        out = strip_svg(payload)
    elif isinstance(payload, DiscDiagram):
        out = diagram_svg(payload)
    else:
        raise TypeError(f"cannot render {type(payload).__name__}")
    if path:
        with open(path, "w") as fh:
            fh.write(out)
    return out
