"""Links of vertices: shared directions between chambers, cycles and their classification.

Directions at a vertex are positioned by their counterclockwise angle from q.
On a wall the chamber link I is the arc from q (position 0) to s (position pi);
at an interior weight it is the whole circle, with s at position pi.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .nabla import (Direction, ccw_angle, chamber_link, first_order, inside_sweep, in_dominant_cone,
                    proj, tangent)
from .tame import Automorphism, auto
from .valuation import Weight, fixed_region, is_fixed, weight

TWO_PI = 2 * math.pi
LENGTH_TOL = 1e-6


class NotInStabilizer(ValueError):
    pass


class JunctionNotShared(ValueError):
    def __init__(self, index: int, msg: str = ""):
        super().__init__(f"junction {index} is not shared by its chambers{': ' + msg if msg else ''}")
        self.index = index


class Backtrack(ValueError):
    def __init__(self, index: int):
        super().__init__(f"the cycle backtracks at junction {index}")
        self.index = index


class UnsupportedVertex(ValueError):
    pass


class VertexLink:
    """The link I of a dominant weight, with its named directions and candidate germs."""

    def __init__(self, vertex):
        w = weight(vertex)
        if not w.is_dominant():
            raise UnsupportedVertex(f"{w} is not dominant")
        a = w.alpha
        self.vertex = w
        if a[0] == a[1] == a[2]:
            raise UnsupportedVertex("the link at [1,1,1] is a spherical building; not modelled")
        if a[0] == a[1]:
            self.kind = "mm1"
            s_t, q_t = (1, 1, 1), (1, 1, 0)
        elif a[1] == a[2]:
            self.kind = "m11"
            s_t, q_t = (1, 1, 1), (1, 0, 0)
        else:
            self.kind = "interior"
            s_t, q_t = (0, a[1], a[2]), (1, 0, 0)
        self.s = tangent(w, s_t)
        self.s.label = "s"
        self.q = tangent(w, q_t)
        self.q.label = "q"
        self.interior = self.kind == "interior"
        if self.interior:
            self.orient = 1
        else:
            self.orient = 1 if in_dominant_cone(inside_sweep(self.q, self.s), w) else -1
        germs, _ = chamber_link(w)
        cands = list(germs)
        for d in (self.s, self.q):
            if not any(d.same(c) for c in cands):
                cands.append(d)
        for c in cands:
            if c.same(self.s):
                c.label = "s"
            elif c.same(self.q):
                c.label = "q"
        self.candidates = sorted(cands, key=self.pos)

    def pos(self, d: Direction) -> float:
        if d.same(self.q):
            return 0.0
        if d.same(self.s):
            return math.pi
        return ccw_angle(self.q, d) if self.orient == 1 else ccw_angle(d, self.q)

    def in_I(self, d: Direction) -> bool:
        return in_dominant_cone(d, self.vertex)

    def parse_direction(self, text) -> Direction:
        if isinstance(text, Direction):
            return text
        t = str(text).strip()
        if t == "s":
            return self.s
        if t == "q":
            return self.q
        d = tangent(self.vertex, proj(t))
        d.label = t
        if not self.in_I(d):
            raise ValueError(f"direction toward {t} leaves the dominant chamber at {self.vertex}")
        return d

    def name(self, d: Direction) -> str:
        if d.same(self.s):
            return "s"
        if d.same(self.q):
            return "q"
        return d.label or f"{math.degrees(self.pos(d)):.4f}deg"

    def beyond(self, d: Direction, side: int) -> Direction | None:
        """A direction strictly past d on the given side (+1 increasing position), or None
        when that side leaves I."""
        p = self.pos(d)
        if not self.interior and ((side > 0 and p >= math.pi - 1e-12 and d.same(self.s)) or
                                  (side < 0 and d.same(self.q))):
            return None
        ordered = self.candidates
        if side > 0:
            nxt = next((c for c in ordered if self.pos(c) > p + 1e-12 and not c.same(d)), None)
            if nxt is None:
                nxt = ordered[0] if self.interior else None
        else:
            nxt = next((c for c in reversed(ordered) if self.pos(c) < p - 1e-12 and not c.same(d)), None)
            if nxt is None:
                nxt = ordered[-1] if self.interior else None
        if nxt is None:
            return None
        ccw = (side > 0) == (self.orient == 1)
        return inside_sweep(d, nxt) if ccw else inside_sweep(nxt, d)

    def default_epsilon(self) -> float:
        a = self.vertex.alpha
        if self.kind == "m11":
            m = a[0]
            return _angle(self.vertex, (m / 4, 1, 0), (0, 1, 0))
        if self.kind == "mm1":
            return 2 * math.pi / 3
        r = a[0] / a[1]
        return min(_angle(self.vertex, (delta * r, 1, 0), (r, 1, 0)) for delta in (Fraction(3, 4), Fraction(4, 5)))


def _angle(base: Weight, p, q) -> float:
    from .nabla import angle_between
    return angle_between(tangent(base, p), tangent(base, q))


# Shared directions ------------------------------------------------------

def _tight_rows(f: Automorphism, alpha: Weight) -> list[tuple[int, int, int]]:
    return fixed_region(f).tight_rows(alpha)


def _shared(rows, alpha, d: Direction) -> bool:
    return all(first_order(r, alpha.alpha, d) >= 0 for r in rows)


@dataclass
class LinkProfile:
    vertex: Weight
    f: Automorphism
    g: Automorphism
    rows: list[tuple[int, int, int]]
    shared: list[Direction]
    arcs: list[tuple[Direction, Direction]]
    link: VertexLink

    def contains(self, d: Direction) -> bool:
        return self.link.in_I(d) and _shared(self.rows, self.vertex, d)

    def names(self) -> list[str]:
        return [self.link.name(d) for d in self.shared]

    def is_whole(self) -> bool:
        return not self.rows

    def to_dict(self) -> dict:
        return {"vertex": str(self.vertex), "f": str(self.f), "g": str(self.g),
                "shared": self.names(),
                "arcs": [[self.link.name(a), self.link.name(b)] for a, b in self.arcs],
                "constraints": [list(r) for r in self.rows]}


def _require_stab(f: Automorphism, w: Weight) -> None:
    if not is_fixed(f, w):
        raise NotInStabilizer(f"{f} does not fix the valuation at {w}")


def link_profile(vertex, f, g, link: VertexLink | None = None) -> LinkProfile:
    """Directions of the chamber link shared by the chambers labelled f and g."""
    w = weight(vertex)
    f, g = auto(f), auto(g)
    _require_stab(f, w)
    _require_stab(g, w)
    link = link or VertexLink(w)
    h = f.inverse().compose(g)
    rows = _tight_rows(h, w)
    shared = [c for c in link.candidates if _shared(rows, w, c)]
    arcs = []
    cands = link.candidates
    n = len(cands)
    pairs = [(cands[i], cands[(i + 1) % n]) for i in range(n if link.interior else n - 1)]
    for a, b in pairs:
        mid = link.beyond(a, +1)
        if mid is not None and _shared(rows, w, a) and _shared(rows, w, b) and _shared(rows, w, mid):
            arcs.append((a, b))
    return LinkProfile(w, f, g, rows, shared, arcs, link)


# Cycles -----------------------------------------------------------------

@dataclass
class Segment:
    chamber: Automorphism
    start: Direction
    end: Direction
    step: int          # +1: increasing position, -1: decreasing
    full: bool
    length: float


@dataclass
class LinkCycle:
    vertex: Weight
    segments: list[Segment]
    total_length: float
    link: VertexLink = field(repr=False)

    def segment_lengths(self) -> list[float]:
        return [s.length for s in self.segments]

    def to_dict(self) -> dict:
        return {"schema": "tame3/1", "vertex": str(self.vertex),
                "segments": [{"chamber": str(s.chamber), "start": self.link.name(s.start),
                              "end": self.link.name(s.end), "arc": "ccw" if s.step * self.link.orient > 0 else "cw",
                              "length": s.length} for s in self.segments],
                "total_length": self.total_length}


def _arc_length(link: VertexLink, a: Direction, b: Direction, step: int, full: bool) -> float:
    if full:
        return TWO_PI
    pa, pb = link.pos(a), link.pos(b)
    if link.interior:
        d = (pb - pa) if step > 0 else (pa - pb)
        if a.same(b):
            return 0.0
        d = d % TWO_PI
        # Use the exact sweep to avoid float wraparound at q.
        return ccw_angle(a, b) if step > 0 else ccw_angle(b, a)
    return abs(pb - pa)


def build_cycle(vertex, chambers: Sequence, junctions: Sequence, arcs: Sequence[str] | None = None) -> LinkCycle:
    """Assemble a closed cycle: segment i runs in chamber i from junction i-1 to junction i.

    Junction i must be shared by chambers i and i+1 (cyclically).  ``arcs`` optionally
    fixes "ccw"/"cw" per segment at interior weights; the default avoids q.
    """
    w = weight(vertex)
    link = VertexLink(w)
    chambers = [auto(c) for c in chambers]
    n = len(chambers)
    if n == 0 or len(junctions) != n:
        raise ValueError("need one junction per chamber")
    dirs = [link.parse_direction(j) for j in junctions]
    for c in chambers:
        _require_stab(c, w)
    profiles = [link_profile(w, chambers[i], chambers[(i + 1) % n], link) for i in range(n)]
    for i, (d, prof) in enumerate(zip(dirs, profiles)):
        if not prof.contains(d):
            raise JunctionNotShared(i, f"{link.name(d)} not in shared set of chambers {i},{(i + 1) % n}")
    segments = []
    for i in range(n):
        a, b = dirs[i - 1], dirs[i]
        full = a.same(b) and n == 1
        if link.interior:
            if arcs is not None:
                step = (1 if arcs[i] == "ccw" else -1) * link.orient
            else:
                pa, pb = link.pos(a), link.pos(b)
                if b.same(link.q):
                    step = 1 if pa >= math.pi else -1
                elif a.same(link.q):
                    step = -1 if pb > math.pi else 1
                else:
                    step = 1 if pa < pb else -1
        else:
            step = 1 if link.pos(b) >= link.pos(a) else -1
        length = _arc_length(link, a, b, step, full)
        segments.append(Segment(chambers[i], a, b, step, full, length))
    # Non-backtracking: a fold at a junction must not run back into a shared germ.
    for i in range(n):
        s_in, s_out = segments[i], segments[(i + 1) % n]
        if n == 1 or s_in.length == 0 or s_out.length == 0:
            continue
        arrive_side = -s_in.step
        leave_side = s_out.step
        if arrive_side == leave_side:
            germ = link.beyond(dirs[i], leave_side)
            if germ is not None and profiles[i].contains(germ):
                raise Backtrack(i)
    total = sum(s.length for s in segments)
    return LinkCycle(w, segments, total, link)


def cycle_from_json(text: str | dict) -> LinkCycle:
    data = json.loads(text) if isinstance(text, str) else text
    return build_cycle(data["vertex"], data["chambers"], data["junctions"], data.get("arcs"))


# Classification ---------------------------------------------------------

@dataclass
class Classification:
    label: str
    pattern: str
    runs: int
    length: float
    epsilon: float
    exceeds_threshold: bool
    contradiction: str | None
    pass_through: int

    def to_dict(self) -> dict:
        return {"schema": "tame3/1", "label": self.label, "pattern": self.pattern, "runs": self.runs,
                "length": self.length, "epsilon": self.epsilon, "exceeds_threshold": self.exceeds_threshold,
                "contradiction": self.contradiction, "pass_through_at_s": self.pass_through}


@dataclass
class _Piece:
    sign: int          # +1 toward s, -1 toward q
    start: Direction
    end: Direction
    upper: bool        # for interior weights: lies in the half with positions in (0, pi)


def _pieces(c: LinkCycle) -> list[_Piece]:
    link = c.link
    out: list[_Piece] = []
    for seg in c.segments:
        if seg.length == 0:
            continue
        pa = link.pos(seg.start)
        if seg.full:
            pb = pa + seg.step * TWO_PI
        else:
            pb = pa + seg.step * seg.length
        # Breakpoints at s (pi) and q (0 mod 2pi) strictly inside the sweep.
        lo, hi = min(pa, pb), max(pa, pb)
        cuts = []
        k0 = math.floor(lo / math.pi) - 1
        for k in range(k0, k0 + 6):
            x = k * math.pi
            if lo + 1e-9 < x < hi - 1e-9:
                cuts.append(x)
        cuts.sort(reverse=seg.step < 0)
        pts = [pa] + cuts + [pb]
        dirs = [seg.start] + [link.s if round(x / math.pi) % 2 else link.q for x in cuts] + [seg.end]
        for (x, y), (d1, d2) in zip(zip(pts, pts[1:]), zip(dirs, dirs[1:])):
            mid = ((x + y) / 2) % TWO_PI
            upper = mid < math.pi
            increasing = y > x
            if link.interior:
                sign = 1 if increasing == upper else -1
            else:
                sign = 1 if increasing else -1
            out.append(_Piece(sign, d1, d2, upper))
    return out


def classify_cycle(c: LinkCycle, epsilon: float | None = None) -> Classification:
    link = c.link
    eps = link.default_epsilon() if epsilon is None else epsilon
    pieces = _pieces(c)
    # Rotate so that the list starts at an orientation change.
    n = len(pieces)
    start = next((i for i in range(n) if pieces[i].sign != pieces[i - 1].sign), None)
    contradiction = None
    if start is None:
        runs = []
        j = 0
    else:
        pieces = pieces[start:] + pieces[:start]
        runs = [[pieces[0]]]
        for p in pieces[1:]:
            if p.sign == runs[-1][-1].sign:
                runs[-1].append(p)
            else:
                runs.append([p])
        j = len(runs)
    sinks, sources = [], []
    for i, run in enumerate(runs):
        nxt = runs[(i + 1) % j]
        point = run[-1].end
        if run[-1].sign > 0:
            through = link.interior and run[-1].upper != nxt[0].upper
            sinks.append((point, through))
        else:
            sources.append(point)
    if any(not p.same(link.s) for p, _ in sinks):
        contradiction = "a path oriented toward s turns before reaching s"
    through = sum(1 for _, t in sinks if t)
    exceeds = c.total_length >= TWO_PI + eps
    if c.total_length < TWO_PI - LENGTH_TOL:
        contradiction = f"cycle shorter than 2pi ({c.total_length:.9f})"
    if j == 2:
        pattern = "single-apartment" if sources and sources[0].same(link.q) else "symmetric-difference"
    elif j == 4:
        if not link.interior or through > 0:
            pattern = "symmetric-difference"
        else:
            pattern = "interior-4"
    elif j == 6:
        if link.kind == "mm1":
            pattern = "triple-branch"
        elif link.kind == "m11":
            pattern = "six-branch"
            if not exceeds and contradiction is None:
                contradiction = "six-branch cycle below the threshold at a [m,1,1] vertex"
        elif through == 0:
            pattern = "interior-6"
        elif through == 2:
            pattern = "interior-6-crossing"
        else:
            pattern = "unclassified"
    else:
        pattern = "unclassified"
    label = "exceeds-threshold" if exceeds else pattern
    return Classification(label, pattern, j, c.total_length, eps, exceeds, contradiction, through)


# Finite link graphs -----------------------------------------------------

class LinkGraph:
    """The union of the chamber links of a finite set of chambers, glued along shared germs."""

    def __init__(self, vertex, chambers: Sequence):
        import networkx as nx

        self.vertex = weight(vertex)
        self.link = VertexLink(self.vertex)
        self.chambers = [auto(c) for c in chambers]
        for c in self.chambers:
            _require_stab(c, self.vertex)
        link = self.link
        cands = link.candidates
        nc = len(cands)
        arcs = [(k, (k + 1) % nc) for k in range(nc if link.interior else nc - 1)]
        self.arcs = arcs
        mids = [link.beyond(cands[a], +1) for a, _ in arcs]
        m = len(self.chambers)
        rows = [[_tight_rows(self.chambers[i].inverse().compose(self.chambers[j]), self.vertex) if i != j else []
                 for j in range(m)] for i in range(m)]
        parent_n = {(i, k): (i, k) for i in range(m) for k in range(nc)}
        parent_e = {(i, k): (i, k) for i in range(m) for k in range(len(arcs))}

        def find(par, x):
            while par[x] != x:
                par[x] = par[par[x]]
                x = par[x]
            return x

        for i in range(m):
            for j in range(i + 1, m):
                r = rows[i][j]
                ok_n = [_shared(r, self.vertex, d) for d in cands]
                for k in range(nc):
                    if ok_n[k]:
                        parent_n[find(parent_n, (i, k))] = find(parent_n, (j, k))
                for e, (a, b) in enumerate(arcs):
                    if ok_n[a] and ok_n[b] and _shared(r, self.vertex, mids[e]):
                        parent_e[find(parent_e, (i, e))] = find(parent_e, (j, e))
        g = nx.Graph()
        self.edge_rep: dict = {}
        for i in range(m):
            for e, (a, b) in enumerate(arcs):
                cls = find(parent_e, (i, e))
                if cls in self.edge_rep:
                    continue
                self.edge_rep[cls] = (i, e)
                na, nb = find(parent_n, (i, a)), find(parent_n, (i, b))
                length = ccw_angle(cands[a], cands[b]) if link.orient == 1 else ccw_angle(cands[b], cands[a])
                en = ("edge", cls)
                g.add_edge(("node", na), en, weight=length / 2)
                g.add_edge(en, ("node", nb), weight=length / 2)
        self.graph = g
        self._find_n = lambda x: find(parent_n, x)

    def shortest_cycle_through(self, edge_cls) -> LinkCycle | None:
        import networkx as nx

        g = self.graph
        en = ("edge", edge_cls)
        ends = list(g.neighbors(en))
        if len(ends) != 2:
            return None
        g2 = g.copy()
        g2.remove_node(en)
        try:
            path = nx.dijkstra_path(g2, ends[1], ends[0])
        except nx.NetworkXNoPath:
            return None
        return self._to_cycle([ends[0], en] + path)

    def _to_cycle(self, seq) -> LinkCycle:
        # seq alternates node, edge, node, ... and closes on its first node.
        cands = self.link.candidates
        chambers, junctions, arcs = [], [], []
        for k in range(1, len(seq), 2):
            i, e = self.edge_rep[seq[k][1]]
            a, b = self.arcs[e]
            nxt = seq[k + 1]
            forward = ("node", self._find_n((i, b))) == nxt
            chambers.append(self.chambers[i])
            junctions.append(cands[b if forward else a])
            arcs.append("ccw" if forward else "cw")
        return build_cycle(self.vertex, chambers, junctions, arcs if self.link.interior else None)

    def girth(self) -> float:
        best = math.inf
        for en in [n for n in self.graph if n[0] == "edge"]:
            c = self.shortest_cycle_through(en[1])
            if c is not None:
                best = min(best, c.total_length)
        return best


def random_link_cycles(count: int, seed: int = 0, pool: int = 5):
    """Yield (vertex, LinkCycle) pairs for random chamber pools at [m,m,1], [m,1,1], [m,p,1]."""
    from .valuation import random_stabilizer

    rng = random.Random(seed)
    made = 0
    attempts = 0
    while made < count:
        attempts += 1
        if attempts > 50 * count:
            raise RuntimeError("could not sample enough cycles")
        fam = rng.choice(["mm1", "m11", "mp1"])
        m = rng.randint(2, 8)
        if fam == "mm1":
            v = Weight(m, m, 1)
        elif fam == "m11":
            v = Weight(m, 1, 1)
        else:
            p = rng.randint(2, min(4, m - 1)) if m > 2 else None
            if p is None:
                continue
            v = Weight(m, p, 1)
        chambers = [Automorphism.identity()] + [random_stabilizer(v, rng) for _ in range(pool - 1)]
        lg = LinkGraph(v, chambers)
        edges = [n[1] for n in lg.graph if n[0] == "edge"]
        rng.shuffle(edges)
        for e in edges[:3]:
            c = lg.shortest_cycle_through(e)
            if c is not None:
                made += 1
                yield v, c
                break
