"""Normal forms in the amalgams C = K *_{K∩H} H and B' = B *_{B∩H} H, invariant strips and isometry types."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .poly import X1, X2, X3
from .tame import Automorphism, TameWord, auto, compose_all, in_B, in_H, in_K
from .valuation import Weight, is_fixed

SQRT2 = math.sqrt(2)

GROUPS = {"C": ("K", "H"), "B'": ("B", "H")}
_GROUP_ALIASES = {"C": "C", "B'": "B'", "B′": "B'", "Bp": "B'"}
_TESTS = {"K": in_K, "H": in_H, "B": in_B}


class LetterNotInFactors(ValueError):
    def __init__(self, index: int, letter):
        super().__init__(f"letter {index} ({letter}) lies in neither factor")
        self.index = index


class NotCyclicallyReduced(ValueError):
    pass


class DegenerateStrip(ValueError):
    pass


def _group(g: str) -> str:
    try:
        return _GROUP_ALIASES[g]
    except KeyError:
        raise ValueError(f"unknown amalgam {g!r}; expected C or B'") from None


def factor_of(group: str, f: Automorphism) -> str | None:
    """'common', one of the two factor names, or None."""
    a, b = GROUPS[_group(group)]
    in_a, in_b = _TESTS[a](f), _TESTS[b](f)
    if in_a and in_b:
        return "common"
    if in_a:
        return a
    if in_b:
        return b
    return None


@dataclass
class NormalForm:
    group: str
    letters: list[Automorphism]
    tags: list[str]
    realized: Automorphism

    def __len__(self) -> int:
        return len(self.letters)

    def word(self) -> TameWord:
        return TameWord(self.letters)

    def to_dict(self) -> dict:
        return {"group": self.group, "letters": [{"auto": str(a), "factor": t} for a, t in zip(self.letters, self.tags)],
                "realized": str(self.realized)}


_SWAPS = {"C": "(x2, x1, x3)", "B'": "(x1, x3, x2)"}


def split_letter(group: str, f: Automorphism) -> list[Automorphism]:
    """Write a letter lying in neither factor as k∘h or h∘k with k linear, when that is possible."""
    if factor_of(group, f) is not None:
        return [f]
    cands = [auto(_SWAPS[_group(group)])]
    try:
        cands.insert(0, Automorphism.linear(f.linear_coefficients()))
    except ValueError:
        pass  # singular linear part
    for k in cands:
        kinv = k.inverse()
        left, right = kinv.compose(f), f.compose(kinv)
        if factor_of(group, k) and factor_of(group, left):
            return [k, left]
        if factor_of(group, k) and factor_of(group, right):
            return [right, k]
    return [f]


def _letters(group: str, w) -> list[Automorphism]:
    if isinstance(w, TameWord):
        raw = list(w.letters)
    elif isinstance(w, (Automorphism, str)):
        raw = [auto(w)]
    else:
        raw = [auto(x) for x in w]
    return [piece for f in raw for piece in split_letter(group, f)]


def _rewrite(group: str, letters: list[Automorphism]) -> tuple[list[Automorphism], list[str]]:
    letters = list(letters)
    tags = [factor_of(group, a) for a in letters]
    for i, t in enumerate(tags):
        if t is None:
            raise LetterNotInFactors(i, letters[i])

    def merge(i: int) -> None:
        merged = letters[i].compose(letters[i + 1])
        letters[i:i + 2] = [merged]
        tags[i:i + 2] = [factor_of(group, merged)]

    # Each rewrite shortens the word by one letter.
    while len(letters) > 1:
        same = next((i for i in range(len(letters) - 1)
                     if tags[i] == tags[i + 1] and tags[i] != "common"), None)
        if same is not None:
            merge(same)
            continue
        idx = next((i for i, t in enumerate(tags) if t == "common"), None)
        if idx is None:
            break
        merge(max(idx - 1, 0))
    return letters, tags


def normal_form(group: str, w) -> NormalForm:
    """Alternating form: merge adjacent same-factor letters, absorb common-subgroup letters."""
    group = _group(group)
    letters = _letters(group, w)
    if not letters:
        letters = [Automorphism.identity()]
    realized = compose_all(letters)
    out, tags = _rewrite(group, letters)
    nf = NormalForm(group, out, tags, compose_all(out))
    assert nf.realized == realized
    return nf


def cyclic_reduce(nf: NormalForm) -> tuple[NormalForm, TameWord]:
    """Conjugate until the first and last letters lie in different factors.

    Returns (reduced, conjugator c) with reduced.realized == c^-1 o nf.realized o c.
    """
    letters, tags = list(nf.letters), list(nf.tags)
    conj: list[Automorphism] = []
    while len(letters) >= 2 and tags[0] == tags[-1]:
        a = letters[0]
        conj.append(a)
        letters, tags = _rewrite(nf.group, letters[1:] + [a])
    reduced = NormalForm(nf.group, letters, tags, compose_all(letters))
    c = compose_all(conj) if conj else Automorphism.identity()
    assert c.compose(reduced.realized) == nf.realized.compose(c)
    return reduced, TameWord(conj)


# Strip data -------------------------------------------------------------

@dataclass
class BoundaryItem:
    kind: str              # "principal-ray", "antiprincipal-ray" or "curve-on-line"
    a: int                 # ray parameter, or m2 for a curve
    m3: int = 0
    offset: float = 0.0

    def describe(self) -> str:
        if self.kind == "curve-on-line":
            return f"line ({self.a},{self.m3}) at offset log({self.a})/sqrt(2)"
        return f"{self.a}-{self.kind} at offset log({self.a})/sqrt(2)"

    def curve_offset(self, x: float) -> float:
        """Offset of the boundary at log(a2/a3) = x for C, or log(a1/a2) = x for B'."""
        if self.kind == "curve-on-line" and self.m3:
            return math.log(self.a + self.m3 * math.exp(-x)) / SQRT2
        return self.offset


@dataclass
class InvariantStrip:
    group: str
    boundary: list[BoundaryItem]
    gaps: list[float]
    flags: list[str] = field(default_factory=list)

    def period_length(self) -> float:
        return sum(self.gaps)

    def to_dict(self) -> dict:
        return {"group": self.group,
                "boundary": [{"kind": b.kind, "a": b.a, "m3": b.m3, "offset": b.offset} for b in self.boundary],
                "gaps": self.gaps, "flags": self.flags}


def dominant_monomial(h: Automorphism) -> tuple[int, int]:
    """For an H letter (a*x1 + P1(x2,x3), ...): the monomial of P1 with max m2, ties by max m3."""
    p1 = h.components[0] - X1.scale(h.components[0].coeff((1, 0, 0)))
    monos = [m for m in p1.monomials() if m[1] >= 1]
    if not monos:
        raise ValueError(f"{h} has no x2-monomial in P1")
    m = max(monos, key=lambda m: (m[1], m[2]))
    return m[1], m[2]


def _p2_degree(h: Automorphism) -> int:
    p2 = h.components[1] - X2.scale(h.components[1].coeff((0, 1, 0)))
    return max(p2.degree(), 0)


def _boundary(nf: NormalForm) -> list[BoundaryItem]:
    out = []
    for a, t in zip(nf.letters, nf.tags):
        if nf.group == "C":
            if t == "K":
                out.append(BoundaryItem("principal-ray", 1))
            else:
                m2, m3 = dominant_monomial(a)
                out.append(BoundaryItem("curve-on-line", m2, m3, math.log(m2) / SQRT2))
        else:
            if t == "B":
                out.append(BoundaryItem("antiprincipal-ray", 1))
            else:
                d = _p2_degree(a)
                out.append(BoundaryItem("antiprincipal-ray", d, 0, math.log(d) / SQRT2))
    return out


def strip_data(group: str, w) -> InvariantStrip:
    nf = normal_form(group, w)
    if len(nf) < 2 or nf.tags[0] == nf.tags[-1]:
        raise NotCyclicallyReduced("strip data needs a cyclically reduced form of length >= 2")
    items = _boundary(nf)
    n = len(items)
    gaps = [abs(items[(i + 1) % n].offset - items[i].offset) for i in range(n)]
    flags = []
    for a, it in zip(nf.letters, items):
        if it.kind == "curve-on-line":
            p1 = a.components[0]
            others = [m for m in p1.monomials() if m[1] == it.a and m[2] != it.m3]
            if others:
                flags.append(f"second constraint with m2={it.a} binds near the strip for {a}")
    return InvariantStrip(nf.group, items, gaps, flags)


# Classification ---------------------------------------------------------

@dataclass
class IsometryClass:
    kind: str
    length_terms: list[int]   # the integers a with a summand sqrt(2)*log(a)
    length: float
    strip: InvariantStrip | None
    reduced: NormalForm
    limit_data: dict = field(default_factory=dict)

    def length_expr(self) -> str:
        terms = [f"log({a})" for a in self.length_terms if a > 1]
        if not terms:
            return "0"
        return "sqrt(2)*(" + " + ".join(terms) + ")" if len(terms) > 1 else f"sqrt(2)*{terms[0]}"

    def to_dict(self) -> dict:
        return {"schema": "tame3/1", "kind": self.kind, "length": self.length_expr(), "length_float": self.length,
                "strip": self.strip.to_dict() if self.strip else None, "limit_data": self.limit_data,
                "reduced": self.reduced.to_dict()}


def classify_isometry(group: str, w) -> IsometryClass:
    group = _group(group)
    nf = normal_form(group, w)
    reduced, _ = cyclic_reduce(nf)
    if len(reduced) <= 1:
        return IsometryClass("elliptic", [], 0.0, None, reduced)
    strip = strip_data(group, reduced.word())
    terms = [b.a for b in strip.boundary if b.a > 1 or b.kind == "curve-on-line"]
    length = sum(SQRT2 * math.log(a) for a in terms)
    if group == "B'":
        kind = "loxodromic-not-rank-1"
        limit = {"fixed_point": "antiprincipal point of E+_id"}
    else:
        parabolic = any(b.kind == "curve-on-line" and b.m3 > 0 for b in strip.boundary)
        kind = "parabolic" if parabolic else "loxodromic-not-rank-1"
        limit = {"fixed_point": "principal point of E+_id"}
    return IsometryClass(kind, terms, length, strip, reduced, limit)


def fixed_point_weight(f: Automorphism) -> Weight | None:
    """A dominant weight whose valuation in E+_id is fixed by a factor element, if one is found."""
    f = auto(f)
    cands = []
    degs = [max(c.degree(), 1) for c in f.components]
    d = max(degs)
    for a3 in (1,):
        for a2 in range(1, d + 2):
            for a1 in (a2, a2 * d + d, (a2 + 1) * d * d):
                cands.append((a1, a2, a3))
    for c in cands:
        w = Weight(*c)
        if w.is_dominant() and is_fixed(f, w):
            return w
    return None


def random_letter(group: str, factor: str, rng: random.Random) -> Automorphism:
    """A letter of the given factor outside the common subgroup."""
    group = _group(group)
    c = [rng.choice([1, -1, 2, -2, 3]) for _ in range(3)]
    if factor in ("K", "B"):
        return auto(_SWAPS[group]).compose(Automorphism(X1.scale(c[0]), X2.scale(c[1]), X3.scale(c[2])))
    a = rng.randint(2, 4)
    if group == "C":
        # top x2-degree carried by a pure power, so the dominant monomial has m3 = 0
        p = (X2 ** a).scale(c[0])
        for j in range(1, a):
            if rng.random() < 0.5:
                p = p + (X2 ** j * X3 ** rng.randint(0, 2)).scale(rng.choice([1, -1]))
        return Automorphism(X1 + p, X2, X3)
    q = (X3 ** a).scale(c[0])
    for j in range(a):
        if rng.random() < 0.5:
            q = q + (X3 ** j).scale(rng.choice([1, -1]))
    return Automorphism(X1 + (X2 * X3).scale(c[1]), X2 + q, X3)


def random_word(group: str, rng: random.Random, max_pairs: int = 3) -> TameWord:
    """A cyclically reduced alternating word of even length at most 2*max_pairs."""
    group = _group(group)
    fa, fb = GROUPS[group]
    letters = []
    for _ in range(rng.randint(1, max_pairs)):
        letters += [random_letter(group, fa, rng), random_letter(group, fb, rng)]
    return TameWord(letters)


# Unfolding oracle -------------------------------------------------------

def unfold_length_oracle(strip: InvariantStrip, periods: int, base: float = 14.0, height: float = 20.0,
                         samples: int = 400) -> float:
    """Displacement of a boundary point under the n-th power, divided by n, on the glued half-strips.

    Consecutive half-strips sharing an offset-0 ray unfold flat by reflection across it; the half-strips
    on either side of a letter with a curve (or a ray at positive offset) share the region beyond that
    boundary.  A path therefore crosses each such shared region at some point (o_k, u_k) with
    o_k >= boundary(u_k); we minimise the total Euclidean length over those crossing points.
    Curve boundaries enter as polylines sampled in the chart.  The basepoint sits on an offset-0 ray
    at log(a2/a3) = ``base``; curves approach their asymptotes exponentially, so a high basepoint
    avoids the slow climb that a low one would amortise over the periods.
    """
    import numpy as np
    from scipy.optimize import minimize

    if periods < 1:
        raise ValueError("periods must be >= 1")
    items = strip.boundary
    if not items:
        raise DegenerateStrip("empty boundary")
    crossing = [b for b in items if b.offset > 0 or b.kind == "curve-on-line"]
    if not crossing:
        return 0.0
    # Chart coordinates: o is the offset from the wall, u the coordinate along it.
    # Along a curve alpha1 = m2*alpha2 + m3*alpha3, with x = log(alpha2/alpha3):
    #   o = log(m2 + m3 e^-x)/sqrt(2),  u = (2x + log(m2 + m3 e^-x))/sqrt(6).
    u0 = 2 * base / math.sqrt(6)
    polylines = []
    for b in crossing:
        xs = np.linspace(base - 2.0, base + height, samples)
        if b.kind == "curve-on-line" and b.m3:
            lg = np.log(b.a + b.m3 * np.exp(-xs))
        else:
            lg = np.full_like(xs, math.log(b.a))
        polylines.append(((2 * xs + lg) / math.sqrt(6), lg / SQRT2))
    cap = [float(np.interp(u0, us, os_)) for us, os_ in polylines]
    k = len(crossing) * periods
    idx = [i % len(crossing) for i in range(k)]

    def total(z):
        o, u = z[:k], z[k:]
        d = math.hypot(o[0], u[0] - u0)
        for j in range(k - 1):
            d += math.hypot(o[j] + o[j + 1], u[j + 1] - u[j])
        d += math.hypot(o[-1], u0 - u[-1])
        return d

    def cons(z):
        o, u = z[:k], z[k:]
        return np.array([o[j] - np.interp(u[j], *polylines[idx[j]]) for j in range(k)])

    best = math.inf
    for start in (u0, u0 + 1.0, u0 + height / 4):
        z0 = np.concatenate([np.array([cap[i] + 0.05 for i in idx]), np.full(k, start)])
        bounds = [(0.0, cap[i] + 1.0) for i in idx] + [(u0 - 1.0, u0 + height)] * k
        res = minimize(total, z0, method="SLSQP", bounds=bounds,
                       constraints=[{"type": "ineq", "fun": cons}], options={"maxiter": 500, "ftol": 1e-12})
        if res.success or res.status in (8, 9):
            z = res.x
            if np.all(cons(z) >= -1e-7):
                best = min(best, total(z))
    if not math.isfinite(best):
        raise DegenerateStrip("the unfolding optimisation did not converge")
    return best / periods
