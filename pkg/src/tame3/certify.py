"""Exact certification of identities among triples of binary forms, and a finite invariant-set search.

Kernels are computed on coefficient matrices indexed by the exponent of x2.  A full modular rank
is already an exact certificate that the kernel over the rationals is trivial; otherwise the kernel
is computed by fraction-free elimination.
"""

from __future__ import annotations

import itertools
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .poly import Polynomial

PRIME = 2147483629  # largest prime below 2**31

if os.environ.get("TAME3_PURE") == "1":
    from ._kernels import rank_mod_p as _rank_impl
    BACKEND = "numpy"
else:
    try:
        from ._modrank import rank_mod_p as _rank_impl
        BACKEND = "cython"
    except ImportError:
        from ._kernels import rank_mod_p as _rank_impl
        BACKEND = "numpy"


class DependentForms(ValueError):
    pass


class BadConstants(ValueError):
    pass


class InconsistentDegrees(ValueError):
    pass


class HypothesisFails(ValueError):
    def __init__(self, witness):
        super().__init__(f"Z and u(Z) are disjoint for u = {witness}")
        self.witness = witness


# Linear algebra ---------------------------------------------------------

def rank_mod_p(rows: list[list[int]], p: int = PRIME) -> int:
    if not rows or not rows[0]:
        return 0
    a = np.array([[x % p for x in r] for r in rows], dtype=np.int64)
    return int(_rank_impl(np.ascontiguousarray(a), p))


def exact_kernel(rows: list[list[int]], ncols: int) -> list[list[Fraction]]:
    """Kernel basis by fraction-free (Bareiss) elimination followed by back substitution."""
    a = [list(r) for r in rows]
    nrows = len(a)
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i in range(len(pivots) - 1, -1, -1):
            c = pivots[i]
            s = sum((a[i][j] * v[j] for j in range(c + 1, ncols)), Fraction(0))
            v[c] = -s / a[i][c]
        basis.append(v)
    return basis


def kernel(ints: list[list[int]], ncols: int) -> list[list[Fraction]]:
    if ncols == 0:
        return []
    if rank_mod_p(ints) == ncols:
        return []
    return exact_kernel(ints, ncols)


def _primitive(v: Sequence[Fraction]) -> list[Fraction]:
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints) or 1
    lead = next(x for x in ints if x)
    sign = 1 if lead > 0 else -1
    return [Fraction(sign * x, g) for x in ints]


# Matrices of the triple maps ---------------------------------------------

@lru_cache(maxsize=4096)
def _binomial_form(a: int, b: int, n: int) -> tuple[tuple[int, int], ...]:
    """(a*x2 + b*x3^p)^n as pairs (exponent of x2, integer coefficient)."""
    return tuple((k, math.comb(n, k) * a ** k * b ** (n - k)) for k in range(n + 1) if a ** k * b ** (n - k))


def _integral(a: Fraction, b: Fraction) -> tuple[int, int, int]:
    """Integer multiple (A, B) = D*(a, b) with D > 0."""
    den = math.lcm(a.denominator, b.denominator)
    return int(a * den), int(b * den), den


def _matrix(blocks, nrows: int) -> list[list[int]]:
    ncols = sum(n for _, n in blocks)
    rows = [[0] * ncols for _ in range(nrows)]
    col = 0
    for mult, nsrc in blocks:
        for i in range(nsrc):
            for k, c in mult:
                rows[i + k][col] += c
            col += 1
    return rows


@dataclass
class Triple:
    R: Polynomial
    T: Polynomial
    U: Polynomial

    def as_tuple(self) -> tuple[Polynomial, Polynomial, Polynomial]:
        return self.R, self.T, self.U

    def all_nonzero(self) -> bool:
        return bool(self.R) and bool(self.T) and bool(self.U)

    def __str__(self) -> str:
        return f"({self.R}, {self.T}, {self.U})"


def _to_triples(basis, sizes: list[int], monomial, scales=(1, 1, 1)) -> list[Triple]:
    # Block k of the matrix was multiplied by scales[k]; undo that on the solution.
    out = []
    for v in basis:
        pos, w = 0, []
        for n, sc in zip(sizes, scales):
            w += [x * sc for x in v[pos:pos + n]]
            pos += n
        v = _primitive(w)
        parts, pos = [], 0
        for k, n in enumerate(sizes):
            terms = {monomial(k, i): v[pos + i] for i in range(n)}
            parts.append(Polynomial(terms))
            pos += n
        out.append(Triple(*parts))
    return out


def _check_forms(forms) -> list[tuple[Fraction, Fraction]]:
    fs = [(Fraction(a), Fraction(b)) for a, b in forms]
    if len(fs) != 3:
        raise DependentForms("need three linear forms")
    for (a1, b1), (a2, b2) in itertools.combinations(fs, 2):
        if a1 * b2 - a2 * b1 == 0:
            raise DependentForms(f"forms {a1}*x2+{b1}*x3 and {a2}*x2+{b2}*x3 are dependent")
    return fs


STANDARD_FORMS = ((1, 0), (1, 1), (0, 1))


def kernel_plain(d: int, r: int, t: int, u: int, forms=STANDARD_FORMS) -> list[Triple]:
    """Kernel of (R,T,U) -> l1^r R + l2^t T + l3^u U on binary forms of degrees d-r, d-t, d-u.

    A form is a pair (a, b) meaning a*x2 + b*x3.
    """
    fs = _check_forms(forms)
    if min(r, t, u) < 0 or max(r, t, u) > d:
        raise InconsistentDegrees("need 0 <= r, t, u <= d")
    exps = (r, t, u)
    blocks, scales = [], []
    for (a, b), e in zip(fs, exps):
        # Row index is the x2-exponent in degree d; x2^i x3^(d-e-i) times l^e.
        A, B, den = _integral(a, b)
        blocks.append((_binomial_form(A, B, e), d - e + 1))
        scales.append(den ** e)
    sizes = [d - e + 1 for e in exps]
    basis = kernel(_matrix(blocks, d + 1), sum(sizes))
    return _to_triples(basis, sizes, lambda k, i: (0, i, d - exps[k] - i), scales)


def kernel_weighted(variant: str, p: int, m: int, r: int, t: int, u: int, c, c2=None) -> list[Triple]:
    """Kernel of the weighted triple map, with x2 of weight p and x3 of weight 1.

    weighted:     x2^r R + (x2 + c x3^p)^t T + (x2 + c2 x3^p)^u U
    weightedplus: x2^r R + (x2 + c x3^p)^t T + x3^u U
    """
    c = Fraction(c)
    if c == 0:
        raise BadConstants("c must be nonzero")
    if variant == "weighted":
        if c2 is None or Fraction(c2) == 0 or Fraction(c2) == c:
            raise BadConstants("weighted needs distinct nonzero c, c'")
        c2 = Fraction(c2)
        degs = (m - r * p, m - t * p, m - u * p)
    elif variant == "weightedplus":
        degs = (m - r * p, m - t * p, m - u)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if min(degs) < 0 or p < 1:
        raise InconsistentDegrees(f"negative degree in {degs}")
    nrows = m // p + 1
    # A weighted-homogeneous basis of degree D is x2^i x3^(D - p i), i = 0..D//p.
    sizes = [D // p + 1 for D in degs]
    A, C, D = _integral(Fraction(1), c)
    mults, scales = [((r, 1),), _binomial_form(A, C, t)], [1, D ** t]
    if variant == "weighted":
        A2, C2, D2 = _integral(Fraction(1), c2)
        mults.append(_binomial_form(A2, C2, u))
        scales.append(D2 ** u)
    else:
        # x3^u leaves the x2-exponent unchanged.
        mults.append(((0, 1),))
        scales.append(1)
    basis = kernel(_matrix(list(zip(mults, sizes)), nrows), sum(sizes))
    return _to_triples(basis, sizes, lambda k, i: (0, i, degs[k] - p * i), scales)


# Sweeps -----------------------------------------------------------------

@dataclass
class Report:
    kind: str
    instances: int = 0
    violations: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    wall_time: float = 0.0
    backend: str = BACKEND

    def to_dict(self) -> dict:
        return {"schema": "tame3/1", "kind": self.kind, "instances": self.instances, "violations": self.violations,
                "witnesses": self.witnesses, "wall_time": self.wall_time, "backend": self.backend}


def plain_bound(d: int) -> int:
    return (2 * d + 1) // 3


def random_forms(count: int, seed: int = 0) -> list[tuple[tuple[int, int], ...]]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        fs = tuple((rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(3))
        try:
            _check_forms(fs)
        except DependentForms:
            continue
        out.append(fs)
    return out


def _nonzero_relation(ker: list[Triple]) -> Triple | None:
    """A kernel element with all three components nonzero, if one exists."""
    for k in ker:
        if k.all_nonzero():
            return k
    if len(ker) < 2:
        return None
    # Each component is nonzero on a proper subspace's complement; weights 1, 2, 4, ... avoid
    # the finitely many bad combinations after at most a few attempts.
    for shift in range(8):
        ws = [Fraction(2) ** ((i * (shift + 1)) % 31) for i in range(len(ker))]
        comb = [sum((w * getattr(k, f) for w, k in zip(ws, ker)), Polynomial({})) for f in "RTU"]
        t = Triple(*comb)
        if t.all_nonzero():
            return t
    return None


def _plain_cell(args) -> tuple[int, list, list]:
    d, forms_list = args
    b = plain_bound(d)
    count, viol = 0, []
    rng = range(b + 1, d + 1)
    for r, t, u in itertools.product(rng, rng, rng):
        for fs in forms_list:
            count += 1
            ker = kernel_plain(d, r, t, u, fs)
            if ker:
                viol.append({"d": d, "r": r, "t": t, "u": u, "forms": [list(map(str, f)) for f in fs],
                             "kernel": [str(k) for k in ker]})
    witness = []
    edge = [(r, t, u) for r, t, u in itertools.product(range(b, d + 1), repeat=3) if min(r, t, u) == b]
    for r, t, u in edge:
        nz = _nonzero_relation(kernel_plain(d, r, t, u, forms_list[0]))
        if nz is not None:
            witness.append({"d": d, "r": r, "t": t, "u": u, "relation": str(nz)})
            break
    return count, viol, witness


def _jobs(jobs: int | None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("TAME3_JOBS", "1"))
    return max(1, jobs)


def _run(fn, cells, jobs: int, cost=None):
    if jobs == 1:
        return [fn(c) for c in cells]
    # Largest cells first so that no worker is left with a long tail; results keep cell order.
    order = sorted(range(len(cells)), key=lambda i: -cost(cells[i])) if cost else list(range(len(cells)))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        done = list(ex.map(fn, [cells[i] for i in order]))
    out = [None] * len(cells)
    for i, r in zip(order, done):
        out[i] = r
    return out


def sweep_plain(dmax: int, forms: Iterable | None = None, jobs: int | None = None) -> Report:
    """For every d <= dmax and r, t, u above the bound, every form triple must give a trivial kernel."""
    if dmax < 1:
        raise ValueError("dmax must be >= 1")
    forms_list = [tuple(tuple(f) for f in fs) for fs in (forms or [STANDARD_FORMS])]
    for fs in forms_list:
        _check_forms(fs)
    t0 = time.perf_counter()
    results = _run(_plain_cell, [(d, forms_list) for d in range(dmax + 1)], _jobs(jobs), cost=lambda c: c[0])
    rep = Report("plain")
    for count, viol, wit in results:
        rep.instances += count
        rep.violations += viol
        rep.witnesses += wit
    rep.wall_time = time.perf_counter() - t0
    return rep


WEIGHTED_CONSTANTS = ((1, 2), (1, -1), (2, -3))
PLUS_CONSTANTS = (1, -1, 2)


def _weighted_cell(args) -> tuple[int, list]:
    p, m = args
    count, viol = 0, []
    top = m // p
    for r, t, u in itertools.product(range(top + 1), repeat=3):
        if 4 * min(r, t, u) * p > 3 * m:
            for c, c2 in WEIGHTED_CONSTANTS:
                count += 1
                ker = kernel_weighted("weighted", p, m, r, t, u, c, c2)
                if ker:
                    viol.append({"variant": "weighted", "p": p, "m": m, "r": r, "t": t, "u": u, "c": c, "c'": c2})
    for r, t in itertools.product(range(top + 1), repeat=2):
        for u in range(m + 1):
            if 5 * min(r * p, t * p, u) >= 4 * m:
                for c in PLUS_CONSTANTS:
                    count += 1
                    ker = kernel_weighted("weightedplus", p, m, r, t, u, c)
                    if ker:
                        viol.append({"variant": "weightedplus", "p": p, "m": m, "r": r, "t": t, "u": u, "c": c})
    return count, viol


def sweep_weighted(pmax: int, mmax: int, jobs: int | None = None) -> Report:
    """All (p, m) with m // p >= 2: instances above the 3/4 (resp. 4/5) bound must have trivial kernel."""
    t0 = time.perf_counter()
    cells = [(p, m) for p in range(1, pmax + 1) for m in range(2 * p, mmax + 1)]
    results = _run(_weighted_cell, cells, _jobs(jobs), cost=lambda c: (c[1] // c[0]) ** 3)
    rep = Report("weighted")
    for count, viol in results:
        rep.instances += count
        rep.violations += viol
    rep.wall_time = time.perf_counter() - t0
    return rep


def _proportional(a: Triple, b: Triple) -> bool:
    va = [a.R, a.T, a.U]
    vb = [b.R, b.T, b.U]
    k = next(i for i in range(3) if vb[i])
    ma, mb = next(iter(va[k].terms)), next(iter(vb[k].terms))
    if ma != mb:
        return False
    ratio = va[k].terms[ma] / vb[k].terms[mb]
    return all(x == y.scale(ratio) for x, y in zip(va, vb))


def critical_kernels(ps=range(2, 6), samples: int = 3, seed: int = 0) -> list[dict]:
    """At m = p + 1 both weighted maps have a one-dimensional kernel with an explicit generator."""
    from .poly import X3

    rng = random.Random(seed)
    out = []
    for p in ps:
        for _ in range(samples):
            c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 4))
            c2 = c
            while c2 == c:
                c2 = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 4))
            k = kernel_weighted("weighted", p, p + 1, 1, 1, 1, c, c2)
            want = Triple(X3.scale(c - c2), X3.scale(c2), X3.scale(-c))
            kp = kernel_weighted("weightedplus", p, p + 1, 1, 1, p + 1, c)
            want_p = Triple(X3.scale(-1), X3, Polynomial({(0, 0, 0): -c}))
            out.append({"p": p, "c": str(c), "c'": str(c2),
                        "weighted": len(k) == 1 and _proportional(k[0], want),
                        "weightedplus": len(kp) == 1 and _proportional(kp[0], want_p)})
    return out


def spade(alpha_max: int) -> tuple[Fraction, int]:
    if alpha_max < 2:
        raise ValueError("alpha_max must be >= 2")
    best, arg = Fraction(-1), 0
    for a in range(2, alpha_max + 1):
        v = Fraction((2 * a + 1) // 3, a)
        if v > best:
            best, arg = v, a
    return best, arg


def derivative_identity_check(Q: Polynomial, c, c2, q: int) -> bool:
    """Both partials of (c x2 + c2 x3)^q Q are nonzero, homogeneous of degree deg Q + q - 1,
    and divisible by (c x2 + c2 x3)^(q-1)."""
    from .poly import X2, X3

    c, c2 = Fraction(c), Fraction(c2)
    if not Q or not Q.is_homogeneous() or Q.variables() - {2, 3} or not c or not c2 or q < 1:
        raise ValueError("bad input")
    L = X2.scale(c) + X3.scale(c2)
    F = L ** q * Q
    target = Q.degree() + q - 1
    for i in (2, 3):
        D = F.derivative(i)
        if not D or not D.is_homogeneous() or D.degree() != target:
            return False
        if not _divisible_by_power(D, c, c2, q - 1):
            return False
    return True


def _divisible_by_power(P: Polynomial, c: Fraction, c2: Fraction, k: int) -> bool:
    # Dehomogenise at x3 = 1 and divide by (c x + c2)^k; c != 0 keeps the degree bookkeeping exact.
    deg = P.degree()
    coeffs = [P.coeff((0, i, deg - i)) for i in range(deg + 1)]  # coeffs[i] multiplies x^i
    for _ in range(k):
        # Synthetic division by (c x + c2): root x0 = -c2/c.
        x0 = -c2 / c
        n = len(coeffs) - 1
        if n < 1:
            return False
        quot = [Fraction(0)] * n
        acc = Fraction(0)
        for i in range(n, -1, -1):
            acc = acc * x0 + coeffs[i]
            if i > 0:
                quot[i - 1] = acc
        if acc != 0:
            return False
        coeffs = quot
    return True


# Finite invariant sets ----------------------------------------------------

@dataclass
class FiniteActionInstance:
    points: list[str]
    generators: list[tuple[int, ...]]   # permutations of range(len(points))
    Z: frozenset[str]
    theta: int = 2

    def index(self, name: str) -> int:
        return self.points.index(name)

    def group(self) -> list[tuple[int, ...]]:
        n = len(self.points)
        ident = tuple(range(n))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = tuple(s[g[i]] for i in range(n))
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        return sorted(seen)

    def apply(self, g: tuple[int, ...], subset) -> frozenset[str]:
        return frozenset(self.points[g[self.index(x)]] for x in subset)


def translates(inst: FiniteActionInstance, subset) -> set[frozenset[str]]:
    """The orbit of ``subset``, found by closing under the generators."""
    start = frozenset(subset)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for s in frontier:
            for g in inst.generators:
                t = inst.apply(g, s)
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return seen


def invariant_set(inst: FiniteActionInstance) -> frozenset[str]:
    """A nonempty G-invariant subset of the union of the translates of Z.

    Follows the induction with "infinitely many distinct translates" read as "more than theta".
    """
    Z = frozenset(inst.Z)
    for T in translates(inst, Z):
        if not (Z & T):
            raise HypothesisFails(f"{sorted(Z)} misses its translate {sorted(T)}")
    while True:
        orbit = translates(inst, Z)
        if len(Z) == 1:
            return Z
        chosen = None
        for size in range(len(Z) - 1, 0, -1):
            for sub in sorted(itertools.combinations(sorted(Z), size)):
                s = frozenset(sub)
                if sum(1 for T in orbit if s <= T) > inst.theta:
                    chosen = s
                    break
            if chosen is not None:
                break
        if chosen is None:
            return frozenset().union(*orbit)
        if any(not (chosen & T) for T in translates(inst, chosen)):
            # The surrogate claim fails for this instance; the union is still finite and invariant.
            return frozenset().union(*orbit)
        Z = chosen


def is_invariant(inst: FiniteActionInstance, s) -> bool:
    s = frozenset(s)
    return all(inst.apply(g, s) == s for g in inst.generators)


def y_model(k: int = 3, theta: int = 2, apex: tuple[str, int] = ("ζ", 0)) -> FiniteActionInstance:
    """A central triangle ξηζ with k further triangles on each edge; G = (S_k)^3 ⋊ S_3.

    Apex (v, i) spans the edge opposite v.  Z is the vertex set of the triangle with the given apex.
    """
    core = ["ξ", "η", "ζ"]
    points = core + [f"T{v}{i + 1}" for v in core for i in range(k)]
    idx = {p: n for n, p in enumerate(points)}

    def perm_from(core_perm: dict[str, str], apex_perm) -> tuple[int, ...]:
        img = [0] * len(points)
        for v in core:
            img[idx[v]] = idx[core_perm[v]]
            for i in range(k):
                img[idx[f"T{v}{i + 1}"]] = idx[f"T{core_perm[v]}{apex_perm(v, i) + 1}"]
        return tuple(img)

    ident = {v: v for v in core}
    gens = [perm_from({"ξ": "η", "η": "ξ", "ζ": "ζ"}, lambda v, i: i),
            perm_from({"ξ": "η", "η": "ζ", "ζ": "ξ"}, lambda v, i: i)]
    for v in core:
        if k > 1:
            gens.append(perm_from(ident, lambda w, i, v=v: (i + 1) % k if w == v else i))
            gens.append(perm_from(ident, lambda w, i, v=v: {0: 1, 1: 0}.get(i, i) if w == v else i))
    a, i = apex
    edge = [x for x in core if x != a]
    Z = frozenset(edge + [f"T{a}{i + 1}"])
    return FiniteActionInstance(points, gens, Z, theta)


def random_instance(rng: random.Random) -> FiniteActionInstance:
    """A Y-model with random size, threshold and apex, its points relabelled at random."""
    k = rng.randint(2, 5)
    inst = y_model(k, theta=rng.randint(1, k - 1), apex=(rng.choice(["ξ", "η", "ζ"]), rng.randrange(k)))
    order = list(range(len(inst.points)))
    rng.shuffle(order)
    inst.points = [inst.points[i] for i in order]
    pos = {old: new for new, old in enumerate(order)}
    inst.generators = [tuple(pos[g[order[n]]] for n in range(len(order))) for g in inst.generators]
    return inst
