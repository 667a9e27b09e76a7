"""Monomial valuations, the action of automorphisms on them, fixed regions and stabilizers."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Iterable, Sequence

from .poly import Polynomial, X1, X2, X3, poly
from .tame import Automorphism, auto, permutation_map

Triple = tuple[Fraction, Fraction, Fraction]


class ZeroPolynomial(ValueError):
    pass


class WeightNotDominant(ValueError):
    pass


class WeightSyntaxError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


class Weight:
    """A projective class of positive weights, normalized so the smallest entry is 1."""

    __slots__ = ("alpha",)

    def __init__(self, *alpha):
        if len(alpha) == 1:
            alpha = tuple(alpha[0])
        if len(alpha) != 3:
            raise ValueError("a weight has three entries")
        vals = [_frac(a) for a in alpha]
        if any(v <= 0 for v in vals):
            raise ValueError(f"weights must be positive: {alpha}")
        lo = min(vals)
        self.alpha: Triple = tuple(v / lo for v in vals)

    @classmethod
    def parse(cls, text: str) -> Weight:
        m = re.fullmatch(r"\s*\[([^\]]*)\]\s*", text)
        if not m:
            raise WeightSyntaxError(f"expected [a1,a2,a3], got {text!r}")
        parts = m.group(1).split(",")
        if len(parts) != 3:
            raise WeightSyntaxError(f"expected three entries in {text!r}")
        try:
            return cls(*(Fraction(p.strip()) for p in parts))
        except (ValueError, ZeroDivisionError) as exc:
            raise WeightSyntaxError(str(exc)) from exc

    def __iter__(self):
        return iter(self.alpha)

    def __getitem__(self, i: int) -> Fraction:
        return self.alpha[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Weight) and self.alpha == other.alpha

    def __hash__(self) -> int:
        return hash(self.alpha)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.alpha) + "]"

    def __repr__(self) -> str:
        return f"Weight{self}"

    def is_dominant(self) -> bool:
        a = self.alpha
        return a[0] >= a[1] >= a[2]

    def dominant_permutation(self) -> tuple[int, int, int]:
        """A permutation pi (1-based) with alpha[pi] sorted descending; stable on ties."""
        order = sorted(range(3), key=lambda i: (-self.alpha[i], i))
        return tuple(i + 1 for i in order)


def weight(x) -> Weight:
    if isinstance(x, Weight):
        return x
    if isinstance(x, str):
        return Weight.parse(x)
    return Weight(*x)


def _raw(alpha) -> Triple:
    if isinstance(alpha, Weight):
        return alpha.alpha
    if isinstance(alpha, str):
        return Weight.parse(alpha).alpha
    vals = tuple(_frac(a) for a in alpha)
    if len(vals) != 3 or any(v <= 0 for v in vals):
        raise ValueError(f"bad weight {alpha!r}")
    return vals


def nu(alpha, p: Polynomial | str) -> Fraction:
    """``min over monomials of -(alpha . m)``; ``alpha`` is used as given, not normalized."""
    a = _raw(alpha)
    p = poly(p)
    if not p:
        raise ZeroPolynomial("the valuation of 0 is undefined")
    return min(-(a[0] * m[0] + a[1] * m[1] + a[2] * m[2]) for m in p.monomials())


class Valuation:
    """``nu_{f,alpha}(P) = nu_{id,alpha}(P o f)``."""

    __slots__ = ("label", "weight")

    def __init__(self, label: Automorphism | str, w):
        self.label = auto(label)
        self.weight = weight(w)

    def __call__(self, p: Polynomial | str) -> Fraction:
        return nu(self.weight, poly(p).compose(self.label.components))

    def __repr__(self) -> str:
        return f"Valuation({self.label}, {self.weight})"

    def dominant_form(self) -> Valuation:
        """The same valuation relabelled so that its weight lies in the dominant chamber."""
        pi = self.weight.dominant_permutation()
        if pi == (1, 2, 3):
            return self
        s = permutation_map(pi)
        # nu_{id,alpha}(R) = nu_{id,alpha o pi}(R o s^-1), with s the map x_i -> x_{pi(i)}.
        s_inv = s.inverse()
        new_alpha = tuple(self.weight.alpha[p - 1] for p in pi)
        return Valuation(self.label.compose(s_inv), new_alpha)

    def same_point(self, other: Valuation) -> bool:
        """Exact equality of the two valuations as functions on polynomials."""
        a, b = self.dominant_form(), other.dominant_form()
        if a.weight != b.weight:
            return False
        return is_fixed(a.label.inverse().compose(b.label), a.weight)

    def agrees_on_generators(self, other: Valuation) -> bool:
        """Agreement on x1, x2, x3 and their pairwise products up to a common positive scale.

        This is a necessary condition only; ``same_point`` is the exact test.
        """
        tests = [X1, X2, X3, X1 * X2, X1 * X3, X2 * X3]
        u = [self(t) for t in tests]
        v = [other(t) for t in tests]
        ratio = u[0] / v[0]
        return ratio > 0 and all(x == ratio * y for x, y in zip(u, v))


def act(g: Automorphism | str, v: Valuation) -> Valuation:
    """``(g . v)(P) = v(P o g)``, realized as the valuation labelled ``g o f``."""
    return Valuation(auto(g).compose(v.label), v.weight)


class FixedRegion:
    """Rows ``c`` meaning ``c . alpha >= 0``; each row is ``e_i - m`` for a monomial ``m`` of ``f_i``."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Sequence[int]] = ()):
        seen = []
        for r in rows:
            r = tuple(int(x) for x in r)
            if r not in seen:
                seen.append(r)
        self.rows: tuple[tuple[int, int, int], ...] = tuple(sorted(seen))

    def contains(self, alpha) -> bool:
        a = _raw(alpha)
        return all(r[0] * a[0] + r[1] * a[1] + r[2] * a[2] >= 0 for r in self.rows)

    __contains__ = contains

    def tight_rows(self, alpha) -> list[tuple[int, int, int]]:
        a = _raw(alpha)
        return [r for r in self.rows if r[0] * a[0] + r[1] * a[1] + r[2] * a[2] == 0]

    def inequalities(self) -> list[str]:
        out = []
        for r in self.rows:
            lhs = [f"{'' if r[k] == 1 else r[k]}a{k + 1}" for k in range(3) if r[k] > 0]
            rhs = [f"{'' if -r[k] == 1 else -r[k]}a{k + 1}" for k in range(3) if r[k] < 0]
            out.append((" + ".join(lhs) or "0") + " >= " + (" + ".join(rhs) or "0"))
        return out

    def to_json(self) -> str:
        return json.dumps([list(r) for r in self.rows])

    @classmethod
    def from_json(cls, text: str) -> FixedRegion:
        return cls(json.loads(text))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FixedRegion) and self.rows == other.rows

    def __repr__(self) -> str:
        return f"FixedRegion({self.inequalities()})"


def fixed_region(f: Automorphism | str) -> FixedRegion:
    f = auto(f)
    rows = []
    for i, comp in enumerate(f.components):
        unit = tuple(int(k == i) for k in range(3))
        for m in comp.monomials():
            if m == unit or m == (0, 0, 0):
                continue
            rows.append(tuple(unit[k] - m[k] for k in range(3)))
    return FixedRegion(rows)


def is_fixed(f: Automorphism | str, alpha) -> bool:
    return fixed_region(f).contains(alpha)


# Stabilizer decomposition ------------------------------------------------

def _case(a: Triple) -> int:
    if a[0] == a[1] == a[2]:
        return 1
    if a[0] > a[1] > a[2]:
        return 2
    if a[0] > a[1] == a[2]:
        return 3
    return 4


def _linear_part(f: Automorphism, case: int) -> Automorphism | None:
    m = f.linear_coefficients()
    keep = {
        1: {(i, j) for i in range(3) for j in range(3)},
        2: {(0, 0), (1, 1), (2, 2)},
        3: {(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)},
        4: {(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)},
    }[case]
    mat = [[m[i][j] if (i, j) in keep else 0 for j in range(3)] for i in range(3)]
    det = (mat[0][0] * (mat[1][1] * mat[2][2] - mat[1][2] * mat[2][1])
           - mat[0][1] * (mat[1][0] * mat[2][2] - mat[1][2] * mat[2][0])
           + mat[0][2] * (mat[1][0] * mat[2][1] - mat[1][1] * mat[2][0]))
    if det == 0:
        return None
    return Automorphism.linear(mat)


def _in_M(m: Automorphism, a: Triple, case: int) -> bool:
    m1, m2, m3 = (c - x for c, x in zip(m.components, (X1, X2, X3)))
    if case == 1:
        return all(c.is_constant() for c in (m1, m2, m3))
    if case == 2:
        return (m1.variables() <= {2, 3} and m2.variables() <= {3} and m3.is_constant()
                and (not m1 or a[0] >= -nu(a, m1))
                and (not m2 or a[1] >= -nu(a, m2)))
    if case == 3:
        return (m1.variables() <= {2, 3} and m2.is_constant() and m3.is_constant()
                and a[0] >= a[1] * max(m1.degree(), 0))
    return (m1.variables() <= {3} and m2.variables() <= {3} and m3.is_constant()
            and a[0] >= a[2] * max(m1.degree(), 0) and a[0] >= a[2] * max(m2.degree(), 0))


def stab_decompose(f: Automorphism | str, alpha) -> tuple[Automorphism, Automorphism] | None:
    """Factor ``f = m o l`` with ``l`` in L_alpha and ``m`` in M_alpha, or return None."""
    f = auto(f)
    w = weight(alpha)
    if not w.is_dominant():
        raise WeightNotDominant(f"{w} is not in the dominant chamber")
    a = w.alpha
    case = _case(a)
    l_part = _linear_part(f, case)
    if l_part is None:
        return None
    m_part = f.compose(l_part.inverse())
    if not _in_M(m_part, a, case):
        return None
    return m_part, l_part


def _random_poly(monos: list[Monomial3], rng, density: float = 0.5) -> Polynomial:
    terms = {}
    for m in monos:
        if rng.random() < density:
            c = rng.choice([-2, -1, 1, 1, 2])
            terms[m] = c
    return Polynomial(terms)


Monomial3 = tuple[int, int, int]


def _monos_below(a: Triple, bound: Fraction, vars_: Sequence[int], min_deg: int = 1) -> list[Monomial3]:
    """Monomials in the given variables (1-based) with ``alpha . m <= bound``, of degree >= min_deg."""
    out = []
    limit = [int(bound / a[v - 1]) if v in vars_ else 0 for v in (1, 2, 3)]
    for e1 in range(limit[0] + 1):
        for e2 in range(limit[1] + 1):
            for e3 in range(limit[2] + 1):
                m = (e1, e2, e3)
                if sum(m) >= min_deg and a[0] * e1 + a[1] * e2 + a[2] * e3 <= bound:
                    out.append(m)
    return out


def random_stabilizer(alpha, rng, max_terms: int = 6) -> Automorphism:
    """A random element ``m o l`` of the stabilizer of the valuation at a dominant weight.

    Monomials that meet their bound with equality are favoured, since they are the
    ones that cut the fixed region through ``alpha``.
    """
    w = weight(alpha)
    if not w.is_dominant():
        raise WeightNotDominant(f"{w} is not in the dominant chamber")
    a = w.alpha
    case = _case(a)

    def pick(monos):
        tight = [m for m in monos if sum(a[i] * m[i] for i in range(3)) == max(
            sum(a[i] * x[i] for i in range(3)) for x in monos)] if monos else []
        chosen = [m for m in monos if rng.random() < 0.25][:max_terms]
        if tight and rng.random() < 0.7:
            chosen.append(rng.choice(tight))
        return _random_poly(sorted(set(chosen)), rng, density=1.0)

    def unit():
        return rng.choice([1, -1, 2, Fraction(1, 2)])

    def small():
        return rng.choice([0, 0, 1, -1, 2])

    while True:
        if case == 1:
            mat = [[small() for _ in range(3)] for _ in range(3)]
        elif case == 2:
            mat = [[unit(), 0, 0], [0, unit(), 0], [0, 0, unit()]]
        elif case == 3:
            mat = [[unit(), 0, 0], [0, small(), small()], [0, small(), small()]]
        else:
            mat = [[small(), small(), 0], [small(), small(), 0], [0, 0, unit()]]
        det = (mat[0][0] * (mat[1][1] * mat[2][2] - mat[1][2] * mat[2][1])
               - mat[0][1] * (mat[1][0] * mat[2][2] - mat[1][2] * mat[2][0])
               + mat[0][2] * (mat[1][0] * mat[2][1] - mat[1][1] * mat[2][0]))
        if det:
            break
    l_part = Automorphism.linear(mat)
    if case == 1:
        p1 = p2 = Polynomial()
    elif case == 2:
        p1 = pick(_monos_below(a, a[0], (2, 3)))
        p2 = pick(_monos_below(a, a[1], (3,)))
    elif case == 3:
        p1 = pick(_monos_below(a, a[0], (2, 3), min_deg=2) if a[0] >= 2 * a[1] else [])
        p2 = Polynomial()
    else:
        p1 = pick(_monos_below(a, a[0], (3,), min_deg=2))
        p2 = pick(_monos_below(a, a[0], (3,), min_deg=2))
    m_part = Automorphism(X1 + p1, X2 + p2, X3, check=False)
    return m_part.compose(l_part)
