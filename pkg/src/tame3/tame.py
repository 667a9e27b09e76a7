"""Tame automorphisms of affine 3-space.

Composition follows ``(f o g)_i = f_i(g_1, g_2, g_3)``, so that substituting a
polynomial into ``f o g`` equals substituting into ``f`` and then into ``g``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

from .poly import Polynomial, PolySyntaxError, X1, X2, X3, poly

TAGS = ("A", "B", "H", "K", "B∩H", "K∩H", "C-letter", "B′-letter")
_TAG_ALIASES = {"BnH": "B∩H", "B&H": "B∩H", "KnH": "K∩H", "K&H": "K∩H", "C": "C-letter", "B'": "B′-letter",
                "B'-letter": "B′-letter", "Bp": "B′-letter"}
HINTS = ("A", "B", "H", "K", "elementary", "other")


class NotInvertible(ValueError):
    """The Jacobian determinant is not a nonzero constant."""


class NotDirectlyInvertible(ValueError):
    """No triangular or linear pattern was found to invert a letter."""


def _det3(m: Sequence[Sequence]) -> object:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _ordered_partitions(items: tuple[int, ...]) -> Iterable[list[tuple[int, ...]]]:
    if not items:
        yield []
        return
    n = len(items)
    for mask in range(1, 1 << n):
        block = tuple(items[i] for i in range(n) if mask >> i & 1)
        rest = tuple(items[i] for i in range(n) if not mask >> i & 1)
        for tail in _ordered_partitions(rest):
            yield [block] + tail


_PARTITIONS = list(_ordered_partitions((0, 1, 2)))


def _invert_matrix(m: list[list[Fraction]]) -> list[list[Fraction]] | None:
    n = len(m)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                fac = a[r][col]
                a[r] = [x - fac * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


class Automorphism:
    """A polynomial triple with constant nonzero Jacobian determinant."""

    __slots__ = ("components", "_jac", "_inv", "_factors", "_hash")

    def __init__(self, f1, f2, f3, *, check: bool = True):
        self.components: tuple[Polynomial, Polynomial, Polynomial] = (poly(f1), poly(f2), poly(f3))
        self._inv: Automorphism | None = None
        self._factors: tuple[Automorphism, Automorphism] | None = None
        self._hash = None
        self._jac: Fraction | None = None
        if check:
            det = self.jacobian_determinant()
            if not det.is_constant() or not det:
                raise NotInvertible(f"Jacobian determinant of {self} is {det}")
            self._jac = det.constant_term()

    @classmethod
    def identity(cls) -> Automorphism:
        return cls(X1, X2, X3)

    @classmethod
    def elementary(cls, p: Polynomial | str, index: int = 1) -> Automorphism:
        """``x_index + p`` in slot ``index``, the other coordinates fixed; ``p`` must avoid x_index."""
        p = poly(p)
        if index in p.variables():
            raise NotInvertible("elementary polynomial must not involve its own variable")
        comps = [X1, X2, X3]
        comps[index - 1] = comps[index - 1] + p
        return cls(*comps)

    @classmethod
    def linear(cls, matrix: Sequence[Sequence], shift: Sequence = (0, 0, 0)) -> Automorphism:
        xs = (X1, X2, X3)
        comps = []
        for row, d in zip(matrix, shift):
            comps.append(sum((x.scale(Fraction(c)) for x, c in zip(xs, row)), Polynomial.const(d)))
        return cls(*comps)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> Polynomial:
        return self.components[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.components == other.components

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.components)
        return self._hash

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self) -> str:
        return f"Automorphism{self}"

    def is_identity(self) -> bool:
        return self.components == (X1, X2, X3)

    def degree(self) -> int:
        return max(c.degree() for c in self.components)

    def jacobian_matrix(self) -> list[list[Polynomial]]:
        return [[c.derivative(j) for j in (1, 2, 3)] for c in self.components]

    def jacobian_determinant(self) -> Polynomial:
        return _det3(self.jacobian_matrix())

    @property
    def jacobian(self) -> Fraction:
        if self._jac is None:
            det = self.jacobian_determinant()
            self._jac = det.constant_term()
        return self._jac

    def compose(self, g: Automorphism) -> Automorphism:
        """Return ``self o g``."""
        out = Automorphism(*(c.compose(g.components) for c in self.components), check=False)
        out._jac = self.jacobian * g.jacobian
        out._factors = (self, g)
        return out

    __matmul__ = compose

    def linear_coefficients(self) -> list[list[Fraction]]:
        """Coefficient of x_j in component i."""
        units = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
        return [[c.coeff(u) for u in units] for c in self.components]

    def inverse(self) -> Automorphism:
        if self._inv is None:
            if self._factors is not None:
                f, g = self._factors
                inv = g.inverse().compose(f.inverse())
            else:
                inv = _triangular_inverse(self)
                if inv is None:
                    raise NotDirectlyInvertible(f"no triangular pattern for {self}")
            inv._inv = self
            self._inv = inv
        return self._inv

    def is_directly_invertible(self) -> bool:
        return _triangular_inverse(self) is not None


def _triangular_inverse(f: Automorphism) -> Automorphism | None:
    # Try every ordered block decomposition: each block is affine in its own
    # variables with a constant invertible matrix, plus a polynomial in later blocks.
    # Variables may be permuted first: if (f o s) has inverse g then f^-1 = s o g.
    for perm in PERMUTATIONS:
        s = permutation_map(perm)
        fs = f if perm == (1, 2, 3) else f.compose(s)
        for blocks in _PARTITIONS:
            inv = _try_blocks(fs, blocks)
            if inv is not None:
                if perm == (1, 2, 3):
                    return inv
                out = s.compose(inv)
                out._factors = None
                return out
    return None


def _try_blocks(f: Automorphism, blocks: list[tuple[int, ...]]) -> Automorphism | None:
    xs = [X1, X2, X3]
    solved: dict[int, Polynomial] = {}
    plan = []
    for j, block in enumerate(blocks):
        earlier = {v for b in blocks[:j] for v in b}
        mat = []
        rests = []
        for i in block:
            row = [Fraction(0)] * len(block)
            rest: dict = {}
            for mono, c in f.components[i].items():
                used = {k for k in range(3) if mono[k]}
                if used & earlier:
                    return None
                if used & set(block):
                    if sum(mono) != 1:
                        return None
                    row[block.index(next(iter(used)))] = c
                else:
                    rest[mono] = c
            mat.append(row)
            rests.append(Polynomial(rest))
        inv = _invert_matrix(mat)
        if inv is None:
            return None
        plan.append((block, inv, rests))
    for block, inv, rests in reversed(plan):
        subst = [solved.get(k, xs[k]) for k in range(3)]
        rhs = [xs[i] - rest.compose(subst) for i, rest in zip(block, rests)]
        for r, i in enumerate(block):
            solved[i] = sum((rhs[c].scale(inv[r][c]) for c in range(len(block)) if inv[r][c]), Polynomial())
    g = Automorphism(solved[0], solved[1], solved[2], check=False)
    if f.compose(g).components != (X1, X2, X3):
        return None
    return g


def compose_auto(f: Automorphism, g: Automorphism) -> Automorphism:
    return f.compose(g)


def compose_all(maps: Iterable[Automorphism]) -> Automorphism:
    out = None
    for m in maps:
        out = m if out is None else out.compose(m)
    return out if out is not None else Automorphism.identity()


def _split_top(text: str) -> list[str]:
    depth = 0
    parts, cur = [], []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise PolySyntaxError(f"unbalanced parentheses in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_automorphism(text: str) -> Automorphism:
    """Parse ``"(f1, f2, f3)"`` and validate the Jacobian."""
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise PolySyntaxError(f"automorphism must be parenthesised: {text!r}")
    parts = _split_top(s[1:-1])
    if len(parts) != 3:
        raise PolySyntaxError(f"expected three components in {text!r}")
    return Automorphism(*(poly(p) for p in parts))


def auto(x: Automorphism | str) -> Automorphism:
    return x if isinstance(x, Automorphism) else parse_automorphism(x)


# Structural membership --------------------------------------------------

def _only_vars(p: Polynomial, allowed: set[int]) -> bool:
    return p.variables() <= allowed


def _linear_in(p: Polynomial, var: int) -> tuple[bool, Fraction]:
    """Whether ``var`` enters ``p`` only through the linear monomial; returns its coefficient."""
    unit = tuple(int(k == var - 1) for k in range(3))
    for mono in p.monomials():
        if mono[var - 1] and mono != unit:
            return False, Fraction(0)
    return True, p.coeff(unit)


def _affine(p: Polynomial, allowed: set[int]) -> bool:
    return p.degree() <= 1 and _only_vars(p, allowed)


def in_A(f: Automorphism) -> bool:
    return all(c.degree() <= 1 for c in f.components) and _det3(f.linear_coefficients()) != 0


def in_B(f: Automorphism) -> bool:
    f1, f2, f3 = f.components
    ok, a = _linear_in(f1, 1)
    if not ok or not a:
        return False
    if not (_affine(f2, {2, 3}) and _affine(f3, {2, 3})):
        return False
    m = f.linear_coefficients()
    return m[1][1] * m[2][2] - m[1][2] * m[2][1] != 0


def in_H(f: Automorphism) -> bool:
    f1, f2, f3 = f.components
    ok, a = _linear_in(f1, 1)
    if not ok or not a:
        return False
    if not _only_vars(f2, {2, 3}):
        return False
    ok, b = _linear_in(f2, 2)
    if not ok or not b:
        return False
    return _affine(f3, {3}) and f3.coeff((0, 0, 1)) != 0


def in_K(f: Automorphism) -> bool:
    f1, f2, f3 = f.components
    for c in (f1, f2):
        for var in (1, 2):
            if not _linear_in(c, var)[0]:
                return False
    if not (_affine(f3, {3}) and f3.coeff((0, 0, 1)) != 0):
        return False
    m = f.linear_coefficients()
    return m[0][0] * m[1][1] - m[0][1] * m[1][0] != 0


def member(f: Automorphism, tag: str) -> bool:
    """Structural membership in A, B, H, K, their intersections, or the letters of C and B'."""
    tag = _TAG_ALIASES.get(tag, tag)
    if tag == "A":
        return in_A(f)
    if tag == "B":
        return in_B(f)
    if tag == "H":
        return in_H(f)
    if tag == "K":
        return in_K(f)
    if tag == "B∩H":
        return in_B(f) and in_H(f)
    if tag == "K∩H":
        return in_K(f) and in_H(f)
    if tag == "C-letter":
        return in_K(f) or in_H(f)
    if tag == "B′-letter":
        return in_B(f) or in_H(f)
    raise ValueError(f"unknown subgroup tag {tag!r}")


# Words ------------------------------------------------------------------

class TameWord:
    """A finite sequence of letters; the realized map is their left-to-right composition."""

    def __init__(self, letters: Iterable[Automorphism | str] = (), hints: Iterable[str | None] | None = None):
        self.letters: tuple[Automorphism, ...] = tuple(auto(x) for x in letters)
        hints = list(hints) if hints is not None else [None] * len(self.letters)
        if len(hints) != len(self.letters):
            raise ValueError("one hint per letter")
        for h in hints:
            if h is not None and h not in HINTS:
                raise ValueError(f"unknown factor hint {h!r}")
        self.hints: tuple[str | None, ...] = tuple(hints)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TameWord) and self.letters == other.letters

    def __repr__(self) -> str:
        return f"TameWord([{', '.join(str(x) for x in self.letters)}])"

    def realize(self) -> Automorphism:
        return compose_all(self.letters)

    def to_json(self) -> str:
        items = []
        for a, h in zip(self.letters, self.hints):
            items.append({"auto": str(a), "tag": h} if h else str(a))
        return json.dumps(items)

    @classmethod
    def from_json(cls, text: str | list) -> TameWord:
        data = json.loads(text) if isinstance(text, str) else text
        letters, hints = [], []
        for item in data:
            if isinstance(item, str):
                letters.append(item)
                hints.append(None)
            else:
                letters.append(item["auto"])
                hints.append(item.get("tag"))
        return cls(letters, hints)


def invert_word(w: TameWord) -> TameWord:
    letters = []
    for i, a in enumerate(reversed(w.letters)):
        inv = _triangular_inverse(a)
        if inv is None:
            raise NotDirectlyInvertible(f"letter {len(w) - 1 - i} is not directly invertible: {a}")
        letters.append(inv)
    return TameWord(letters, list(reversed(w.hints)))


def permutation_map(perm: Sequence[int]) -> Automorphism:
    """The linear map sending x_i to x_{perm[i]} (1-based images)."""
    xs = (X1, X2, X3)
    return Automorphism(*(xs[p - 1] for p in perm), check=False)


PERMUTATIONS = [tuple(p) for p in permutations((1, 2, 3))]
