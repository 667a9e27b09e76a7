"""Sparse polynomials over the rationals in the variables x1, x2, x3."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Monomial = tuple[int, int, int]
Scalar = Union[int, Fraction]

VARS = ("x1", "x2", "x3")
_UNITS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class PolySyntaxError(ValueError):
    """Raised when polynomial text does not match the grammar."""


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _grlex_key(m: Monomial) -> tuple[int, int, int, int]:
    return (sum(m), m[0], m[1], m[2])


class Polynomial:
    """Immutable sparse polynomial; ``terms`` maps exponent triples to nonzero Fractions."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            if len(mono) != 3 or any(e < 0 for e in mono):
                raise ValueError(f"bad monomial {mono!r}")
            c = Fraction(coeff)
            if c:
                clean[tuple(int(e) for e in mono)] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> Polynomial:
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: Scalar) -> Polynomial:
        return cls({(0, 0, 0): c})

    @classmethod
    def var(cls, i: int) -> Polynomial:
        """The coordinate x_i for i in 1..3."""
        return cls({_UNITS[i - 1]: 1})

    @classmethod
    def monomial(cls, exps: Monomial, coeff: Scalar = 1) -> Polynomial:
        return cls({tuple(exps): coeff})

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def monomials(self) -> list[Monomial]:
        return sorted(self._terms, key=_grlex_key, reverse=True)

    def coeff(self, mono: Monomial) -> Fraction:
        return self._terms.get(tuple(mono), Fraction(0))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    @staticmethod
    def _coerce(x: Polynomial | Scalar) -> Polynomial:
        if isinstance(x, Polynomial):
            return x
        if isinstance(x, (int, Fraction)):
            return Polynomial.const(x)
        raise TypeError(f"cannot use {type(x).__name__} as a polynomial")

    def __add__(self, other: Polynomial | Scalar) -> Polynomial:
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Polynomial | Scalar) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other: Polynomial | Scalar) -> Polynomial:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def scale(self, r: Scalar) -> Polynomial:
        r = Fraction(r)
        if not r:
            return Polynomial()
        return Polynomial._raw({m: c * r for m, c in self._terms.items()})

    def __pow__(self, n: int) -> Polynomial:
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((m[i - 1] for m in self._terms), default=-1)

    def variables(self) -> set[int]:
        return {i + 1 for m in self._terms for i in range(3) if m[i]}

    def is_constant(self) -> bool:
        return all(m == (0, 0, 0) for m in self._terms)

    def constant_term(self) -> Fraction:
        return self.coeff((0, 0, 0))

    def compose(self, f: Iterable[Polynomial]) -> Polynomial:
        """Substitute x_i -> f[i]; ``f`` may be an Automorphism or any 3-sequence."""
        comps = list(getattr(f, "components", f))
        if len(comps) != 3:
            raise ValueError("substitution needs three components")
        cache: list[dict[int, Polynomial]] = [{0: Polynomial.const(1)} for _ in range(3)]

        def power(i: int, e: int) -> Polynomial:
            table = cache[i]
            if e not in table:
                k = max(k for k in table if k < e)
                p = table[k]
                for j in range(k + 1, e + 1):
                    p = p * comps[i]
                    table[j] = p
            return table[e]

        out = Polynomial()
        for m, c in self._terms.items():
            out = out + power(0, m[0]) * power(1, m[1]) * power(2, m[2]) * c
        return out

    def __call__(self, *args: Polynomial | Scalar) -> Polynomial:
        return self.compose([self._coerce(a) for a in args])

    def derivative(self, i: int) -> Polynomial:
        """Formal partial derivative with respect to x_i."""
        k = i - 1
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            if m[k]:
                e = list(m)
                e[k] -= 1
                out[tuple(e)] = c * m[k]
        return Polynomial._raw(out)

    def weighted_degree(self, weights: tuple[Scalar, Scalar, Scalar]) -> Fraction:
        w = [Fraction(x) for x in weights]
        if not self._terms:
            raise ValueError("zero polynomial has no weighted degree")
        return max(sum((w[i] * m[i] for i in range(3)), Fraction(0)) for m in self._terms)

    def weighted_parts(self, weights: tuple[Scalar, Scalar, Scalar]) -> list[tuple[Fraction, Polynomial]]:
        """Weighted-homogeneous components, ascending by weighted degree."""
        w = [Fraction(x) for x in weights]
        if any(x <= 0 for x in w):
            raise ValueError("weights must be positive")
        buckets: dict[Fraction, dict[Monomial, Fraction]] = {}
        for m, c in self._terms.items():
            d = sum((w[i] * m[i] for i in range(3)), Fraction(0))
            buckets.setdefault(d, {})[m] = c
        return [(d, Polynomial._raw(buckets[d])) for d in sorted(buckets)]

    def is_homogeneous(self, weights: tuple[Scalar, Scalar, Scalar] = (1, 1, 1)) -> bool:
        return len(self.weighted_parts(weights)) <= 1

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m in self.monomials():
            c = self._terms[m]
            factors = [VARS[i] + (f"^{m[i]}" if m[i] > 1 else "") for i in range(3) if m[i]]
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


X1, X2, X3 = (Polynomial.var(i) for i in (1, 2, 3))

_TOKEN = re.compile(r"\s*(?:(x[123])|(\d+)|(.))")


class _Parser:
    # Recursive descent over the documented grammar, extended with parentheses.
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str]] = []
        for m in _TOKEN.finditer(text):
            var, num, sym = m.groups()
            if var:
                self.tokens.append(("var", var))
            elif num:
                self.tokens.append(("num", num))
            elif sym and not sym.isspace():
                self.tokens.append(("sym", sym))
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise PolySyntaxError(f"unexpected end of input in {self.text!r}")
        self.pos += 1
        return tok

    def expect(self, sym: str) -> None:
        tok = self.take()
        if tok != ("sym", sym):
            raise PolySyntaxError(f"expected {sym!r}, got {tok[1]!r} in {self.text!r}")

    def parse(self) -> Polynomial:
        p = self.expr()
        if self.peek() is not None:
            raise PolySyntaxError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return p

    def expr(self) -> Polynomial:
        sign = 1
        if self.peek() in (("sym", "+"), ("sym", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        total = self.term().scale(sign)
        while self.peek() in (("sym", "+"), ("sym", "-")):
            sign = -1 if self.take()[1] == "-" else 1
            total = total + self.term().scale(sign)
        return total

    def starts_factor(self) -> bool:
        tok = self.peek()
        return tok is not None and (tok[0] in ("var", "num") or tok == ("sym", "("))

    def term(self) -> Polynomial:
        if self.peek() in (("sym", "+"), ("sym", "-")):
            # a sign directly after an operator, as in "x2 + -3*x3"
            sign = -1 if self.take()[1] == "-" else 1
            return self.term().scale(sign)
        if not self.starts_factor():
            tok = self.peek()
            raise PolySyntaxError(f"expected a term, got {tok[1] if tok else 'end'!r} in {self.text!r}")
        result = self.factor()
        while True:
            if self.peek() == ("sym", "*"):
                self.take()
                result = result * self.factor()
            elif self.starts_factor():
                result = result * self.factor()
            else:
                return result

    def factor(self) -> Polynomial:
        kind, val = self.take()
        if kind == "num":
            value = Fraction(int(val))
            if self.peek() == ("sym", "/"):
                self.take()
                k2, den = self.take()
                if k2 != "num" or int(den) == 0:
                    raise PolySyntaxError(f"bad denominator in {self.text!r}")
                value /= int(den)
            return Polynomial.const(value)
        if kind == "var":
            base = Polynomial.var(int(val[1]))
        elif val == "(":
            base = self.expr()
            self.expect(")")
        else:
            raise PolySyntaxError(f"unexpected {val!r} in {self.text!r}")
        if self.peek() == ("sym", "^"):
            self.take()
            k2, exp = self.take()
            if k2 != "num":
                raise PolySyntaxError(f"bad exponent in {self.text!r}")
            base = base ** int(exp)
        return base


def parse_poly(text: str) -> Polynomial:
    """Parse text such as ``"x1 + 2/3*x2^2*x3 - 5"``."""
    return _Parser(text).parse()


def poly(x: Polynomial | str | Scalar) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, str):
        return parse_poly(x)
    return Polynomial.const(x)
