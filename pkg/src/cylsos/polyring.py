"""Sparse multivariate polynomials over exact rationals.

Every :class:`Poly` lives in the ring Q[X0, X1, ..., Xn, Y, Z] for a fixed
``n``; exponent vectors always have ``n + 3`` slots laid out as
``(e0, e1, ..., en, eY, eZ)``.  ``X0`` is the auxiliary simplex variable,
``Y`` the distinguished variable and ``Z`` its homogenizing partner.

Values are immutable.  Terms are kept in a plain dict that is never mutated
after construction, and printing uses a graded lexicographic order so the
text form is canonical.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from .errors import ArityError, DomainError, ParseError

Scalar = Union[int, Fraction]
Exponent = tuple  # tuple[int, ...] of length n + 3

__all__ = [
    "Poly",
    "X0",
    "as_fraction",
    "multinomial",
    "poly_mul",
    "norm_weighted",
    "norm_bullet",
    "homogenize_Y",
    "dehomogenize",
    "affine_substitute",
    "evaluate",
    "parse_poly",
    "format_poly",
    "format_fraction",
    "parse_fraction",
]

X0 = 0


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        raise ParseError(f"not a rational literal: {text!r}")
    return Fraction(text)


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def multinomial(alpha: Iterable[int]) -> int:
    """|alpha|! / (alpha_1! ... alpha_k!)."""
    total = 0
    result = 1
    for a in alpha:
        total += a
        result *= math.comb(total, a)
    return result


class Poly:
    __slots__ = ("_terms", "n")

    def __init__(self, terms: Mapping[Exponent, Scalar] | Iterable = (), n: int = 1):
        if n < 0:
            raise ArityError("n must be non-negative")
        self.n = n
        width = n + 3
        clean: dict[Exponent, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exp, coef in items:
            exp = tuple(exp)
            if len(exp) != width:
                raise ArityError(f"exponent {exp} has arity {len(exp)}, expected {width}")
            if any(e < 0 for e in exp):
                raise DomainError(f"negative exponent in {exp}")
            c = as_fraction(coef)
            if c:
                c = clean.get(exp, 0) + c
                if c:
                    clean[exp] = c
                else:
                    clean.pop(exp, None)
        self._terms = clean

    @classmethod
    def _raw(cls, terms: dict, n: int) -> "Poly":
        # trusted constructor: terms already clean
        p = object.__new__(cls)
        p._terms = terms
        p.n = n
        return p

    # ---- constructors -------------------------------------------------
    @classmethod
    def zero(cls, n: int = 1) -> "Poly":
        return cls._raw({}, n)

    @classmethod
    def const(cls, c: Scalar, n: int = 1) -> "Poly":
        c = as_fraction(c)
        return cls._raw({(0,) * (n + 3): c} if c else {}, n)

    @classmethod
    def var(cls, index: int, n: int = 1) -> "Poly":
        if not 0 <= index < n + 3:
            raise ArityError(f"variable index {index} out of range for n={n}")
        exp = [0] * (n + 3)
        exp[index] = 1
        return cls._raw({tuple(exp): Fraction(1)}, n)

    @classmethod
    def x(cls, i: int, n: int = 1) -> "Poly":
        return cls.var(i, n)

    @classmethod
    def y(cls, n: int = 1) -> "Poly":
        return cls.var(n + 1, n)

    @classmethod
    def z(cls, n: int = 1) -> "Poly":
        return cls.var(n + 2, n)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Poly":
        return parse_poly(text, n)

    # ---- basic access --------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return self._terms

    @property
    def arity(self) -> int:
        return self.n + 3

    @property
    def y_index(self) -> int:
        return self.n + 1

    @property
    def z_index(self) -> int:
        return self.n + 2

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.arity, Fraction(0))

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, indices: Iterable[int]) -> int:
        idx = tuple(indices)
        return max((sum(e[i] for i in idx) for e in self._terms), default=-1)

    def deg_x(self) -> int:
        """Total degree in X1..Xn."""
        return self.degree_in(range(1, self.n + 1))

    def deg_y(self) -> int:
        return self.degree_in((self.n + 1,))

    def deg_z(self) -> int:
        return self.degree_in((self.n + 2,))

    def deg_xy(self) -> int:
        """Total degree in (X1..Xn, Y): the degree of an element of R[X, Y]."""
        return self.degree_in(tuple(range(1, self.n + 2)))

    def uses(self, index: int) -> bool:
        return any(e[index] for e in self._terms)

    def only_uses(self, indices: Iterable[int]) -> bool:
        allowed = set(indices)
        return all(
            all(e[i] == 0 for i in range(self.arity) if i not in allowed) for e in self._terms
        )

    def is_homogeneous_in(self, indices: Iterable[int], degree: int | None = None) -> bool:
        idx = tuple(indices)
        degs = {sum(e[i] for i in idx) for e in self._terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return degree is None or degs.pop() == degree

    def x_part_indices(self) -> range:
        return range(1, self.n + 1)

    # ---- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ArityError(f"arity mismatch: n={self.n} vs n={other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other, self.n)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for exp, c in other._terms.items():
            v = terms.get(exp, 0) + c
            if v:
                terms[exp] = v
            else:
                terms.pop(exp, None)
        return Poly._raw(terms, self.n)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({e: -c for e, c in self._terms.items()}, self.n)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_fraction(other)
            if not other:
                return Poly.zero(self.n)
            return Poly._raw({e: c * other for e, c in self._terms.items()}, self.n)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / as_fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise DomainError("exponent must be a non-negative integer")
        result = Poly.const(1, self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other, self.n)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, n={self.n})"

    def __str__(self):
        return format_poly(self)

    # ---- structural helpers -------------------------------------------
    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        """Terms in descending graded lexicographic order."""
        return sorted(self._terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def map_coefficients(self, fn) -> "Poly":
        return Poly({e: fn(c) for e, c in self._terms.items()}, self.n)

    def collect(self, indices: Iterable[int]) -> dict[tuple, "Poly"]:
        """Group by the exponents at ``indices``; values keep the remaining variables."""
        idx = tuple(indices)
        out: dict[tuple, dict] = {}
        for e, c in self._terms.items():
            key = tuple(e[i] for i in idx)
            rest = list(e)
            for i in idx:
                rest[i] = 0
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: Poly._raw(v, self.n) for k, v in out.items()}

    def coefficients_in_y(self) -> dict[int, "Poly"]:
        """f = sum_i f_i Y^i with f_i free of Y."""
        return {k[0]: v for k, v in self.collect((self.y_index,)).items()}

    def leading_coefficient_y(self) -> "Poly":
        m = self.deg_y()
        if m < 0:
            return Poly.zero(self.n)
        return self.coefficients_in_y()[m]

    def extend(self, new_n: int) -> "Poly":
        """Embed into a ring with more X-variables."""
        if new_n < self.n:
            raise ArityError("cannot shrink arity")
        pad = (0,) * (new_n - self.n)
        terms = {e[: self.n + 1] + pad + e[self.n + 1 :]: c for e, c in self._terms.items()}
        return Poly._raw(terms, new_n)

    def to_univariate(self, index: int) -> list[Fraction]:
        """Dense coefficient list (low to high) of a polynomial in one variable."""
        if not self.only_uses((index,)):
            raise DomainError("polynomial is not univariate in the requested variable")
        deg = self.degree_in((index,))
        coeffs = [Fraction(0)] * (deg + 1)
        for e, c in self._terms.items():
            coeffs[e[index]] = c
        return coeffs

    @classmethod
    def from_univariate(cls, coeffs: Sequence[Scalar], index: int, n: int) -> "Poly":
        terms = {}
        for k, c in enumerate(coeffs):
            if c:
                exp = [0] * (n + 3)
                exp[index] = k
                terms[tuple(exp)] = as_fraction(c)
        return cls._raw(terms, n)


def poly_sum(polys, n: int) -> Poly:
    """Sum of many polynomials with a single accumulator."""
    acc: dict = {}
    get = acc.get
    for p in polys:
        if p.n != n:
            raise ArityError(f"arity mismatch: n={p.n} vs n={n}")
        for e, c in p._terms.items():
            acc[e] = get(e, 0) + c
    return Poly._raw({e: c for e, c in acc.items() if c}, n)


_PACK_BITS = 24


def _denominator_lcm(values) -> int:
    den = 1
    for c in values:
        d = c.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    return den


def _packed_integer_terms(p: "Poly", scale: int) -> list[tuple[int, int]]:
    out = []
    for e, c in p._terms.items():
        key = 0
        for x in reversed(e):
            key = (key << _PACK_BITS) | x
        out.append((key, c.numerator * (scale // c.denominator)))
    return out


def poly_mul(a: Poly, b: Poly) -> Poly:
    """Exact product of two polynomials of the same arity.

    Coefficients are scaled to integers and exponents packed into single
    integers, so the inner loop is integer arithmetic only.
    """
    if a.n != b.n:
        raise ArityError(f"arity mismatch: n={a.n} vs n={b.n}")
    if not a._terms or not b._terms:
        return Poly.zero(a.n)
    if len(a) > len(b):
        a, b = b, a
    if max(a.degree(), 0) + max(b.degree(), 0) >= 1 << (_PACK_BITS - 1):
        raise DomainError("degree too large for packed multiplication")
    da = _denominator_lcm(a._terms.values())
    db = _denominator_lcm(b._terms.values())
    at = _packed_integer_terms(a, da)
    bt = _packed_integer_terms(b, db)
    out: dict[int, int] = {}
    get = out.get
    for ka, ca in at:
        for kb, cb in bt:
            k = ka + kb
            out[k] = get(k, 0) + ca * cb
    width = a.arity
    mask = (1 << _PACK_BITS) - 1
    den = da * db
    terms = {}
    for k, v in out.items():
        if v:
            e = []
            for _ in range(width):
                e.append(k & mask)
                k >>= _PACK_BITS
            terms[tuple(e)] = Fraction(v, den)
    return Poly._raw(terms, a.n)


# ---- norms ----------------------------------------------------------------


def norm_weighted(p: Poly) -> Fraction:
    """Max |a_alpha| of p written in the basis multinomial(alpha) X^alpha.

    Only X1..Xn may occur.
    """
    if not p.only_uses(p.x_part_indices()):
        raise DomainError("norm_weighted is defined for polynomials in X1..Xn only")
    best = Fraction(0)
    for e, c in p.items():
        v = abs(c) / multinomial(e[1 : p.n + 1])
        if v > best:
            best = v
    return best


def norm_bullet(p: Poly) -> Fraction:
    """The mixed norm over the basis multinomial(alpha) X^alpha Y^i (Z^(m-i))."""
    if p.uses(X0):
        raise DomainError("norm_bullet does not accept X0")
    if p.uses(p.z_index) and not p.is_homogeneous_in((p.y_index, p.z_index)):
        raise DomainError("polynomial involving Z must be homogeneous in (Y, Z)")
    best = Fraction(0)
    for e, c in p.items():
        v = abs(c) / multinomial(e[1 : p.n + 1])
        if v > best:
            best = v
    return best


# ---- homogenization and substitution ----------------------------------------


def homogenize_Y(f: Poly, m: int | None = None) -> Poly:
    """sum_i f_i Y^i  ->  sum_i f_i Y^i Z^(m-i)."""
    if f.uses(f.z_index):
        raise DomainError("input already involves Z")
    dy = f.deg_y()
    if m is None:
        m = max(dy, 0)
    if dy > m:
        raise DomainError(f"deg_Y f = {dy} exceeds m = {m}")
    yi, zi = f.y_index, f.z_index
    terms = {}
    for e, c in f.items():
        e2 = list(e)
        e2[zi] = m - e[yi]
        terms[tuple(e2)] = c
    return Poly._raw(terms, f.n)


def dehomogenize(p: Poly) -> Poly:
    """Substitute Z = 1."""
    return specialize(p, {p.z_index: 1})


def specialize(p: Poly, values: Mapping[int, Scalar]) -> Poly:
    """Substitute exact rational values for some variables."""
    vals = {i: as_fraction(v) for i, v in values.items()}
    out: dict[Exponent, Fraction] = {}
    for e, c in p.items():
        e2 = list(e)
        for i, v in vals.items():
            if e[i]:
                c = c * v ** e[i]
                e2[i] = 0
        if c:
            t = tuple(e2)
            out[t] = out.get(t, 0) + c
    return Poly._raw({e: c for e, c in out.items() if c}, p.n)


def affine_substitute(p: Poly, mapping: Mapping[int, Poly]) -> Poly:
    """Compose p with a substitution variable -> polynomial (usually affine).

    Variables absent from ``mapping`` are left in place.
    """
    for img in mapping.values():
        if img.n != p.n:
            raise ArityError("substitution images must share the arity of p")
    powers: dict[int, list[Poly]] = {i: [Poly.const(1, p.n)] for i in mapping}

    def power(i: int, k: int) -> Poly:
        cache = powers[i]
        while len(cache) <= k:
            cache.append(cache[-1] * mapping[i])
        return cache[k]

    result: dict[Exponent, Fraction] = {}
    # group terms by the exponents of substituted variables to share products
    idx = tuple(sorted(mapping))
    groups: dict[tuple, dict] = {}
    for e, c in p.items():
        key = tuple(e[i] for i in idx)
        rest = list(e)
        for i in idx:
            rest[i] = 0
        groups.setdefault(key, {})[tuple(rest)] = c
    for key, rest_terms in groups.items():
        factor = Poly.const(1, p.n)
        for i, k in zip(idx, key):
            if k:
                factor = factor * power(i, k)
        prod_ = poly_mul(factor, Poly._raw(rest_terms, p.n))
        for e, c in prod_.items():
            result[e] = result.get(e, 0) + c
    return Poly._raw({e: c for e, c in result.items() if c}, p.n)


def evaluate(p: Poly, point: Sequence[Scalar] | Mapping[int, Scalar]) -> Fraction:
    """Exact value at a rational point.

    ``point`` is either a full vector of length n + 3 or a mapping from
    variable index to value (unmentioned variables must not occur in p).
    """
    if isinstance(point, Mapping):
        vals = {i: as_fraction(v) for i, v in point.items()}
        full = [vals.get(i) for i in range(p.arity)]
    else:
        if len(point) != p.arity:
            raise ArityError(f"point has {len(point)} coordinates, expected {p.arity}")
        full = [as_fraction(v) for v in point]
    total = Fraction(0)
    for e, c in p.items():
        term = c
        for i, k in enumerate(e):
            if k:
                v = full[i]
                if v is None:
                    raise ArityError(f"no value supplied for variable {variable_name(i, p.n)}")
                term *= v**k
        total += term
    return total


# ---- text grammar -----------------------------------------------------------


def variable_name(index: int, n: int) -> str:
    if index == n + 1:
        return "y"
    if index == n + 2:
        return "z"
    return f"x{index}"


def format_poly(p: Poly) -> str:
    if not p:
        return "0"
    pieces = []
    for k, (e, c) in enumerate(p.sorted_terms()):
        mono = "*".join(
            variable_name(i, p.n) + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a
        )
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{format_fraction(mag)}*{mono}"
        else:
            body = format_fraction(mag)
        if k == 0:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<var>[xX]\d*|[yYzZ])|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _var_index(name: str, n: int | None):
    name = name.lower()
    if name == "y":
        return "y"
    if name == "z":
        return "z"
    if name == "x":
        return 1
    return int(name[1:])


class _Parser:
    """Recursive-descent parser; the canonical printed form is a subset of what it accepts."""

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            self.fail("empty polynomial")
        p = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self) -> Poly:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        p = self.term()
        if sign < 0:
            p = -p
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()
            if op[1] == "*":
                p = p * self.factor()
            else:
                tok = self.peek()
                q = self.factor()
                if not q.is_constant() or q.is_zero():
                    self.fail("division only by a non-zero constant", tok)
                p = p * (1 / q.constant_term())
        return p

    def factor(self) -> Poly:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num":
                self.fail("exponent must be a non-negative integer literal", tok)
            base = base ** int(tok[1])
        return base

    def atom(self) -> Poly:
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return Poly.const(int(value), self.n)
        if kind == "var":
            idx = _var_index(value, self.n)
            if idx == "y":
                return Poly.y(self.n)
            if idx == "z":
                return Poly.z(self.n)
            if idx > self.n:
                self.fail(f"variable {value} exceeds n={self.n}", tok)
            return Poly.x(idx, self.n)
        if kind == "op" and value == "(":
            p = self.expr()
            if self.take()[1] != ")":
                self.fail("expected ')'", self.tokens[self.i - 1])
            return p
        if kind == "op" and value == "-":
            return -self.factor()
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected token {value!r}", tok)


def infer_n(*texts: str) -> int:
    """Largest X-index mentioned (``x`` counts as x1); at least 1."""
    n = 1
    for text in texts:
        for m in re.finditer(r"[xX](\d*)", text):
            if m.group(1):
                n = max(n, int(m.group(1)))
    return n


def parse_poly(text: str, n: int | None = None) -> Poly:
    """Parse the text grammar: ``c*x1^e1*...*y^i*z^j`` terms joined by +/-.

    Parentheses, ``**`` and division by constants are accepted as well.
    """
    if n is None:
        n = infer_n(text)
    return _Parser(text, n).parse()
