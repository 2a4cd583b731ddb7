"""Exact sums of squares for positive univariate polynomials.

Univariate polynomials are handled internally as dense coefficient lists,
lowest degree first.  The decomposition algorithm:

1. exact shortcuts (constants, even polynomials with non-negative
   coefficients, quadratics by completing the square);
2. otherwise a floating Gram matrix from the complex-root two-squares split,
   shifted into the interior of the PSD cone, rounded to rationals, projected
   exactly onto the Hankel constraints so that ``v^T G v = p`` holds exactly,
   and finally certified by an exact LDL^T factorization whose pivots become
   the weights.

Nothing inexact ever leaves this module: a failed LDL^T triggers a retry with
more precision and a smaller shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import DomainError
from .polyring import Poly, as_fraction, format_fraction, parse_poly, poly_sum

Dense = list  # list[Fraction], low to high


# ---- dense helpers -----------------------------------------------------------


def _trim(p: Sequence[Fraction]) -> list[Fraction]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def dense_eval(p: Sequence[Fraction], x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def dense_derivative(p: Sequence[Fraction]) -> list[Fraction]:
    return _trim([k * p[k] for k in range(1, len(p))])


def dense_rem(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    lead = b[-1]
    while len(a) >= len(b):
        q = a[-1] / lead
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= q * c
        a.pop()
        a = _trim(a)
    return a


def dense_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _as_dense(p) -> list[Fraction]:
    if isinstance(p, Poly):
        used = [i for i in range(p.arity) if p.uses(i)]
        if len(used) > 1:
            raise DomainError("expected a univariate polynomial")
        if not used:
            return _trim([p.constant_term()])
        return _trim(p.to_univariate(used[0]))
    return _trim([as_fraction(c) for c in p])


# ---- Sturm sequences ---------------------------------------------------------


def sturm_chain(p: Sequence[Fraction]) -> list[list[Fraction]]:
    p = _trim(p)
    chain = [p, dense_derivative(p)]
    while chain[-1]:
        r = dense_rem(chain[-2], chain[-1])
        chain.append([-c for c in r])
    chain.pop()
    return chain


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _variations(signs: Sequence[int]) -> int:
    signs = [s for s in signs if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _signs_at_infinity(chain, positive: bool) -> list[int]:
    out = []
    for q in chain:
        s = _sign(q[-1])
        if not positive and (len(q) - 1) % 2 == 1:
            s = -s
        out.append(s)
    return out


def sturm_root_count(p, interval: tuple | None = None) -> int:
    """Number of distinct real roots of p, on the whole line or in (a, b].

    ``interval`` may use ``None`` for an infinite endpoint.
    """
    dense = _as_dense(p)
    if not dense:
        raise DomainError("zero polynomial has infinitely many roots")
    if len(dense) == 1:
        return 0
    chain = sturm_chain(dense)
    a, b = interval if interval is not None else (None, None)
    if a is None:
        va = _variations(_signs_at_infinity(chain, positive=False))
    else:
        va = _variations([_sign(dense_eval(q, as_fraction(a))) for q in chain])
    if b is None:
        vb = _variations(_signs_at_infinity(chain, positive=True))
    else:
        vb = _variations([_sign(dense_eval(q, as_fraction(b))) for q in chain])
    return va - vb


def is_strictly_positive(p) -> bool:
    """True iff p(y) > 0 for every real y."""
    dense = _as_dense(p)
    if not dense:
        return False
    if len(dense) == 1:
        return dense[0] > 0
    if (len(dense) - 1) % 2 or dense[-1] <= 0 or dense[0] <= 0:
        return False
    return sturm_root_count(dense) == 0


# ---- SosPoly ---------------------------------------------------------------


@dataclass(frozen=True)
class SosPoly:
    """sum of weight * root^2 with positive rational weights.

    The empty sum is the zero polynomial.  Weights are stored instead of
    splitting each one into rational squares.
    """

    terms: tuple = ()
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((as_fraction(w), q) for w, q in self.terms))
        for w, q in self.terms:
            if q.n != self.n:
                raise DomainError("square roots must share the ambient arity")

    @classmethod
    def of(cls, pairs, n: int) -> "SosPoly":
        return cls(tuple(pairs), n)

    def expand(self) -> Poly:
        return poly_sum(((q * q) * w for w, q in self.terms), self.n)

    def degree(self) -> int:
        return max((2 * q.degree() for _, q in self.terms if q), default=-1)

    def weights_positive(self) -> bool:
        return all(w > 0 for w, _ in self.terms)

    def scale(self, c) -> "SosPoly":
        c = as_fraction(c)
        if c < 0:
            raise DomainError("SOS can only be scaled by a non-negative rational")
        if c == 0:
            return SosPoly((), self.n)
        return SosPoly(tuple((w * c, q) for w, q in self.terms), self.n)

    def times_square(self, r: Poly) -> "SosPoly":
        return SosPoly(tuple((w, q * r) for w, q in self.terms), self.n)

    def __add__(self, other: "SosPoly") -> "SosPoly":
        return SosPoly(self.terms + other.terms, self.n)

    def __mul__(self, other: "SosPoly") -> "SosPoly":
        return SosPoly(
            tuple((w1 * w2, q1 * q2) for w1, q1 in self.terms for w2, q2 in other.terms),
            self.n,
        )

    def __len__(self):
        return len(self.terms)

    def merged(self) -> "SosPoly":
        """Combine squares of identical roots (also up to sign)."""
        acc: dict[Poly, Fraction] = {}
        order = []
        for w, q in self.terms:
            if q.is_zero():
                continue
            key = q
            if key not in acc and -q in acc:
                key = -q
            if key not in acc:
                order.append(key)
                acc[key] = Fraction(0)
            acc[key] += w
        return SosPoly(tuple((acc[q], q) for q in order), self.n)

    def to_records(self) -> list[dict]:
        return [{"weight": format_fraction(w), "poly": str(q)} for w, q in self.terms]

    @classmethod
    def from_records(cls, records, n: int) -> "SosPoly":
        return cls(
            tuple((as_fraction(r["weight"]), parse_poly(r["poly"], n)) for r in records), n
        )


def binomial_sos(m_half: int, n: int = 1) -> SosPoly:
    """(Y^2 + 1)^m_half = sum_j C(m_half, j) (Y^j)^2."""
    if m_half < 0:
        raise DomainError("m_half must be non-negative")
    y = Poly.y(n)
    return SosPoly(tuple((Fraction(math.comb(m_half, j)), y**j) for j in range(m_half + 1)), n)


# ---- decomposition ------------------------------------------------------------


def _ldl(G: list[list[Fraction]]):
    """Exact LDL^T of a symmetric matrix; returns (L, D) or None if not PSD.

    Zero pivots are accepted only when the remaining column is zero too.
    """
    size = len(G)
    A = [row[:] for row in G]
    L = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    D = [Fraction(0)] * size
    for j in range(size):
        piv = A[j][j]
        if piv < 0:
            return None
        if piv == 0:
            if any(A[i][j] != 0 for i in range(j + 1, size)):
                return None
            continue
        D[j] = piv
        for i in range(j + 1, size):
            L[i][j] = A[i][j] / piv
        for i in range(j + 1, size):
            lij = L[i][j]
            if lij:
                for k in range(j + 1, i + 1):
                    A[i][k] -= lij * A[k][j]
                    A[k][i] = A[i][k]
    return L, D


def _sos_from_gram(G, basis_degrees, index: int, n: int) -> SosPoly | None:
    """Turn a Gram matrix in the basis (Y^d, ..., Y, 1) into weighted squares."""
    res = _ldl(G)
    if res is None:
        return None
    L, D = res
    pairs = []
    for j, w in enumerate(D):
        if w == 0:
            continue
        coeffs = {}
        for i in range(j, len(G)):
            if L[i][j]:
                coeffs[basis_degrees[i]] = L[i][j]
        dense = [Fraction(0)] * (max(coeffs) + 1)
        for k, c in coeffs.items():
            dense[k] = c
        pairs.append((w, Poly.from_univariate(dense, index, n)))
    return SosPoly(tuple(pairs), n)


def _gram_project(G: list[list[Fraction]], p: Sequence[Fraction], d: int):
    """Exact orthogonal projection onto {G : sum_{i+j=k} G_ij = p_k}.

    Basis index r corresponds to Y^(d - r).
    """
    size = d + 1
    for k in range(2 * d + 1):
        cells = [(r, s) for r in range(size) for s in range(size) if (d - r) + (d - s) == k]
        current = sum(G[r][s] for r, s in cells)
        delta = (p[k] - current) / len(cells)
        if delta:
            for r, s in cells:
                G[r][s] += delta
    return G


def _numeric_gram(p: Sequence[Fraction], d: int, dps: int, shift_fraction: float):
    """Floating Gram matrix strictly inside the PSD cone, as mpmath numbers."""
    mpmath.mp.dps = dps
    coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in p]
    # lower bound for p / (1 + y^2 + ... + y^(2d)) by sampling + roots of the derivative
    weight = [mpmath.mpf(1) if k % 2 == 0 else mpmath.mpf(0) for k in range(2 * d + 1)]

    def ratio(y):
        return mpmath.polyval(coeffs[::-1], y) / mpmath.polyval(weight[::-1], y)

    samples = [mpmath.mpf(t) / 8 for t in range(-64, 65)]
    try:
        crit = mpmath.polyroots(
            [k * coeffs[k] for k in range(len(coeffs) - 1, 0, -1)], maxsteps=200, extraprec=dps
        )
        samples += [mpmath.re(r) for r in crit if abs(mpmath.im(r)) < 1e-6 * (1 + abs(r))]
    except mpmath.libmp.libhyper.NoConvergence:
        pass
    lower = min(min(ratio(y) for y in samples), coeffs[-1], coeffs[0])
    eps = lower * shift_fraction
    if eps <= 0:
        eps = mpmath.mpf(10) ** (-dps // 2)
    shifted = [coeffs[k] - (eps if k % 2 == 0 else 0) for k in range(2 * d + 1)]
    roots = mpmath.polyroots(shifted[::-1], maxsteps=400, extraprec=2 * dps)
    upper = sorted((r for r in roots if mpmath.im(r) >= 0), key=lambda r: -mpmath.im(r))[:d]
    if len(upper) < d:
        upper = sorted(roots, key=lambda r: -mpmath.im(r))[:d]
    # q = prod (y - r) over upper roots; shifted = lead * |q|^2 = lead (A^2 + B^2)
    q = [mpmath.mpc(1)]
    for r in upper:
        nq = [mpmath.mpc(0)] * (len(q) + 1)
        for i, c in enumerate(q):
            nq[i + 1] += c
            nq[i] -= c * r
        q = nq
    lead = shifted[-1]
    A = [mpmath.re(c) for c in q]
    B = [mpmath.im(c) for c in q]
    size = d + 1
    G = [[mpmath.mpf(0)] * size for _ in range(size)]
    for r in range(size):
        for s in range(size):
            i, j = d - r, d - s
            G[r][s] = lead * (A[i] * A[j] + B[i] * B[j]) + (eps if r == s else 0)
    return G


def sos_decompose_univariate(p, index: int | None = None, n: int | None = None) -> SosPoly:
    """Weighted squares q_j with sum w_j q_j^2 == p exactly and deg q_j <= deg(p)/2.

    ``p`` is a univariate :class:`Poly` (or dense coefficient list, with
    ``index``/``n`` naming the variable of the output).
    """
    if isinstance(p, Poly):
        n = p.n if n is None else n
        if index is None:
            used = [i for i in range(p.arity) if p.uses(i)]
            index = used[0] if used else p.n + 1
    if n is None:
        n = 1
    if index is None:
        index = n + 1
    dense = _as_dense(p)
    if not is_strictly_positive(dense):
        raise DomainError("polynomial is not strictly positive on the real line")
    deg = len(dense) - 1
    d = deg // 2
    var = Poly.var(index, n)

    if deg == 0:
        return SosPoly(((dense[0], Poly.const(1, n)),), n)
    if all(dense[k] == 0 for k in range(1, deg + 1, 2)) and all(c >= 0 for c in dense):
        return SosPoly(
            tuple((dense[2 * j], var**j) for j in range(d, -1, -1) if dense[2 * j]), n
        )
    if deg == 2:
        c, b, a = dense
        return SosPoly(((a, var + b / (2 * a)), (c - b * b / (4 * a), Poly.const(1, n))), n)

    basis_degrees = [d - r for r in range(d + 1)]
    for attempt in range(8):
        dps = 30 + 20 * attempt
        shift = 0.5 / (2**attempt)
        Gf = _numeric_gram(dense, d, dps, shift)
        denom = 2 ** (40 + 20 * attempt)
        G = [
            [Fraction(int(mpmath.nint(x * denom)), denom) for x in row] for row in Gf
        ]
        for r in range(d + 1):
            for s in range(r + 1, d + 1):
                G[r][s] = G[s][r] = (G[r][s] + G[s][r]) / 2
        G = _gram_project(G, dense, d)
        sos = _sos_from_gram(G, basis_degrees, index, n)
        if sos is not None and sos.expand() == Poly.from_univariate(dense, index, n):
            return sos
    raise ArithmeticError("rational Gram rounding failed to certify positivity")
