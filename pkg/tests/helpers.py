"""Shared strategies and independent oracles for the test suite."""

from __future__ import annotations

from fractions import Fraction

import sympy
from hypothesis import strategies as st

from cylsos.assembler import Certificate
from cylsos.polyring import Poly
from cylsos.sos1d import SosPoly

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

small_fractions = st.builds(
    Fraction,
    st.integers(min_value=-12, max_value=12),
    st.integers(min_value=1, max_value=6),
)


def nonzero(strategy):
    return strategy.filter(lambda c: c != 0)


@st.composite
def x_polys(draw, n=None, max_deg=4, max_terms=5, homogeneous=False):
    """Polynomials in X1..Xn only."""
    n = draw(st.integers(1, 3)) if n is None else n
    deg = draw(st.integers(0, max_deg))
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        if homogeneous:
            parts = draw(st.lists(st.integers(0, deg), min_size=n - 1, max_size=n - 1))
            cuts = sorted(parts)
            alpha = [b - a for a, b in zip([0] + cuts, cuts + [deg])]
        else:
            alpha = draw(st.lists(st.integers(0, deg), min_size=n, max_size=n))
            while sum(alpha) > deg:
                i = alpha.index(max(alpha))
                alpha[i] -= 1
        terms[(0, *alpha, 0, 0)] = draw(nonzero(small_fractions))
    return Poly(terms, n)


@st.composite
def xy_polys(draw, n=None, max_dx=4, max_m=4, max_terms=6):
    """Polynomials in (X1..Xn, Y)."""
    n = draw(st.integers(1, 3)) if n is None else n
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        alpha = draw(st.lists(st.integers(0, max_dx), min_size=n, max_size=n))
        while sum(alpha) > max_dx:
            alpha[alpha.index(max(alpha))] -= 1
        i = draw(st.integers(0, max_m))
        terms[(0, *alpha, i, 0)] = draw(nonzero(small_fractions))
    return Poly(terms, n)


def simplex_point(draw, n):
    """Rational point with nonnegative coordinates summing to at most 1."""
    den = draw(st.integers(1, 40))
    nums = draw(st.lists(st.integers(0, den), min_size=n, max_size=n))
    while sum(nums) > den:
        nums[nums.index(max(nums))] -= 1
    return tuple(Fraction(a, den) for a in nums)


def circle_point(t: Fraction) -> tuple[Fraction, Fraction]:
    return 2 * t / (1 + t * t), (1 - t * t) / (1 + t * t)


# ---- sympy oracle ---------------------------------------------------------


def symbols(n: int):
    return sympy.symbols(" ".join(["X0"] + [f"X{i}" for i in range(1, n + 1)] + ["Y", "Z"]))


def to_sympy(p: Poly):
    syms = symbols(p.n)
    expr = sympy.Integer(0)
    for exp, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, exp):
            term *= s**e
        expr += term
    return sympy.expand(expr)


def from_sympy(expr, n: int) -> Poly:
    syms = symbols(n)
    sp = sympy.Poly(sympy.expand(expr), *syms)
    return Poly({e: Fraction(int(c.p), int(c.q)) for e, c in sp.terms()}, n)


# ---- certificate mutations ---------------------------------------------------


def mutate_certificate(cert, rng):
    """Bump one coefficient of one square root, or one weight, by a nonzero rational.

    A bump that turns a root q into -q leaves the square unchanged, so it is redrawn.
    """
    sigmas = list(cert.sigmas)
    i = rng.choice([j for j, s in enumerate(sigmas) if len(s)])
    terms = list(sigmas[i].terms)
    t = rng.randrange(len(terms))
    w, q = terms[t]
    delta = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 7))
    if rng.random() < 0.3:
        w = w + delta if w + delta > 0 else w + abs(delta)
    else:
        e = rng.choice(sorted(q.terms) + [(0,) * (q.n + 3)])
        bumped = q + Poly({e: delta}, q.n)
        if bumped == -q:
            return mutate_certificate(cert, rng)
        q = bumped
    terms[t] = (w, q)
    sigmas[i] = SosPoly(tuple(terms), q.n)
    return Certificate(cert.f, cert.generators, tuple(sigmas), cert.meta)
