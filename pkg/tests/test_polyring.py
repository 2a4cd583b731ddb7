from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsos.errors import ArityError, DomainError, ParseError
from cylsos.frames import ell_inverse_map, ell_map
from cylsos.polyring import (
    Poly,
    affine_substitute,
    evaluate,
    format_poly,
    homogenize_Y,
    norm_bullet,
    norm_weighted,
    parse_poly,
    poly_mul,
    specialize,
)
from helpers import circle_point, from_sympy, simplex_point, to_sympy, x_polys, xy_polys

P = parse_poly


def test_product_examples():
    assert P("(x1-1)*(x1+1)", 1) == P("x1^2 - 1", 1)
    assert poly_mul(P("x - 1/4", 1), P("3/4 - x", 1)) == P("-x^2 + x - 3/16", 1)
    p = P("3*x1*y^2 - 2/7*z", 1)
    assert poly_mul(Poly.const(1, 1), p) == p


def test_product_arity_mismatch():
    with pytest.raises(ArityError):
        poly_mul(P("x1", 1), P("x1*x2", 2))


def test_weighted_norm_examples():
    assert norm_weighted(P("(x1+x2)^3", 2)) == 1
    assert norm_weighted(P("5", 2)) == 5
    assert norm_weighted(P("x1*x2", 2)) == Fraction(1, 2)
    with pytest.raises(DomainError):
        norm_weighted(P("x1*y", 1))


def test_mixed_norm_examples():
    assert norm_bullet(P("x*y^2", 1)) == 1
    assert norm_bullet(P("2*x1*x2*y^3", 2)) == 1
    f = P("x*y^2 + 1", 1)
    assert homogenize_Y(f) == P("x*y^2 + z^2", 1)
    assert norm_bullet(homogenize_Y(f)) == norm_bullet(f) == 1
    with pytest.raises(DomainError):
        norm_bullet(P("y^2 + z", 1))


def test_homogenize_examples():
    assert homogenize_Y(P("y^2 + x", 1), 2) == P("y^2 + x*z^2", 1)
    assert homogenize_Y(P("(1-x^2)*y^2 + 1", 1), 2) == P("(1-x^2)*y^2 + z^2", 1)
    f = P("3*x1 - 1/2", 1)
    assert homogenize_Y(f, 0) == f
    with pytest.raises(DomainError):
        homogenize_Y(P("y^3", 1), 2)


def test_affine_substitution_examples():
    assert affine_substitute(P("1 - x^2", 1), ell_inverse_map(1)) == P("4*x - 4*x^2", 1)
    p = P("x1^2*y - x2", 2)
    identity = {1: P("x1", 2), 2: P("x2", 2)}
    assert affine_substitute(p, identity) == p
    x = P("x", 1)
    assert affine_substitute(affine_substitute(x, ell_map(1)), ell_inverse_map(1)) == x


def test_evaluation_examples():
    assert evaluate(P("4/3 - x^2", 1), [0, 1, 0, 0]) == Fraction(1, 3)
    p = P("7/5 + x1*x2*y - z^3", 2)
    assert evaluate(p, [0] * 5) == Fraction(7, 5)
    assert evaluate(P("x*y^2 + z^2", 1), [0, Fraction(1, 4), 1, 0]) == Fraction(1, 4)
    with pytest.raises(ArityError):
        evaluate(p, [0, 1])


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        P("x1 + * 3", 1)
    assert info.value.position is not None


@given(xy_polys())
def test_text_round_trip(p):
    assert P(format_poly(p), p.n) == p


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(x_polys(n=n), x_polys(n=n), x_polys(n=n))))
def test_ring_laws(triple):
    a, b, c = triple
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(st.integers(1, 2).flatmap(lambda n: st.tuples(xy_polys(n=n), xy_polys(n=n))))
def test_product_matches_sympy(pair):
    a, b = pair
    assert poly_mul(a, b) == from_sympy(to_sympy(a) * to_sympy(b), a.n)


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(x_polys(n=n, homogeneous=True), x_polys(n=n, homogeneous=True))))
def test_weighted_norm_submultiplicative_homogeneous(pair):
    g, h = pair
    assert norm_weighted(g * h) <= norm_weighted(g) * norm_weighted(h)


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(x_polys(n=n), x_polys(n=n))))
def test_weighted_norm_product_general(pair):
    g, h = pair
    dg, dh = max(g.degree(), 0), max(h.degree(), 0)
    assert norm_weighted(g * h) <= (dg + 1) * (dh + 1) * norm_weighted(g) * norm_weighted(h)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_norm_of_linear_form_powers(n):
    s = sum((Poly.x(i, n) for i in range(1, n + 1)), Poly.zero(n))
    for d in range(13):
        assert norm_weighted(s**d) == 1


@given(xy_polys())
def test_homogenization_preserves_mixed_norm_and_dehomogenizes(f):
    fb = homogenize_Y(f, max(f.deg_y(), 0))
    assert norm_bullet(fb) == norm_bullet(f)
    assert specialize(fb, {f.n + 2: 1}) == f


@given(st.data())
def test_value_on_simplex_times_circle_bounded_by_mixed_norm(data):
    f = data.draw(xy_polys())
    n = f.n
    m = max(f.deg_y(), 0)
    d = max(f.deg_x(), 0)
    fb = homogenize_Y(f, m)
    x = simplex_point(data.draw, n)
    y, z = circle_point(data.draw(st.fractions(-5, 5, max_denominator=20)))
    assert abs(evaluate(fb, (0, *x, y, z))) <= norm_bullet(f) * (m + 1) * (d + 1)


def _sqrt_upper(q: Fraction) -> Fraction:
    # crude exact upper bound via integer square root
    from math import isqrt

    scale = 10**6
    r = isqrt(int(q * scale * scale))
    return Fraction(r + 1, scale)


@given(st.data())
def test_lipschitz_in_x_on_simplex(data):
    f = data.draw(xy_polys())
    n = f.n
    m = max(f.deg_y(), 0)
    d = max(f.deg_x(), 0)
    fb = homogenize_Y(f, m)
    x1 = simplex_point(data.draw, n)
    x2 = simplex_point(data.draw, n)
    y, z = circle_point(data.draw(st.fractions(-5, 5, max_denominator=20)))
    diff = abs(evaluate(fb, (0, *x1, y, z)) - evaluate(fb, (0, *x2, y, z)))
    dist_sq = sum((a - b) ** 2 for a, b in zip(x1, x2))
    bound = Fraction(1, 2) * _sqrt_upper(Fraction(n)) * norm_bullet(f) * (m + 1) * d * (d + 1) * _sqrt_upper(dist_sq)
    assert diff <= bound
