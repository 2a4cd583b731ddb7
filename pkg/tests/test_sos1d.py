from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cylsos.errors import DomainError
from cylsos.polyring import Poly, parse_poly
from cylsos.sos1d import (
    SosPoly,
    binomial_sos,
    is_strictly_positive,
    sos_decompose_univariate,
    sturm_root_count,
)
from cylsos.verifier import verify_sos

P = parse_poly
Y = sympy.Symbol("Y")


@pytest.mark.parametrize("text, count", [("y^2 + 1", 0), ("y^2 - 1", 2), ("y^4 - y^2 + 1", 0), ("(y-1)^3*(y+2)", 2)])
def test_sturm_examples(text, count):
    assert sturm_root_count(P(text, 1)) == count


def test_sturm_on_interval():
    p = P("(y - 1/3)*(y - 2)*(y + 5)", 1)
    assert sturm_root_count(p, (Fraction(0), Fraction(3))) == 2
    assert sturm_root_count(p, (Fraction(-10), Fraction(0))) == 1


def test_sturm_rejects_zero():
    with pytest.raises(DomainError):
        sturm_root_count(Poly.zero(1))


@pytest.mark.parametrize("text", ["y^2 + 1", "y^4 - y^2 + 1", "2*y^2 + 2*y + 1"])
def test_decomposition_examples(text):
    p = P(text, 1)
    sos = sos_decompose_univariate(p)
    assert sos.expand() == p
    assert sos.weights_positive()


def test_decomposition_small_closed_forms():
    assert sos_decompose_univariate(P("y^2 + 1", 1)).terms == ((1, P("y", 1)), (1, P("1", 1)))
    sos = sos_decompose_univariate(P("2*y^2 + 2*y + 1", 1))
    assert sos.terms == ((2, P("y + 1/2", 1)), (Fraction(1, 2), P("1", 1)))


@pytest.mark.parametrize("text", ["y^2 - 1", "(y - 1)^2", "-y^2 - 1", "y^3 + 5"])
def test_decomposition_rejects_non_positive(text):
    with pytest.raises(DomainError):
        sos_decompose_univariate(P(text, 1))


@pytest.mark.parametrize("m_half, weights", [(0, [1]), (1, [1, 1]), (2, [1, 2, 1]), (5, [1, 5, 10, 10, 5, 1])])
def test_binomial_sos(m_half, weights):
    sos = binomial_sos(m_half)
    assert [w for w, _ in sos.terms] == weights
    assert sos.expand() == P(f"(y^2 + 1)^{m_half}", 1)


def test_sos_records_round_trip():
    sos = SosPoly(((Fraction(3, 7), P("y - 1/2", 1)), (Fraction(2), P("x*y", 1))), 1)
    assert SosPoly.from_records(sos.to_records(), 1) == sos


def test_verify_sos_structure():
    assert verify_sos(binomial_sos(1))
    assert not verify_sos(SosPoly(((Fraction(-1), P("y", 1)),), 1))
    assert verify_sos(SosPoly((), 1))


@st.composite
def positive_univariate(draw, max_deg=12):
    """sum of weighted squares plus a positive constant, degree <= max_deg."""
    half = draw(st.integers(0, max_deg // 2))
    p = Poly.const(draw(st.fractions(min_value=Fraction(1, 50), max_value=5, max_denominator=50)), 1)
    y = Poly.y(1)
    for _ in range(draw(st.integers(1, 3))):
        coeffs = draw(st.lists(st.fractions(-4, 4, max_denominator=8), min_size=half + 1, max_size=half + 1))
        q = sum((c * y**j for j, c in enumerate(coeffs)), Poly.zero(1))
        p = p + q * q * draw(st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=10))
    return p


@given(positive_univariate())
def test_decomposition_round_trip(p):
    sos = sos_decompose_univariate(p)
    assert sos.expand() == p
    assert sos.weights_positive()
    assert all(2 * q.degree() <= p.degree() for _, q in sos.terms)


@given(st.lists(st.fractions(-6, 6, max_denominator=6), min_size=2, max_size=11).filter(lambda c: c[-1] != 0))
def test_sturm_matches_sympy(coeffs):
    p = Poly.from_univariate(coeffs, 2, 1)
    oracle = sympy.Poly(sum(sympy.Rational(c.numerator, c.denominator) * Y**i for i, c in enumerate(coeffs)), Y)
    distinct = len(set(sympy.real_roots(oracle)))
    assert sturm_root_count(p) == distinct
    assert is_strictly_positive(p) == (distinct == 0 and coeffs[-1] > 0 and len(coeffs) % 2 == 1)
