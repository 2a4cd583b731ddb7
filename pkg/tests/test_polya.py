from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsos.bounds import LojaConstants
from cylsos.errors import DomainError, InfeasibleBudgetError
from cylsos.polya import (
    Caps,
    PolyaExpansion,
    adaptive_certify_core,
    bihomogenize,
    build_h,
    minimal_polya_exponent,
    polya_expand,
    polya_search,
    positivity_on_C,
)
from cylsos.polyring import Poly, affine_substitute, evaluate, homogenize_Y, parse_poly, specialize
from helpers import circle_point, xy_polys

P = parse_poly
DESK_F = P("x*y^2 + 1", 1)
DESK_G = [P("x - 1/4", 1), P("3/4 - x", 1)]


def _linear(n):
    return sum((Poly.x(i, n) for i in range(n + 1)), Poly.zero(n))


def test_build_h_desk_example():
    h = build_h(DESK_F, DESK_G, 1, 1)
    expected = P("x*y^2 + z^2 - (y^2 + z^2)*((x - 1/4)*(x - 5/4)^2 + (3/4 - x)*(-1/4 - x)^2)", 1)
    assert h == expected


def test_build_h_degenerate_cases():
    f = P("3 - x", 1)
    g = [P("x", 1), P("1 - x", 1)]
    assert build_h(f, g, 2, 1) == f - 2 * (g[0] * (g[0] - 1) ** 2 + g[1] * (g[1] - 1) ** 2)
    assert build_h(DESK_F, [DESK_G[0]], Fraction(5, 2), 0) == homogenize_Y(DESK_F) - P("5/2*(y^2 + z^2)*(x - 1/4)", 1)
    with pytest.raises(DomainError):
        build_h(P("y^3 + 1", 1), DESK_G, 1, 0)


def test_bihomogenize_examples():
    assert bihomogenize(P("x1 + 1", 1), 1) == P("x0 + 2*x1", 1)
    H = P("x0*x1 + 3*x1^2", 1)
    with pytest.raises(DomainError):
        bihomogenize(H, 2)  # X0 already present
    h = P("x1^2*y^2 - 2*x1^2*z^2", 1)
    assert bihomogenize(h, 2) == h
    assert bihomogenize(P("y^2 + x1*z^2", 1), 1) == P("(x0 + x1)*y^2 + x1*z^2", 1)


def test_bihomogenize_recovers_h_on_simplex_slice():
    h = build_h(DESK_F, DESK_G, 1, 1)
    H = bihomogenize(h, 3)
    assert affine_substitute(H, {0: P("1 - x1", 1)}) == h


def test_minimal_exponent_example():
    H = P("x0^2 - x0*x1 + x1^2", 1)
    for N in range(3):
        assert not polya_expand(H, N).success
    out = polya_expand(H, 3)
    assert out.success
    row = [out.b_coeffs[(5 - j, j)].coefficient((0, 0, 0, 0)) for j in range(6)]
    assert row == [1, 2, 1, 1, 2, 1]
    assert minimal_polya_exponent(H) == 3


def test_already_positive_succeeds_at_zero():
    H = P("x0^2 + x0*x1 + 3*x1^2", 1)
    assert polya_expand(H, 0).success
    assert minimal_polya_exponent(H) == 0


def test_associativity_shift():
    G = P("x0^2 - x0*x1 + x1^2", 1)
    H = _linear(1) * G
    nonzero = lambda out: {a: b for a, b in out.b_coeffs.items() if not b.is_zero()}  # noqa: E731
    for N in range(4):
        assert nonzero(polya_expand(H, N)) == nonzero(polya_expand(G, N + 1))


@pytest.mark.parametrize(
    "text, expected",
    [("y^2 + z^2", True), ("y^2 - z^2", False), ("y^4 - y^2*z^2 + z^4", True), ("y^2", False), ("y^3*z + z^4", False)],
)
def test_positivity_on_circle_examples(text, expected):
    assert positivity_on_C(P(text, 1)) is expected


def test_positivity_on_circle_zero():
    assert positivity_on_C(Poly.zero(1)) is False


@st.composite
def binary_forms(draw):
    m = 2 * draw(st.integers(1, 3))
    coeffs = draw(st.lists(st.fractions(-4, 4, max_denominator=4), min_size=m + 1, max_size=m + 1))
    return Poly({(0, 0, i, m - i): c for i, c in enumerate(coeffs)}, 1), m


@given(binary_forms())
def test_positivity_on_circle_agrees_with_sampling(form):
    b, m = form
    verdict = positivity_on_C(b)
    ts = [Fraction(i, 50) - 10 for i in range(1000)]
    values = [evaluate(b, (0, 0, *circle_point(t))) for t in ts]
    values.append(evaluate(b, (0, 0, 0, -1)))
    if verdict:
        assert min(values) > 0


def _random_H(draw):
    n = draw(st.integers(1, 2))
    f = draw(xy_polys(n=n, max_dx=3, max_m=2))
    m = 2
    fb = homogenize_Y(f, m) if f.deg_y() <= m else homogenize_Y(f)
    h = fb
    ell = max(h.deg_x(), 0)
    return bihomogenize(h, ell)


@given(st.data())
def test_reconstruction_identity(data):
    H = _random_H(data.draw)
    N = data.draw(st.integers(0, 4))
    out = polya_expand(H, N)
    assert out.reconstruct() == H * _linear(H.n) ** N


@given(st.data())
def test_incremental_expansion(data):
    H = _random_H(data.draw)
    N = data.draw(st.integers(0, 3))
    exp = PolyaExpansion(H)
    for _ in range(N):
        exp.step()
    once_more = PolyaExpansion(exp.as_poly() * _linear(H.n))
    exp.step()
    assert exp.as_poly() == once_more.as_poly()


def test_desk_schedule_triple():
    out = adaptive_certify_core(DESK_F, DESK_G, Fraction(17, 128), LojaConstants(1, 2))
    assert (out.lambda_used, out.k_used, out.N_used, out.ell) == (1, 1, 4, 2)
    assert [t["status"] for t in out.trace] == ["h-not-positive", "ok"]
    assert all(positivity_on_C(b) for b in out.b_coeffs.values())


def test_desk_pre_assembly_identity():
    out = adaptive_certify_core(DESK_F, DESK_G, Fraction(17, 128), LojaConstants(1, 2))
    expanded = out.reconstruct()
    x0 = P("1 - x1", 1)
    on_slice = specialize(affine_substitute(expanded, {0: x0}), {3: 1})
    lam_term = Fraction(out.lambda_used) * P("y^2 + 1", 1) * sum(
        (g * (g - 1) ** (2 * out.k_used) for g in DESK_G), Poly.zero(1)
    )
    assert on_slice == DESK_F - lam_term


def test_trivial_instance_returns_first_schedule_point():
    out = adaptive_certify_core(P("y^2 + 3", 1), [P("1/2", 1)], 1)
    assert (out.lambda_used, out.k_used, out.N_used) == (1, 0, 0)


def test_false_lower_bound_exhausts_budget():
    caps = Caps(max_N=6, max_k=1, max_lambda=Fraction(2))
    with pytest.raises(InfeasibleBudgetError) as info:
        adaptive_certify_core(P("x*y^2 + 1/100", 1), DESK_G, 1, LojaConstants(1, 2), caps)
    assert info.value.trace


def test_term_budget():
    H = P("x0^2 - x0*x1 + x1^2", 1)
    with pytest.raises(InfeasibleBudgetError):
        polya_search(H, 100, term_budget=3)
