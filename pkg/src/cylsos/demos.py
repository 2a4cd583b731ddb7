"""Built-in instances shipped with the CLI."""

from __future__ import annotations

from fractions import Fraction

from .assembler import Certificate
from .pipeline import Problem, problem_from_dict
from .polya import polya_search
from .polyring import Poly, parse_poly
from .sos1d import SosPoly

DESK = {
    "name": "desk",
    "n": 1,
    "frame": "simplex",
    "f": "x*y^2 + 1",
    "generators": ["x - 1/4", "3/4 - x"],
}

COUNTEREXAMPLE = {
    "name": "counterexample",
    "n": 1,
    "frame": "unit-box",
    "f": "(1 - x^2)*y^2 + 1",
    "generators": ["(1 - x^2)^3"],
}

POLYA_FORM = "x0^2 - x0*x1 + x1^2"


def desk_problem() -> Problem:
    return problem_from_dict(DESK)


def counterexample_problem() -> Problem:
    return problem_from_dict(COUNTEREXAMPLE)


def archimedean_certificate() -> Certificate:
    """4/3 - X^2 = (4/3) (X (X^2 - 3/2))^2 + (4/3) (1 - X^2)^3."""
    n = 1
    x = Poly.x(1, n)
    f = parse_poly("4/3 - x^2", n)
    g = parse_poly("(1 - x^2)^3", n)
    sigma0 = SosPoly(((Fraction(4, 3), x * (x * x - Fraction(3, 2))),), n)
    sigma1 = SosPoly(((Fraction(4, 3), Poly.const(1, n)),), n)
    return Certificate(f, (g,), (sigma0, sigma1), {"route": "archimedean-identity", "frame": "unit-box"})


def polya_minimal():
    """Checked N values and the final coefficient table for x0^2 - x0 x1 + x1^2."""
    H = parse_poly(POLYA_FORM, 1)
    exp, checked = polya_search(H, 16, dense=True)
    return H, exp, checked


NAMES = ("desk", "counterexample", "archimedean", "polya-minimal")
