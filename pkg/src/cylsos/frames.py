"""The affine map between the unit box (-1, 1)^n and the simplex frame.

``ell(X) = ((X1 + 1)/(2n), ..., (Xn + 1)/(2n))`` sends (-1, 1)^n into the
interior of the standard simplex; its inverse is ``X -> 2nX - 1``.
"""

from __future__ import annotations

from fractions import Fraction

from .polyring import Poly, affine_substitute


def ell_map(n: int) -> dict[int, Poly]:
    return {i: (Poly.x(i, n) + 1) * Fraction(1, 2 * n) for i in range(1, n + 1)}


def ell_inverse_map(n: int) -> dict[int, Poly]:
    return {i: Poly.x(i, n) * (2 * n) - 1 for i in range(1, n + 1)}


def to_simplex_frame(p: Poly) -> Poly:
    """p(ell^{-1}(X)): the polynomial seen in simplex coordinates."""
    return affine_substitute(p, ell_inverse_map(p.n))


def to_box_frame(p: Poly) -> Poly:
    """p(ell(X)): pull a simplex-frame polynomial back to box coordinates."""
    return affine_substitute(p, ell_map(p.n))


def point_to_box(point, n: int) -> tuple[Fraction, ...]:
    return tuple(2 * n * Fraction(x) - 1 for x in point)


def point_to_simplex(point, n: int) -> tuple[Fraction, ...]:
    return tuple((Fraction(x) + 1) / (2 * n) for x in point)
