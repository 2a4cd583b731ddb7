"""Semialgebraic-set services on the simplex frame.

All grid work happens in the simplex frame, where the Lipschitz estimates for
homogenized polynomials hold.  Sets declared in the unit-box frame are moved
there through :mod:`cylsos.frames` first and results are mapped back.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from . import frames
from .bounds import LojaConstants, _floor_log2, sqrt_upper
from .errors import ArityError, DomainError, EmptySetError, NotCertifiedError
from .polyring import Poly, as_fraction, homogenize_Y, norm_bullet, norm_weighted

log = logging.getLogger(__name__)

SIMPLEX = "simplex-interior"
UNIT_BOX = "open-unit-box"

DEFAULT_X_STEP = Fraction(1, 64)
FINEST_X_STEP = Fraction(1, 1024)
# adaptive minimum: starting cell size and circle sample, budget in point evaluations
START_X_STEP = Fraction(1, 16)
START_T_POINTS = 33
DEFAULT_GRID_BUDGET = 2_000_000
LOJA_EXPONENTS = (1, 2, 4, 8, 16)


@dataclass(frozen=True)
class SemialgebraicSet:
    generators: tuple
    n: int
    containment: str = SIMPLEX

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.containment not in (SIMPLEX, UNIT_BOX):
            raise DomainError(f"unknown containment {self.containment!r}")
        for g in self.generators:
            if g.n != self.n:
                raise ArityError("generator arity differs from the set dimension")
            if not g.only_uses(range(1, self.n + 1)):
                raise DomainError("generators may only involve X1..Xn")

    def in_simplex_frame(self) -> "SemialgebraicSet":
        if self.containment == SIMPLEX:
            return self
        return SemialgebraicSet(
            tuple(frames.to_simplex_frame(g) for g in self.generators), self.n, SIMPLEX
        )


@dataclass(frozen=True)
class CertifiedMin:
    lower_bound: Fraction
    witness_grid_step: Fraction | None
    method: str
    grid_min: Fraction | None = None
    slack: Fraction | None = None
    argmin: tuple | None = None
    sampled: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.lower_bound <= 0:
            raise DomainError("a certified minimum must be positive")


@dataclass(frozen=True)
class FullyMicResult:
    ok: bool
    kind: str | None = None
    m: int = 0
    witness: tuple | None = None
    value: Fraction | None = None
    other_witnesses: tuple = ()
    certified: CertifiedMin | None = None

    def __bool__(self):
        return self.ok


# ---- evaluation helpers --------------------------------------------------------


def _x_evaluator(p: Poly):
    """Fast exact evaluation of a polynomial in X1..Xn at many points."""
    n = p.n
    terms = [(c, e[1 : n + 1]) for e, c in p.items()]
    maxdeg = [max((e[i] for _, e in terms), default=0) for i in range(n)]

    def ev(point: Sequence[Fraction]) -> Fraction:
        pw = []
        for i in range(n):
            row = [Fraction(1)]
            for _ in range(maxdeg[i]):
                row.append(row[-1] * point[i])
            pw.append(row)
        total = Fraction(0)
        for c, e in terms:
            t = c
            for i, k in enumerate(e):
                if k:
                    t *= pw[i][k]
            total += t
        return total

    return ev


def contains(region: SemialgebraicSet, point: Sequence) -> bool:
    """All generators are >= 0 at the point (given in the set's own frame)."""
    if len(point) != region.n:
        raise ArityError(f"point has {len(point)} coordinates, expected {region.n}")
    pt = [as_fraction(v) for v in point]
    return all(_x_evaluator(g)(pt) >= 0 for g in region.generators)


def simplex_grid(n: int, step: Fraction) -> list[tuple[int, ...]]:
    """Integer points k with k_i >= 0 and sum k <= 1/step."""
    K = int(1 / step)
    if Fraction(1, K) != step:
        raise DomainError("grid step must be 1/K")
    out = []

    def rec(prefix, remaining):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k)

    rec([], K)
    return out


def grid_size(n: int, step: Fraction) -> int:
    return math.comb(int(1 / step) + n, n)


def circle_points(t_points: int) -> list[tuple[Fraction, Fraction]]:
    """Rational points of the half circle z >= 0 via t in [-1, 1]."""
    T = t_points - 1
    pts = []
    for j in range(t_points):
        t = Fraction(2 * j - T, T)
        den = 1 + t * t
        pts.append((2 * t / den, (1 - t * t) / den))
    return pts


def lipschitz_x(p: Poly, n: int) -> Fraction:
    """Rational upper bound of (1/2) sqrt(n) ||p|| (m+1) d (d+1) for p in (X, Y) or X."""
    m = max(p.deg_y(), 0) + max(p.deg_z(), 0) if p.uses(p.z_index) else max(p.deg_y(), 0)
    d = max(p.deg_x(), 0)
    return sqrt_upper(n) * norm_bullet(p) * (m + 1) * d * (d + 1) / 2


def lipschitz_angle(f_bar: Poly, m: int) -> Fraction:
    """Bound on |d/dtheta f_bar(x, sin theta, cos theta)| over the simplex: m (m+1)(d+1)||f||."""
    d = max(f_bar.deg_x(), 0)
    return m * (m + 1) * (d + 1) * norm_bullet(f_bar)


def _taylor_evaluators(p: Poly):
    """Evaluators of d^beta p / beta! for every beta != 0 that can be nonzero."""
    n = p.n
    out = []
    maxdeg = [max((e[i] for e in p.terms), default=0) for i in range(1, n + 1)]
    for beta in product(*(range(k + 1) for k in maxdeg)):
        if not any(beta):
            continue
        terms = {}
        for e, c in p.items():
            x = e[1 : n + 1]
            if all(a >= b for a, b in zip(x, beta)):
                w = c
                for a, b in zip(x, beta):
                    w *= math.comb(a, b)
                key = (e[0],) + tuple(a - b for a, b in zip(x, beta)) + e[n + 1 :]
                terms[key] = terms.get(key, 0) + w
        if terms:
            out.append((sum(beta), _x_evaluator(Poly(terms, n))))
    return out


def _cell_variation(taylor, pt, h) -> Fraction:
    """sup over delta in [0, h)^n of |p(pt + delta) - p(pt)|, bounded term by term."""
    return sum((abs(ev(pt)) * h**k for k, ev in taylor), Fraction(0))


def _neighbourhood(region: SemialgebraicSet, step: Fraction, rho: Fraction):
    """Grid points of the simplex within reach of S, plus the exact members of S."""
    evs = [_x_evaluator(g) for g in region.generators]
    lips = [lipschitz_x(g, region.n) for g in region.generators]
    near, members = [], []
    for k in simplex_grid(region.n, step):
        pt = tuple(step * ki for ki in k)
        vals = [ev(pt) for ev in evs]
        if all(v >= -L * rho for v, L in zip(vals, lips)):
            near.append(pt)
            if all(v >= 0 for v in vals):
                members.append(pt)
    return near, members


# ---- Lojasiewicz constants --------------------------------------------------------


def _required_exponents(region: SemialgebraicSet, step: Fraction, exponents) -> dict[int, int | None]:
    """For each c1, the least e with dist^c1 <= 2^e * (-min g) at all exterior grid points."""
    evs = [_x_evaluator(g) for g in region.generators]
    inside, outside = [], []
    for k in simplex_grid(region.n, step):
        pt = tuple(step * ki for ki in k)
        worst = min((ev(pt) for ev in evs), default=Fraction(0))
        if worst >= 0:
            inside.append(k)
        else:
            outside.append((k, -worst))
    if not inside:
        raise EmptySetError(f"no grid point of step {step} lies in S")
    if not outside:
        return {c1: None for c1 in exponents}
    ins = np.array(inside, dtype=np.int64)
    result: dict[int, int | None] = {}
    dist2 = []
    for k, v in outside:
        diff = ins - np.array(k, dtype=np.int64)
        d2 = int((diff * diff).sum(axis=1).min())
        dist2.append((Fraction(d2) * step * step, v))
    for c1 in exponents:
        best = None
        for d2, v in dist2:
            # smallest e with 4^e v^2 >= d2^c1
            lhs = d2**c1
            if not lhs:
                continue
            e = (_floor_log2(lhs / (v * v)) + 1) // 2 - 1
            while Fraction(4) ** e * v * v < lhs:
                e += 1
            while Fraction(4) ** (e - 1) * v * v >= lhs:
                e -= 1
            best = e if best is None else max(best, e)
        result[c1] = best
    return result


def estimate_loja(
    region: SemialgebraicSet, grid_step: Fraction = DEFAULT_X_STEP, safety=2
) -> LojaConstants:
    """Grid heuristic for dist(x, S)^c1 <= -c2 min(g_i(x), 0) on the simplex.

    c1 is the smallest exponent in (1, 2, 4, 8, 16) whose required power-of-two
    c2 does not grow when the grid is refined from 2*step to step; c2 is that
    power of two times ``safety``.
    """
    safety = as_fraction(safety)
    if safety < 2:
        raise DomainError("safety factor must be at least 2")
    region = region.in_simplex_frame()
    grid_step = as_fraction(grid_step)
    fine = _required_exponents(region, grid_step, LOJA_EXPONENTS)
    if all(v is None for v in fine.values()):
        return LojaConstants(1, safety, "grid-estimated")
    try:
        coarse = _required_exponents(region, grid_step * 2, LOJA_EXPONENTS)
    except EmptySetError:
        coarse = {c1: None for c1 in LOJA_EXPONENTS}
    chosen = LOJA_EXPONENTS[-1]
    for c1 in LOJA_EXPONENTS:
        if coarse[c1] is None or fine[c1] <= coarse[c1]:
            chosen = c1
            break
    log.debug("loja exponents fine=%s coarse=%s chosen=%s", fine, coarse, chosen)
    return LojaConstants(chosen, Fraction(2) ** fine[chosen] * safety, "grid-estimated")


def loja_violations(region: SemialgebraicSet, loja: LojaConstants, grid_step: Fraction):
    """Exterior grid points where the inequality fails (replay of the estimator)."""
    region = region.in_simplex_frame()
    if loja.c1.denominator != 1:
        raise DomainError("replay supports integer c1 only")
    req = _required_exponents(region, grid_step, (int(loja.c1),))[int(loja.c1)]
    if req is None:
        return []
    return [] if Fraction(2) ** req <= loja.c2 else [("required c2", Fraction(2) ** req)]


# ---- certified minimum ---------------------------------------------------------------


def _constant_on_circle(f_bar: Poly, m: int) -> Fraction | None:
    """c if f_bar == c (Y^2 + Z^2)^(m/2) with c a constant, else None."""
    if m % 2:
        return None
    n = f_bar.n
    base = (Poly.y(n) ** 2 + Poly.z(n) ** 2) ** (m // 2)
    lead = base.coefficient([0] * (n + 1) + [m, 0])
    c = f_bar.coefficient([0] * (n + 1) + [m, 0]) / lead
    if f_bar == base * c:
        return c
    return None


def certified_min(
    f: Poly,
    region: SemialgebraicSet,
    target_gap=None,
    x_step: Fraction = START_X_STEP,
    finest_step: Fraction = FINEST_X_STEP,
    t_points: int = START_T_POINTS,
    grid_budget: int = DEFAULT_GRID_BUDGET,
) -> CertifiedMin:
    """A positive rational L <= min over S x C of the homogenization of f.

    Best-first refinement of simplex cells p + [0, h)^n: each cell is valued at
    its lower corner on a rational half-circle sample and charged Lipschitz
    slack in X (h sqrt(n)) and in angle.  Cells whose lower bound holds the
    result back are split in X or re-sampled in angle, whichever slack is
    larger.  Without ``target_gap`` refinement stops once L >= (sampled min)/2.
    """
    region = region.in_simplex_frame()
    n = region.n
    if f.n != n:
        raise ArityError("f and the set have different dimensions")
    if f.uses(0) or f.uses(f.z_index):
        raise DomainError("f must be a polynomial in (X1..Xn, Y)")
    m = max(f.deg_y(), 0)
    if m % 2:
        raise DomainError("deg_Y f is odd; f cannot be positive on S x R")
    f_bar = homogenize_Y(f, m)
    c = _constant_on_circle(f_bar, m)
    if c is not None:
        if c > 0:
            return CertifiedMin(c, None, "exact", c, Fraction(0))
        raise NotCertifiedError(f"f is the constant {c} on the circle")

    coeffs = f.coefficients_in_y()
    evs = [(i, _x_evaluator(coeffs[i])) for i in sorted(coeffs)]
    c_taylor = [_taylor_evaluators(coeffs[i]) for i in sorted(coeffs)]
    g_evs = [_x_evaluator(g) for g in region.generators]
    g_taylor = [_taylor_evaluators(g) for g in region.generators]
    g_lips = [lipschitz_x(g, n) for g in region.generators]
    sqrt_n = sqrt_upper(n)
    Lx = lipschitz_x(f, n)
    Lt = lipschitz_angle(f_bar, m) if m else Fraction(0)
    target_gap = None if target_gap is None else as_fraction(target_gap)
    rows_cache: dict[int, list] = {}
    cost = 0

    def rows(T):
        if T not in rows_cache:
            circle = circle_points(T + 1) if m else [(Fraction(0), Fraction(1))]
            rows_cache[T] = [(yz, [yz[0] ** i * yz[1] ** (m - i) for i, _ in evs]) for yz in circle]
        return rows_cache[T]

    def make_cell(pt, h, T):
        nonlocal cost
        reach = h * sqrt_n
        gv = [ev(pt) for ev in g_evs]
        for v, L, tay in zip(gv, g_lips, g_taylor):
            if v < 0 and v + min(L * reach, _cell_variation(tay, pt, h)) < 0:
                return None
        vals = [ev(pt) for _, ev in evs]
        best = arg = None
        for yz, row in rows(T):
            v = sum(a * b for a, b in zip(vals, row))
            if best is None or v < best:
                best, arg = v, yz
        cost += len(rows_cache[T])
        # global slack from the Lipschitz bound, local slack from the exact Taylor shift
        var = [_cell_variation(tay, pt, h) for tay in c_taylor]
        local = sum(var, Fraction(0)) + (m * sum((abs(c) + w for c, w in zip(vals, var)), Fraction(0)) * Fraction(2, T) if m else 0)
        glob = Lx * reach + Lt * Fraction(2, T)
        slack = min(local, glob)
        x_part = sum(var, Fraction(0)) if local <= glob else Lx * reach
        member = all(v >= 0 for v in gv)
        return [best - slack, pt, h, T, best, member, arg, slack, 2 * x_part >= slack]

    h0 = as_fraction(x_step)
    T0 = max(t_points - 1, 2)
    cells = []
    for k in simplex_grid(n, h0):
        cell = make_cell(tuple(h0 * ki for ki in k), h0, T0)
        if cell is not None:
            cells.append(cell)
    if not cells:
        raise NotCertifiedError(f"no cell of step {h0} meets S")

    def upper():
        members = [c[4] for c in cells if c[5]]
        return min(members) if members else min(c[4] for c in cells)

    while True:
        U = upper()
        lower = min(c[0] for c in cells)
        goal = U - target_gap if target_gap is not None else U / 2
        if lower > 0 and lower >= goal:
            break
        if cost > grid_budget:
            break
        bottleneck = [c for c in cells if c[0] < goal]
        rest = [c for c in cells if c[0] >= goal]
        progressed = False
        for cell in bottleneck:
            pt, h, T, x_dominant = cell[1], cell[2], cell[3], cell[8]
            if (x_dominant or not m or T >= 2**16) and h / 2 >= finest_step:
                hh = h / 2
                for bits in product((0, 1), repeat=n):
                    child = tuple(p + hh * b for p, b in zip(pt, bits))
                    if sum(child) <= 1:
                        rest.append(make_cell(child, hh, T))
                progressed = True
            elif m and T < 2**16:
                rest.append(make_cell(pt, h, 2 * T))
                progressed = True
            else:
                rest.append(cell)
        cells = [c for c in rest if c is not None]
        if not progressed or not cells:
            break
    if not cells:
        raise NotCertifiedError("refinement removed every cell; S looks empty")
    worst = min(cells, key=lambda c: c[0])
    lower, U = worst[0], upper()
    log.debug("certified_min lower=%s sampled=%s cells=%d cost=%d", lower, U, len(cells), cost)
    if lower <= 0:
        raise NotCertifiedError(
            f"sampled minimum {U} does not exceed the slack {worst[7]} at step {worst[2]}",
            (worst[1], worst[6]),
        )
    finest = min(c[2] for c in cells)
    return CertifiedMin(lower, finest, "lipschitz-adaptive", U, worst[7], (worst[1], worst[6]))


# ---- fully m-ic check -----------------------------------------------------------------


def check_fully_mic(
    f: Poly, region: SemialgebraicSet, x_step: Fraction = DEFAULT_X_STEP, **grid_options
) -> FullyMicResult:
    """Pass iff deg_Y f is even and its leading coefficient is certified positive on S.

    Witness points are reported in the set's own frame.
    """
    m = max(f.deg_y(), 0)
    if m % 2:
        return FullyMicResult(False, "odd-degree", m)
    lead = f.leading_coefficient_y()
    simplex_region = region.in_simplex_frame()
    lead_s = lead if region.containment == SIMPLEX else frames.to_simplex_frame(lead)
    try:
        cm = certified_min(lead_s, simplex_region, **grid_options)
        return FullyMicResult(True, None, m, certified=cm)
    except NotCertifiedError:
        pass
    ev = _x_evaluator(lead_s)
    gens = [_x_evaluator(g) for g in simplex_region.generators]
    samples = []
    for k in simplex_grid(region.n, x_step):
        pt = tuple(x_step * ki for ki in k)
        if all(g(pt) >= 0 for g in gens):
            samples.append((ev(pt), pt))
    if not samples:
        return FullyMicResult(False, "empty-grid", m)

    def to_frame(pt):
        return pt if region.containment == SIMPLEX else frames.point_to_box(pt, region.n)

    low = min(v for v, _ in samples)
    bad = sorted((to_frame(pt) for v, pt in samples if v <= 0), reverse=True)
    if bad:
        return FullyMicResult(
            False, "vanishing-leading-coefficient", m, bad[0], ev_at(lead, bad[0]), tuple(bad[1:])
        )
    worst = max(to_frame(pt) for v, pt in samples if v == low)
    return FullyMicResult(False, "uncertified-leading-coefficient", m, worst, low)


def ev_at(p: Poly, point) -> Fraction:
    return _x_evaluator(p)([as_fraction(v) for v in point])
