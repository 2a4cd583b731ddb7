"""Polya multiplication of the bihomogenized polynomial and the (lambda, k, N) search.

The expansion of H * (X0 + ... + Xn)^N is carried out on integer data: H is
scaled by a positive common denominator, so every step of the incremental
multiplication is plain integer addition.  Coefficients b_alpha are kept as
lists indexed by the Y-exponent of Y^i Z^(m-i).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import bounds
from .bounds import LojaConstants
from .errors import DomainError, InfeasibleBudgetError
from .polyring import Poly, as_fraction, homogenize_Y, norm_bullet, norm_weighted
from .region import _x_evaluator, circle_points, simplex_grid
from .sos1d import is_strictly_positive, sturm_root_count

log = logging.getLogger(__name__)

DEFAULT_MAX_N = 1000
DEFAULT_MAX_K = 64
DEFAULT_MAX_LAMBDA = Fraction(2) ** 20
DEFAULT_TERM_BUDGET = 10**7
DENSE_PREFIX = 8


@dataclass(frozen=True)
class Caps:
    max_N: int = DEFAULT_MAX_N
    max_k: int = DEFAULT_MAX_K
    max_lambda: Fraction = DEFAULT_MAX_LAMBDA
    term_budget: int = DEFAULT_TERM_BUDGET


@dataclass
class PolyaOutcome:
    N_used: int
    lambda_used: Fraction
    k_used: int
    ell: int
    m: int
    b_coeffs: dict  # alpha (len n+1) -> Poly homogeneous of degree m in (Y, Z)
    H: Poly | None = None
    h: Poly | None = None
    success: bool = True
    trace: list = field(default_factory=list)

    def reconstruct(self) -> Poly:
        """sum_alpha b_alpha X0^alpha0 Xbar^alphabar."""
        total: dict = {}
        for alpha, b in self.b_coeffs.items():
            for e, c in b.items():
                exp = tuple(alpha) + e[len(alpha) :]
                total[exp] = total.get(exp, 0) + c
        n = next(iter(self.b_coeffs.values())).n if self.b_coeffs else 1
        return Poly(total, n)


# ---- construction of h and H ---------------------------------------------------------


def lambda_term(gens, n: int, m: int, lam, k: int) -> Poly:
    """lam (Y^2 + Z^2)^(m/2) sum_i g_i (g_i - 1)^(2k)."""
    acc = Poly.zero(n)
    for g in gens:
        acc = acc + g * (g - 1) ** (2 * k)
    circ = (Poly.y(n) ** 2 + Poly.z(n) ** 2) ** (m // 2)
    return circ * acc * as_fraction(lam)


def build_h(f: Poly, gens, lam, k: int) -> Poly:
    """h = f_bar - lam (Y^2 + Z^2)^(m/2) sum_i g_i (g_i - 1)^(2k)."""
    m = max(f.deg_y(), 0)
    if m % 2:
        raise DomainError("deg_Y f must be even")
    if as_fraction(lam) <= 0 or k < 0:
        raise DomainError("need lam > 0 and k >= 0")
    return homogenize_Y(f, m) - lambda_term(gens, f.n, m, lam, k)


def bihomogenize(h: Poly, ell: int) -> Poly:
    """sum_{i,j} h_ij(X) (X0 + X1 + ... + Xn)^(ell - j) Y^i Z^(m-i)."""
    n = h.n
    if h.deg_x() > ell:
        raise DomainError(f"deg_X h = {h.deg_x()} exceeds ell = {ell}")
    if h.uses(0):
        raise DomainError("h must not involve X0 yet")
    if not h.is_homogeneous_in((n + 1, n + 2)):
        raise DomainError("h must be homogeneous in (Y, Z)")
    linear = sum((Poly.x(i, n) for i in range(n + 1)), Poly.zero(n))
    powers = [Poly.const(1, n)]
    by_degree = h.collect(range(1, n + 1))
    layers: dict[int, dict] = {}
    for alpha, rest in by_degree.items():
        j = sum(alpha)
        exp_alpha = (0,) + alpha + (0, 0)
        for e, c in rest.items():
            e2 = tuple(a + b for a, b in zip(e, exp_alpha))
            layers.setdefault(j, {})[e2] = c
    total = Poly.zero(n)
    for j, terms in layers.items():
        while len(powers) <= ell - j:
            powers.append(powers[-1] * linear)
        total = total + Poly(terms, n) * powers[ell - j]
    return total


# ---- incremental expansion ------------------------------------------------------------


class PolyaExpansion:
    """State of H (X0 + ... + Xn)^N as integer coefficient vectors."""

    def __init__(self, H: Poly, m: int | None = None):
        n = H.n
        if not H.is_homogeneous_in(range(0, n + 1)):
            raise DomainError("H must be homogeneous in (X0, ..., Xn)")
        if m is None:
            m = max(H.degree_in((n + 1, n + 2)), 0)
        if not H.is_homogeneous_in((n + 1, n + 2), m if H else None):
            raise DomainError("H must be homogeneous in (Y, Z)")
        self.n = n
        self.m = m
        self.N = 0
        self.ell = max(H.degree_in(range(0, n + 1)), 0)
        denom = 1
        for c in H.terms.values():
            denom = denom * c.denominator // math.gcd(denom, c.denominator)
        self.scale = denom
        coeffs: dict[tuple, list[int]] = {}
        for e, c in H.items():
            alpha = e[: n + 1]
            row = coeffs.setdefault(alpha, [0] * (m + 1))
            row[e[n + 1]] += int(c * denom)
        self.coeffs = coeffs

    @property
    def term_count(self) -> int:
        return len(self.coeffs) * (self.m + 1)

    def step(self) -> None:
        n1 = self.n + 1
        new: dict[tuple, list[int]] = {}
        for alpha, row in self.coeffs.items():
            for j in range(n1):
                beta = alpha[:j] + (alpha[j] + 1,) + alpha[j + 1 :]
                acc = new.get(beta)
                if acc is None:
                    new[beta] = list(row)
                else:
                    for i, v in enumerate(row):
                        acc[i] += v
        self.coeffs = new
        self.N += 1

    def ends_positive(self) -> bool:
        """Necessary condition: b_alpha(0,1) > 0 and b_alpha(1,0) > 0 for every alpha."""
        if self.ell + self.N == 0 and not self.coeffs:
            return False
        expected = math.comb(self.ell + self.N + self.n, self.n)
        if len(self.coeffs) < expected:
            return False
        return all(row[0] > 0 and row[-1] > 0 for row in self.coeffs.values())

    def all_positive_on_circle(self) -> bool:
        if not self.ends_positive():
            return False
        return all(_row_positive(row) for row in self.coeffs.values())

    def b_polys(self) -> dict[tuple, Poly]:
        n, m = self.n, self.m
        out = {}
        for alpha, row in self.coeffs.items():
            terms = {}
            for i, v in enumerate(row):
                if v:
                    terms[(0,) * (n + 1) + (i, m - i)] = Fraction(v, self.scale)
            out[alpha] = Poly(terms, n)
        return out

    def as_poly(self) -> Poly:
        n, m = self.n, self.m
        terms = {}
        for alpha, row in self.coeffs.items():
            for i, v in enumerate(row):
                if v:
                    terms[alpha + (i, m - i)] = Fraction(v, self.scale)
        return Poly(terms, n)


def _row_positive(row) -> bool:
    """Strict positivity on the circle of sum_i row[i] Y^i Z^(m-i)."""
    m = len(row) - 1
    if row[0] <= 0 or row[-1] <= 0:
        return False
    if m == 0:
        return True
    if all(v == 0 for v in row[1::2]) and all(v >= 0 for v in row):
        return True
    if m == 2:
        return row[1] * row[1] < 4 * row[0] * row[2]
    return sturm_root_count([Fraction(v) for v in row]) == 0


def positivity_on_C(b: Poly) -> bool:
    """True iff b (homogeneous in (Y, Z) of even degree m) is > 0 on the unit circle."""
    if b.is_zero():
        return False
    n = b.n
    yi, zi = n + 1, n + 2
    if not b.only_uses((yi, zi)):
        raise DomainError("b must be a binary form in (Y, Z)")
    if not b.is_homogeneous_in((yi, zi)):
        raise DomainError("b must be homogeneous in (Y, Z)")
    m = b.degree_in((yi, zi))
    if m % 2:
        return False
    row = [Fraction(0)] * (m + 1)
    for e, c in b.items():
        row[e[yi]] = c
    if row[0] <= 0 or row[-1] <= 0:
        return False
    return is_strictly_positive(row)


def polya_expand(H: Poly, N: int) -> PolyaOutcome:
    """Expand H (X0 + ... + Xn)^N; ``success`` tells whether every b_alpha is positive on C."""
    exp = PolyaExpansion(H)
    for _ in range(N):
        exp.step()
    return PolyaOutcome(
        N_used=N,
        lambda_used=Fraction(0),
        k_used=0,
        ell=exp.ell,
        m=exp.m,
        b_coeffs=exp.b_polys(),
        H=H,
        success=exp.all_positive_on_circle(),
    )


def polya_search(
    H: Poly, max_N: int, term_budget: int = DEFAULT_TERM_BUDGET, dense: bool = False
) -> tuple[PolyaExpansion | None, list[int]]:
    """Smallest checked N (up to max_N) at which all b_alpha are positive on C.

    Necessary end conditions are tested at every N; the full test runs at
    every N while N <= DENSE_PREFIX (or always with ``dense``), then with a
    doubling stride.
    """
    exp = PolyaExpansion(H)
    checked = []
    stride = 1
    next_full = 0
    while True:
        if exp.term_count > term_budget:
            raise InfeasibleBudgetError(
                f"Polya expansion exceeded the term budget ({exp.term_count} > {term_budget})"
            )
        if exp.ends_positive() and (dense or exp.m == 0 or exp.N >= next_full):
            checked.append(exp.N)
            if exp.all_positive_on_circle():
                return exp, checked
            if not dense and exp.N >= DENSE_PREFIX:
                stride *= 2
            next_full = exp.N + stride
        if exp.N >= max_N:
            return None, checked
        exp.step()


def minimal_polya_exponent(H: Poly, max_N: int = DEFAULT_MAX_N) -> int | None:
    exp, _ = polya_search(H, max_N, dense=True)
    return None if exp is None else exp.N


# ---- adaptive schedule -------------------------------------------------------------------


def h_sample_min(h: Poly, n: int, m: int, x_step=Fraction(1, 32), t_points: int = 33) -> Fraction:
    """Minimum of h over a coarse grid of (simplex) x (half circle)."""
    coeffs = h.collect((n + 1, n + 2))
    evs = [(key, _x_evaluator(p)) for key, p in coeffs.items()]
    circle = circle_points(t_points) if m else [(Fraction(0), Fraction(1))]
    best = None
    for k in simplex_grid(n, x_step):
        pt = tuple(x_step * ki for ki in k)
        vals = [(key, ev(pt)) for key, ev in evs]
        for y, z in circle:
            v = sum(c * y ** key[0] * z ** key[1] for key, c in vals)
            if best is None or v < best:
                best = v
    return best


def instance_params(f: Poly, gens, f_min) -> bounds.InstanceParams:
    return bounds.InstanceParams(
        n=f.n,
        m=max(f.deg_y(), 0),
        d=max(f.deg_x(), 0),
        s=len(gens),
        norm_f=norm_bullet(f),
        f_min=as_fraction(f_min),
        max_deg_g=max((g.degree() for g in gens), default=0),
        gen_growth=max(((g.degree() + 1) * (norm_weighted(g) + 1) for g in gens), default=Fraction(1)),
    )


def formula_parameters(f: Poly, gens, f_min, loja: LojaConstants) -> tuple[Fraction, int]:
    p = instance_params(f, gens, f_min)
    lam = bounds.compute_lambda(loja, p.n, p.norm_f, p.m, p.d, p.f_min)
    return lam, bounds.compute_k(lam, p.s, p.f_min)


def _try(f, gens, f_min, lam, k, N_cap, caps, trace, h_check=True):
    n = f.n
    m = max(f.deg_y(), 0)
    h = build_h(f, gens, lam, k)
    ell = max(h.deg_x(), 0)
    entry = {"lambda": lam, "k": k, "ell": ell}
    if h_check:
        hmin = h_sample_min(h, n, m)
        entry["h_sample_min"] = hmin
        if hmin <= 0:
            entry["status"] = "h-not-positive"
            trace.append(entry)
            return None
    N_formula = bounds.compute_polya_N(m, ell, norm_bullet(h), f_min)
    cap = min(N_formula, caps.max_N) if N_cap is None else N_cap
    entry["N_cap"] = cap
    H = bihomogenize(h, ell)
    exp, checked = polya_search(H, cap, caps.term_budget)
    entry["N_checked"] = checked[-3:]
    if exp is None:
        entry["status"] = "polya-cap"
        trace.append(entry)
        return None
    entry["status"] = "ok"
    entry["N"] = exp.N
    trace.append(entry)
    return PolyaOutcome(
        N_used=exp.N,
        lambda_used=as_fraction(lam),
        k_used=k,
        ell=ell,
        m=m,
        b_coeffs=exp.b_polys(),
        H=H,
        h=h,
        success=True,
        trace=trace,
    )


def adaptive_certify_core(
    f: Poly,
    gens,
    f_min,
    loja: LojaConstants | None = None,
    caps: Caps = Caps(),
) -> PolyaOutcome:
    """First (lambda, k, N) in schedule order whose Polya coefficients are all positive on C.

    lambda runs over 1, 2, 4, ... up to the formula value (or ``max_lambda``);
    for each lambda, k runs from 0 up to the least k meeting 2k+1 >= 4 lam s / f_min.
    """
    f_min = as_fraction(f_min)
    if f_min <= 0:
        raise DomainError("f_min must be positive")
    gens = list(gens)
    s = len(gens)
    if s == 0:
        raise DomainError("at least one generator is required")
    trace: list = []
    lam_formula = k_formula = None
    if loja is not None and max(f.deg_x(), 0) >= 1:
        lam_formula, k_formula = formula_parameters(f, gens, f_min, loja)
    lam_limit = min(caps.max_lambda, lam_formula) if lam_formula is not None else caps.max_lambda
    lam = Fraction(1)
    tried = set()
    while lam <= lam_limit or not tried:
        k_hi = min(bounds.compute_k(lam, s, f_min), caps.max_k)
        for k in range(0, k_hi + 1):
            if (lam, k) in tried:
                continue
            tried.add((lam, k))
            log.info("schedule: trying lambda=%s k=%s", lam, k)
            out = _try(f, gens, f_min, lam, k, None, caps, trace)
            if out is not None:
                return out
        lam *= 2
    if lam_formula is not None and k_formula is not None and k_formula <= caps.max_k:
        log.info("schedule: falling back to formula parameters lambda=%s k=%s", lam_formula, k_formula)
        out = _try(f, gens, f_min, lam_formula, k_formula, None, caps, trace, h_check=False)
        if out is not None:
            return out
    params = instance_params(f, gens, f_min)
    report = None
    if lam_formula is not None:
        report = bounds.build_bound_report(params, loja, lam_formula, k_formula,
                                           max(params.d, (2 * k_formula + 1) * params.max_deg_g), 0, 0)
    raise InfeasibleBudgetError(
        "schedule exhausted its caps without a positive Polya expansion", report, trace
    )
