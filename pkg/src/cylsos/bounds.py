"""Explicit constants of the construction, evaluated in exact arithmetic.

Irrational factors (square roots, rational powers) are replaced by rational
enclosures accurate to ``ENCLOSURE_DIGITS`` significant digits and always
rounded in the direction that keeps the inequality being bounded valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Iterable

from .errors import DomainError
from .polyring import as_fraction, format_fraction, parse_fraction

ENCLOSURE_DIGITS = 6
LAMBDA_MANTISSA_BITS = 8
# report values wider than this are printed as upward-rounded m*2^e
REPORT_MAX_BITS = 256
REPORT_MANTISSA_BITS = 53


# ---- rational enclosures ---------------------------------------------------


def _iroot_floor(a: int, q: int) -> int:
    """floor(a ** (1/q)) for a >= 0."""
    if a < 2:
        return a
    x = 1 << ((a.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + a // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x**q > a:
        x -= 1
    while (x + 1) ** q <= a:
        x += 1
    return x


def _root_bounds(a: Fraction, q: int, digits: int = ENCLOSURE_DIGITS) -> tuple[Fraction, Fraction]:
    """Rationals lo <= a^(1/q) <= hi with hi - lo <= 10^-digits * hi."""
    if a < 0:
        raise DomainError("root of a negative number")
    if a == 0:
        return Fraction(0), Fraction(0)
    if q == 1:
        return a, a
    # scale D so that the root times D has more than `digits` decimal digits
    approx = math.exp(math.log(a.numerator) / q - math.log(a.denominator) / q) if a else 0.0
    D = 10 ** (digits + 1)
    if approx < 1:
        D = D * 10 ** max(0, int(-math.log10(approx)) + 1)
    num = a.numerator * D**q
    den = a.denominator
    lo_int = _iroot_floor(num // den, q)
    hi_int = lo_int if lo_int**q * den == num else lo_int + 1
    return Fraction(lo_int, D), Fraction(hi_int, D)


def pow_bounds(base, exponent, digits: int = ENCLOSURE_DIGITS) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds for base ** exponent, base > 0, exponent rational."""
    base = as_fraction(base)
    exponent = as_fraction(exponent)
    if base <= 0:
        raise DomainError("pow_bounds needs a positive base")
    if exponent < 0:
        lo, hi = pow_bounds(base, -exponent, digits)
        return 1 / hi, 1 / lo
    p, q = exponent.numerator, exponent.denominator
    exact = base**p
    if q == 1:
        return exact, exact
    return _root_bounds(exact, q, digits)


def sqrt_bounds(a, digits: int = ENCLOSURE_DIGITS) -> tuple[Fraction, Fraction]:
    return pow_bounds(a, Fraction(1, 2), digits)


def sqrt_upper(a, digits: int = ENCLOSURE_DIGITS) -> Fraction:
    return sqrt_bounds(a, digits)[1]


def round_up_dyadic(x: Fraction, bits: int = LAMBDA_MANTISSA_BITS) -> Fraction:
    """Smallest dyadic rational >= x with a ``bits``-bit mantissa."""
    x = as_fraction(x)
    if x <= 0:
        raise DomainError("round_up_dyadic expects a positive value")
    e = _floor_log2(x) - (bits - 1)
    ulp = Fraction(2) ** e
    return math.ceil(x / ulp) * ulp


def dyadic_ulp(x: Fraction, bits: int = LAMBDA_MANTISSA_BITS) -> Fraction:
    return Fraction(2) ** (_floor_log2(as_fraction(x)) - (bits - 1))


def _floor_log2(x: Fraction) -> int:
    e = x.numerator.bit_length() - x.denominator.bit_length()
    if Fraction(2) ** e > x:
        e -= 1
    elif Fraction(2) ** (e + 1) <= x:
        e += 1
    return e


# ---- data types --------------------------------------------------------------


@dataclass(frozen=True)
class LojaConstants:
    c1: Fraction
    c2: Fraction
    provenance: str = "user-supplied"

    def __post_init__(self):
        object.__setattr__(self, "c1", as_fraction(self.c1))
        object.__setattr__(self, "c2", as_fraction(self.c2))
        if self.c1 <= 0 or self.c2 <= 0:
            raise DomainError("Lojasiewicz constants must be positive")
        if self.provenance not in ("user-supplied", "grid-estimated"):
            raise DomainError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class InstanceParams:
    """The data of (f, g_1..g_s) that the explicit bounds depend on."""

    n: int
    m: int
    d: int
    s: int
    norm_f: Fraction
    f_min: Fraction
    max_deg_g: int
    gen_growth: Fraction  # max_i (deg g_i + 1)(||g_i|| + 1)


@dataclass(frozen=True)
class BoundReport:
    lam: Fraction
    k: int
    ell: int
    N: int
    k_bound: Fraction
    ell_bound: Fraction
    h_norm_bound: Fraction
    n_plus_ell_bound: Fraction
    term_bound_module: int
    term_bound_polya: int
    c9: int
    extras: dict = field(default_factory=dict, compare=False)

    KEY_NAMES = {"lam": "lambda"}

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            if f.name == "extras":
                continue
            value = getattr(self, f.name)
            lines.append(f"{self.KEY_NAMES.get(f.name, f.name)}={_fmt(value)}")
        for key in sorted(self.extras):
            lines.append(f"{key}={_fmt(self.extras[key])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BoundReport":
        raw = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
        inverse = {v: k for k, v in cls.KEY_NAMES.items()}
        kwargs = {}
        extras = {}
        names = {f.name for f in fields(cls)}
        for key, value in raw.items():
            name = inverse.get(key, key)
            if name in names and name != "extras":
                kwargs[name] = _unfmt(value)
            else:
                extras[key] = _unfmt_loose(value)
        for name in ("k", "ell", "N", "term_bound_module", "term_bound_polya", "c9"):
            kwargs[name] = int(kwargs[name])
        return cls(**kwargs, extras=extras)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, Fraction)):
        v = Fraction(v)
        if v > 0 and max(v.numerator.bit_length(), v.denominator.bit_length()) > REPORT_MAX_BITS:
            up = round_up_dyadic(v, REPORT_MANTISSA_BITS)
            e = _floor_log2(up) - (REPORT_MANTISSA_BITS - 1)
            return f"{int(up / Fraction(2) ** e)}*2^{e}"
        return format_fraction(v)
    return str(v)


def _unfmt(v: str) -> Fraction:
    mant, sep, exp = v.partition("*2^")
    if sep:
        return parse_fraction(mant) * Fraction(2) ** int(exp)
    return parse_fraction(v)


def _unfmt_loose(v: str):
    try:
        return parse_fraction(v)
    except Exception:
        return v


# ---- formulas --------------------------------------------------------------


def lambda_upper(loja: LojaConstants, n: int, norm_f_bullet, m: int, d: int, f_min) -> Fraction:
    """Rational upper bound of c2 2^c1 (sqrt(n)||f||(m+1)d(d+1))^(c1+1) / (sqrt(2) f_min^c1)."""
    f_min = as_fraction(f_min)
    if f_min <= 0:
        raise DomainError("f_min must be positive")
    if d < 1:
        raise DomainError("the lambda formula needs d >= 1")
    c1, c2 = loja.c1, loja.c2
    A = as_fraction(norm_f_bullet) * (m + 1) * d * (d + 1)
    # c2 * A^(c1+1) * n^((c1+1)/2) * 2^(c1 - 1/2) / f_min^c1, each factor bounded upward
    up = c2
    up *= pow_bounds(A, c1 + 1)[1]
    up *= pow_bounds(Fraction(n), (c1 + 1) / 2)[1]
    up *= pow_bounds(Fraction(2), c1 - Fraction(1, 2))[1]
    up /= pow_bounds(f_min, c1)[0]
    return up


def compute_lambda(loja: LojaConstants, n: int, norm_f_bullet, m: int, d: int, f_min) -> Fraction:
    """The multiplier lambda, rounded up to an 8-bit-mantissa dyadic rational."""
    return round_up_dyadic(lambda_upper(loja, n, norm_f_bullet, m, d, f_min))


def compute_k(lam, s: int, f_min) -> int:
    """Smallest k >= 0 with 2k + 1 >= 4 lam s / f_min."""
    lam = as_fraction(lam)
    f_min = as_fraction(f_min)
    if lam <= 0 or s < 1 or f_min <= 0:
        raise DomainError("compute_k needs lam > 0, s >= 1, f_min > 0")
    return max(0, math.ceil((4 * lam * s / f_min - 1) / 2))


def compute_polya_N(m: int, ell: int, h_norm_bullet, f_min) -> int:
    """floor((m+1)(l+1)l(l-1)||h|| / f_min - l) + 1, clamped at 0."""
    f_min = as_fraction(f_min)
    if f_min <= 0:
        raise DomainError("f_min must be positive")
    value = Fraction((m + 1) * (ell + 1) * ell * (ell - 1)) * as_fraction(h_norm_bullet) / f_min
    return max(0, math.floor(value - ell) + 1)


def norm_transform_bound(norm_f_bullet, n: int, d: int) -> Fraction:
    """Upper bound for the mixed norm after X -> 2nX - 1: ||f|| (3n)^d."""
    if n < 1 or d < 0:
        raise DomainError("norm_transform_bound needs n >= 1, d >= 0")
    return as_fraction(norm_f_bullet) * (3 * n) ** d


def ratio_R(params: InstanceParams) -> Fraction:
    """||f|| (m+1) d (d+1) / f_min, the quantity all exponents are taken of."""
    return params.norm_f * (params.m + 1) * params.d * (params.d + 1) / params.f_min


def k_bound(params: InstanceParams, loja: LojaConstants) -> Fraction:
    """c4 R^(c1+1) with c4 = 2 c3 s + 1.

    c3 R^(c1+1) is lambda / f_min; using the rounded lambda here keeps the
    bound valid for the k that compute_k actually returns.
    """
    lam = compute_lambda(loja, params.n, params.norm_f, params.m, params.d, params.f_min)
    return 2 * params.s * lam / params.f_min + pow_bounds(ratio_R(params), loja.c1 + 1)[1]


def ell_bound(params: InstanceParams, loja: LojaConstants) -> Fraction:
    """c5 R^(c1+1) with c5 = (2 c4 + 1) max deg g_i, never below d."""
    c5_term = 2 * k_bound(params, loja) + pow_bounds(ratio_R(params), loja.c1 + 1)[1]
    return max(Fraction(params.d), c5_term * params.max_deg_g)


def h_norm_bound(params: InstanceParams, lam, k: int) -> Fraction:
    """||f|| + lam s 2^(m/2) max_i ((deg g_i + 1)(||g_i|| + 1))^(2k+1)."""
    return params.norm_f + as_fraction(lam) * params.s * 2 ** Fraction(params.m // 2) * (
        params.gen_growth ** (2 * k + 1)
    )


def n_plus_ell_bound(params: InstanceParams, ell: int, h_norm) -> Fraction:
    """(m+1)(l+1)l(l-1)||h|| / f_min + 1."""
    return Fraction((params.m + 1) * (ell + 1) * ell * (ell - 1)) * as_fraction(h_norm) / params.f_min + 1


def build_bound_report(
    params: InstanceParams,
    loja: LojaConstants | None,
    lam,
    k: int,
    ell: int,
    N: int,
    c9: int,
    h_norm=None,
    extras: dict | None = None,
) -> BoundReport:
    """Evaluate every explicit bound for the given (lam, k, ell, N, c9).

    ``h_norm`` is the actual mixed norm of h when known; otherwise the
    a-priori bound is used for the N + ell estimate.
    """
    lam = as_fraction(lam)
    hb = h_norm_bound(params, lam, k)
    if loja is not None and params.d >= 1:
        kb = k_bound(params, loja)
        eb = ell_bound(params, loja)
    else:
        kb = Fraction(k)
        eb = Fraction(max(params.d, (2 * k + 1) * params.max_deg_g))
    return BoundReport(
        lam=lam,
        k=k,
        ell=ell,
        N=N,
        k_bound=kb,
        ell_bound=eb,
        h_norm_bound=hb,
        n_plus_ell_bound=n_plus_ell_bound(params, ell, hb if h_norm is None else h_norm),
        term_bound_module=params.m + (2 * k + 1) * params.max_deg_g,
        term_bound_polya=params.m + N + ell + c9,
        c9=c9,
        extras=dict(extras or {}),
    )


# ---- auxiliary inequalities ---------------------------------------------------


def damped_power_bound_holds(t, k: int) -> bool:
    """t (t - 1)^(2k) <= 1/(2k+1) for t in [0, 1]."""
    t = as_fraction(t)
    return t * (t - 1) ** (2 * k) <= Fraction(1, 2 * k + 1)


def binomial_growth_bound_holds(j: int, d: int) -> bool:
    """2^j C(d+1, j+1) <= 3^d for 0 <= j <= d."""
    return 2**j * math.comb(d + 1, j + 1) <= 3**d


def damped_power_violations(ks: Iterable[int], ts: Iterable) -> list[tuple]:
    ts = list(ts)
    return [(t, k) for k in ks for t in ts if not damped_power_bound_holds(t, k)]


def binomial_growth_violations(d_max: int) -> list[tuple[int, int]]:
    return [(j, d) for d in range(d_max + 1) for j in range(d + 1) if not binomial_growth_bound_holds(j, d)]
