"""Putinar certificates for the corner monomials (1 - sum X)^v0 X^vbar.

Three sources: closed forms for n = 1 with affine generators, a JSON registry
file, and an experimental numeric search (SDP seed, exact rounding) that may
fail.  Every entry is verified exactly before it is accepted.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from pathlib import Path

from .errors import ParseError, RegistryError, UnsupportedGenerators
from .polyring import Poly, as_fraction, format_fraction, parse_poly, poly_sum
from .sos1d import SosPoly, _ldl

log = logging.getLogger(__name__)

FORMAT = "cylsos-registry/1"


def corner_monomial(v, n: int) -> Poly:
    """(1 - X1 - ... - Xn)^v0 * X1^v1 * ... * Xn^vn."""
    one_minus = Poly.const(1, n) - sum((Poly.x(i, n) for i in range(1, n + 1)), Poly.zero(n))
    p = one_minus ** v[0]
    for i in range(1, n + 1):
        if v[i]:
            p = p * Poly.x(i, n) ** v[i]
    return p


def corner_vectors(n: int):
    return [tuple(v) for v in product((0, 1), repeat=n + 1)]


def module_element(sigmas, gens, n: int) -> Poly:
    """sigma_0 + sum_i sigma_i g_i, expanded."""
    parts = [sigmas[0].expand()]
    parts += [s.expand() * g for s, g in zip(sigmas[1:], gens) if len(s)]
    return poly_sum(parts, n)


@dataclass(frozen=True)
class MonomialCert:
    v: tuple
    sigmas: tuple  # s + 1 SosPoly

    @property
    def n(self) -> int:
        return len(self.v) - 1

    def degree(self, gens) -> int:
        degs = [self.sigmas[0].degree()]
        degs += [s.degree() + g.degree() for s, g in zip(self.sigmas[1:], gens) if len(s)]
        return max(degs)


@dataclass(frozen=True)
class ArchimedeanWitness:
    bound: Fraction
    sigmas: tuple

    def target(self, n: int) -> Poly:
        return Poly.const(self.bound, n) - sum((Poly.x(i, n) ** 2 for i in range(1, n + 1)), Poly.zero(n))


def verify_entry(cert: MonomialCert, gens) -> bool:
    """Exact residual zero and strictly positive weights."""
    gens = list(gens)
    n = cert.n
    if len(cert.sigmas) != len(gens) + 1:
        return False
    if not all(s.weights_positive() for s in cert.sigmas):
        return False
    return module_element(cert.sigmas, gens, n) == corner_monomial(cert.v, n)


def verify_witness(w: ArchimedeanWitness, gens, n: int) -> bool:
    gens = list(gens)
    if w.bound <= 0 or len(w.sigmas) != len(gens) + 1:
        return False
    if not all(s.weights_positive() for s in w.sigmas):
        return False
    return module_element(w.sigmas, gens, n) == w.target(n)


@dataclass
class Registry:
    n: int
    generators: tuple
    entries: dict = field(default_factory=dict)
    archimedean: ArchimedeanWitness | None = None
    source: str = "builtin"

    def missing(self) -> list[tuple]:
        return [v for v in corner_vectors(self.n) if v not in self.entries]

    def require_complete(self) -> None:
        miss = self.missing()
        if miss:
            raise RegistryError(f"registry is missing corner vectors {miss}", missing=miss)

    def verify_all(self) -> None:
        for v, cert in self.entries.items():
            if not verify_entry(cert, self.generators):
                raise RegistryError(f"registry entry v={v} fails exact verification", offending=v)
        if self.archimedean is not None and not verify_witness(self.archimedean, self.generators, self.n):
            raise RegistryError("archimedean witness fails exact verification", offending="archimedean")

    def for_alpha(self, alpha) -> MonomialCert:
        return self.entries[tuple(a % 2 for a in alpha)]

    def to_json(self) -> dict:
        out = {
            "format": FORMAT,
            "source": self.source,
            "n": self.n,
            "generators": [str(g) for g in self.generators],
            "entries": [
                {"v": list(v), "sigmas": [s.to_records() for s in self.entries[v].sigmas]}
                for v in sorted(self.entries)
            ],
        }
        if self.archimedean is not None:
            out["archimedean"] = {
                "bound": format_fraction(self.archimedean.bound),
                "sigmas": [s.to_records() for s in self.archimedean.sigmas],
            }
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")


def c9(registry: Registry) -> int:
    """max deg(sigma_vi g_i) over all corners v and 0 <= i <= s, with g_0 = 1."""
    registry.require_complete()
    return max(cert.degree(registry.generators) for cert in registry.entries.values())


# ---- builtin closed forms -------------------------------------------------------------


def _affine_bounds(gens):
    """Tightest (b, c_lo, index) and (a, c_hi, index) with g = c_lo (X - b) or c_hi (a - X)."""
    lo = hi = None
    for idx, g in enumerate(gens):
        if g.degree() != 1:
            continue
        a1 = g.coefficient((0, 1, 0, 0))
        a0 = g.constant_term()
        if a1 > 0:
            b = -a0 / a1
            if lo is None or b > lo[0]:
                lo = (b, a1, idx)
        elif a1 < 0:
            a = a0 / -a1
            if hi is None or a < hi[0]:
                hi = (a, -a1, idx)
    return lo, hi


def builtin_certs_n1(gens) -> Registry:
    """Closed-form corner certificates for n = 1 and affine bounds b <= X <= a inside [0, 1]."""
    gens = tuple(gens)
    if not gens or any(g.n != 1 for g in gens):
        raise UnsupportedGenerators("builtin certificates cover n = 1 only")
    lo, hi = _affine_bounds(gens)
    if lo is None or hi is None:
        raise UnsupportedGenerators("need affine generators of the forms c(X - b) and c(a - X)")
    b, c_lo, i_lo = lo
    a, c_hi, i_hi = hi
    if not (0 <= b < a <= 1):
        raise UnsupportedGenerators(f"affine bounds [{b}, {a}] are not inside [0, 1]")
    n = 1
    s = len(gens)
    X = Poly.x(1, n)
    one = Poly.const(1, n)
    w = a - b

    def sigmas(sigma0=(), lo_terms=(), hi_terms=()):
        parts = [[] for _ in range(s + 1)]
        parts[0] = list(sigma0)
        parts[i_lo + 1] += list(lo_terms)
        parts[i_hi + 1] += list(hi_terms)
        return tuple(SosPoly(tuple((wt, q) for wt, q in p if wt != 0), n) for p in parts)

    entries = {
        (0, 0): MonomialCert((0, 0), sigmas([(Fraction(1), one)])),
        (0, 1): MonomialCert((0, 1), sigmas([(b, one)], [(1 / c_lo, one)])),
        (1, 0): MonomialCert((1, 0), sigmas([(1 - a, one)], (), [(1 / c_hi, one)])),
        (1, 1): MonomialCert(
            (1, 1),
            sigmas(
                [(b * (1 - a), one)],
                [(1 / (w * c_lo), a - X), ((1 - a) / c_lo, one)],
                [(1 / (w * c_hi), X - b), (b / c_hi, one)],
            ),
        ),
    }
    # N - X^2 = (X - b)(a - X) + (N + ab) - (a + b) X
    if a + b >= 0:
        bound = a * a
        arch = sigmas([], [(1 / (w * c_lo), a - X)], [(1 / (w * c_hi), X - b), ((a + b) / c_hi, one)])
    else:
        bound = b * b
        arch = sigmas([], [(1 / (w * c_lo), a - X), (-(a + b) / c_lo, one)], [(1 / (w * c_hi), X - b)])
    reg = Registry(n, gens, entries, ArchimedeanWitness(bound, arch), "builtin-n1")
    reg.verify_all()
    return reg


# ---- file loading ------------------------------------------------------------------------


def _sos_list(raw, n: int, expected: int, where: str):
    if not isinstance(raw, list) or len(raw) != expected:
        raise RegistryError(f"{where}: expected {expected} sigma lists")
    try:
        return tuple(SosPoly.from_records(r, n) for r in raw)
    except (KeyError, TypeError, ParseError) as exc:
        raise RegistryError(f"{where}: cannot parse sigma records ({exc})") from exc


def registry_from_json(data: dict, gens=None) -> Registry:
    if data.get("format") != FORMAT:
        raise RegistryError(f"unknown registry format {data.get('format')!r}")
    n = int(data["n"])
    file_gens = tuple(parse_poly(g, n) for g in data["generators"])
    if gens is not None and tuple(gens) != file_gens:
        raise RegistryError("registry generators differ from the problem generators")
    s = len(file_gens)
    entries = {}
    for rec in data.get("entries", []):
        v = tuple(int(x) for x in rec["v"])
        if len(v) != n + 1 or any(x not in (0, 1) for x in v):
            raise RegistryError(f"bad corner vector {v}")
        entries[v] = MonomialCert(v, _sos_list(rec["sigmas"], n, s + 1, f"entry v={v}"))
    arch = None
    if "archimedean" in data:
        a = data["archimedean"]
        arch = ArchimedeanWitness(as_fraction(a["bound"]), _sos_list(a["sigmas"], n, s + 1, "archimedean"))
    reg = Registry(n, file_gens, entries, arch, data.get("source", "file"))
    reg.verify_all()
    reg.require_complete()
    return reg


def load_registry(path, gens=None) -> Registry:
    """Read a registry file; every entry is re-verified and completeness enforced."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RegistryError(f"registry file is not valid JSON: {exc}") from exc
    return registry_from_json(data, gens)


# ---- experimental numeric fallback ---------------------------------------------------------


def _monomials(n: int, max_deg: int) -> list[tuple]:
    """Exponent tuples (of X1..Xn) of total degree <= max_deg, graded order."""
    out = []
    for deg in range(max_deg + 1):
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _mono_poly(e, n: int) -> Poly:
    return Poly({(0,) + tuple(e) + (0, 0): 1}, n)


def _gram_constraints(basis, n):
    cells: dict[tuple, list] = {}
    for a, ea in enumerate(basis):
        for b, eb in enumerate(basis):
            key = tuple(x + y for x, y in zip(ea, eb))
            cells.setdefault(key, []).append((a, b))
    return cells


def numeric_monomial_cert(v, gens, n: int, half_degree: int = 2, margin: float = 1e-3) -> MonomialCert | None:
    """Experimental: SDP seed for a corner certificate, rounded and certified exactly.

    Returns None when the SDP is infeasible or rounding fails to stay PSD.
    """
    import cvxpy as cp
    import numpy as np

    gens = list(gens)
    target = corner_monomial(v, n)
    D0 = max(half_degree, (target.degree() + 1) // 2)
    basis0 = _monomials(n, D0)
    bases = [basis0]
    for g in gens:
        Di = (2 * D0 + 1 - g.degree()) // 2
        bases.append(_monomials(n, Di) if Di >= 0 else [])
    grams = [cp.Variable((len(b), len(b)), symmetric=True) if b else None for b in bases]
    # coefficient of every monomial reached by any block
    exprs: dict[tuple, object] = {}

    def add(key, expr):
        exprs[key] = exprs.get(key, 0) + expr

    for key, cells in _gram_constraints(basis0, n).items():
        add(key, sum(grams[0][a, b] for a, b in cells))
    for i, g in enumerate(gens, start=1):
        if grams[i] is None:
            continue
        for key, cells in _gram_constraints(bases[i], n).items():
            for e, c in g.items():
                k2 = tuple(x + y for x, y in zip(key, e[1 : n + 1]))
                add(k2, float(c) * sum(grams[i][a, b] for a, b in cells))
    constraints = []
    for key, expr in exprs.items():
        rhs = float(target.coefficient((0,) + key + (0, 0)))
        constraints.append(expr == rhs)
    t = cp.Variable()
    for G in grams:
        if G is not None:
            constraints.append(G - t * np.eye(G.shape[0]) >> 0)
    constraints.append(t <= 1)
    prob = cp.Problem(cp.Maximize(t), constraints)
    try:
        prob.solve(solver=cp.CLARABEL)
    except Exception as exc:  # solver failures are a normal outcome here
        log.info("numeric fallback: solver failed (%s)", exc)
        return None
    if prob.status not in ("optimal", "optimal_inaccurate") or t.value is None or t.value <= 0:
        log.info("numeric fallback: status %s, margin %s", prob.status, t.value)
        return None
    denom = 2**24
    rounded = [_round_sym(G.value, denom) if G is not None else [] for G in grams]
    if not _project_joint(rounded, bases, gens, target, n):
        return None
    sigmas = []
    for Q, basis in zip(rounded, bases):
        if not basis:
            sigmas.append(SosPoly((), n))
            continue
        sos = _gram_to_sos(Q, basis, n)
        if sos is None:
            return None
        sigmas.append(sos)
    cert = MonomialCert(tuple(v), tuple(sigmas))
    return cert if verify_entry(cert, gens) else None


def _project_joint(grams, bases, gens, target: Poly, n: int) -> bool:
    """Least-norm exact correction of all Gram blocks onto the identity's affine space."""
    cols = []  # (block, a, b), a <= b
    rows: dict[tuple, dict[int, Fraction]] = {}
    for blk, basis in enumerate(bases):
        if not basis:
            continue
        mult = [((0,) * n, Fraction(1))] if blk == 0 else [(e[1 : n + 1], c) for e, c in gens[blk - 1].items()]
        for a in range(len(basis)):
            for b in range(a, len(basis)):
                col = len(cols)
                cols.append((blk, a, b))
                base = tuple(x + y for x, y in zip(basis[a], basis[b]))
                for ge, c in mult:
                    key = tuple(x + y for x, y in zip(base, ge))
                    row = rows.setdefault(key, {})
                    row[col] = row.get(col, 0) + c * (1 if a == b else 2)
    for e in target.terms:
        rows.setdefault(tuple(e[1 : n + 1]), {})
    keys = list(rows)
    x0 = [grams[blk][a][b] for blk, a, b in cols]
    resid = []
    for key in keys:
        want = target.coefficient((0,) + key + (0, 0))
        resid.append(want - sum(c * x0[j] for j, c in rows[key].items()))
    # (A A^T) y = resid
    size = len(keys)
    M = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        ri = rows[keys[i]]
        for j in range(i, size):
            rj = rows[keys[j]]
            small, big = (ri, rj) if len(ri) <= len(rj) else (rj, ri)
            val = sum(c * big[k] for k, c in small.items() if k in big)
            M[i][j] = M[j][i] = Fraction(val)
    y = _solve_consistent(M, resid)
    if y is None:
        return False
    for i, key in enumerate(keys):
        if y[i]:
            for j, c in rows[key].items():
                x0[j] += c * y[i]
    for (blk, a, b), val in zip(cols, x0):
        grams[blk][a][b] = grams[blk][b][a] = val
    return True


def _solve_consistent(M, rhs):
    """Gaussian elimination; free variables set to zero; None if inconsistent."""
    size = len(M)
    A = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    pivots = []
    r = 0
    for c in range(size):
        p = next((i for i in range(r, size) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(size):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [u - f * v for u, v in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    if any(A[i][size] != 0 for i in range(r, size)):
        return None
    y = [Fraction(0)] * size
    for i, c in enumerate(pivots):
        y[c] = A[i][size]
    return y


def _round_sym(M, denom: int):
    size = len(M)
    Q = [[Fraction(round(float(M[a][b]) * denom), denom) for b in range(size)] for a in range(size)]
    for a in range(size):
        for b in range(a + 1, size):
            Q[a][b] = Q[b][a] = (Q[a][b] + Q[b][a]) / 2
    return Q


def _gram_to_sos(Q, basis, n: int) -> SosPoly | None:
    res = _ldl(Q)
    if res is None:
        return None
    L, Dg = res
    monos = [_mono_poly(e, n) for e in basis]
    pairs = []
    for j, w in enumerate(Dg):
        if w == 0:
            continue
        q = Poly.zero(n)
        for i in range(j, len(basis)):
            if L[i][j]:
                q = q + monos[i] * L[i][j]
        pairs.append((w, q))
    return SosPoly(tuple(pairs), n)


def numeric_registry(gens, n: int, half_degree: int = 2) -> Registry:
    """Experimental: numeric fallback for every corner vector; raises if any fails."""
    gens = tuple(gens)
    entries = {}
    failed = []
    for v in corner_vectors(n):
        cert = None
        for hd in range(half_degree, half_degree + 3):
            cert = numeric_monomial_cert(v, gens, n, hd)
            if cert is not None:
                break
        if cert is None:
            failed.append(v)
        else:
            entries[v] = cert
    if failed:
        raise RegistryError(f"numeric fallback failed for corner vectors {failed}", missing=failed)
    return Registry(n, gens, entries, None, "numeric-experimental")


def resolve_registry(gens, n: int, path=None, allow_numeric: bool = False) -> Registry:
    """Builtin closed forms, then a registry file, then (optionally) the numeric fallback."""
    if path is not None:
        return load_registry(path, gens)
    try:
        return builtin_certs_n1(gens)
    except UnsupportedGenerators:
        if not allow_numeric:
            raise
    return numeric_registry(gens, n)
