"""Splice Polya data, univariate SOS and corner certificates into sigma_0, ..., sigma_s."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import DomainError, RegistryError
from .frames import ell_inverse_map, ell_map
from .polyring import Poly, affine_substitute, dehomogenize, format_fraction, parse_poly
from .registry import ArchimedeanWitness, Registry, module_element, verify_entry
from .sos1d import SosPoly, binomial_sos, sos_decompose_univariate

FORMAT = "cylsos-certificate/1"


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, Poly):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class Certificate:
    f: Poly
    generators: tuple
    sigmas: tuple
    meta: dict = field(default_factory=dict)
    degree_audit: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.f.n

    def residual(self) -> Poly:
        return self.f - module_element(self.sigmas, self.generators, self.n)

    def term_degrees(self) -> list[int]:
        degs = [self.sigmas[0].degree()]
        for s, g in zip(self.sigmas[1:], self.generators):
            degs.append(s.degree() + g.degree() if len(s) else -1)
        return degs

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "n": self.n,
            "f": str(self.f),
            "generators": [str(g) for g in self.generators],
            "sigmas": [s.to_records() for s in self.sigmas],
            "meta": _jsonable(self.meta),
            "degree_audit": _jsonable(self.degree_audit),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        if data.get("format") != FORMAT:
            raise DomainError(f"unknown certificate format {data.get('format')!r}")
        n = int(data["n"])
        return cls(
            f=parse_poly(data["f"], n),
            generators=tuple(parse_poly(g, n) for g in data["generators"]),
            sigmas=tuple(SosPoly.from_records(r, n) for r in data["sigmas"]),
            meta=dict(data.get("meta", {})),
            degree_audit=dict(data.get("degree_audit", {})),
        )

    @classmethod
    def load(cls, path) -> "Certificate":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def degree_bounds(m: int, k: int, N: int, ell: int, c9: int, gens) -> tuple[int, int]:
    """(m + (2k+1) max deg g, m + N + ell + c9)."""
    max_g = max((g.degree() for g in gens), default=0)
    return m + (2 * k + 1) * max_g, m + N + ell + c9


def make_audit(cert: Certificate, bounds: tuple[int, int] | None) -> dict:
    degs = cert.term_degrees()
    audit = {"term_degrees": degs, "max_term_degree": max(degs)}
    if bounds is not None:
        audit["term_bound_module"], audit["term_bound_polya"] = bounds
        audit["ok"] = max(degs) <= max(bounds)
    return audit


def _check(cert: Certificate, what: str) -> None:
    if not cert.residual().is_zero():
        raise ArithmeticError(f"{what}: assembled identity has a nonzero residual")
    if not all(s.weights_positive() for s in cert.sigmas):
        raise ArithmeticError(f"{what}: non-positive weight in a sigma")
    if cert.degree_audit.get("ok") is False:
        raise ArithmeticError(f"{what}: degree audit failed")


def assemble_proposition(f: Poly, gens, outcome, registry: Registry, meta: dict | None = None) -> Certificate:
    """Certificate for f over gens (simplex frame) from a successful Polya outcome."""
    gens = tuple(gens)
    n = f.n
    if not outcome.success:
        raise DomainError("Polya outcome is not successful")
    registry.require_complete()
    for v, cert in registry.entries.items():
        if not verify_entry(cert, registry.generators):
            raise RegistryError(f"registry entry v={v} fails exact verification", offending=v)
    if tuple(registry.generators) != gens:
        raise RegistryError("registry generators differ from the problem generators")
    m, k, lam = outcome.m, outcome.k_used, outcome.lambda_used
    s = len(gens)
    parts: list[list] = [[] for _ in range(s + 1)]

    circ = binomial_sos(m // 2, n).scale(lam)
    for i, g in enumerate(gens, start=1):
        parts[i].extend(circ.times_square((g - 1) ** k).terms)

    one_minus = Poly.const(1, n) - sum((Poly.x(i, n) for i in range(1, n + 1)), Poly.zero(n))
    for alpha in sorted(outcome.b_coeffs):
        b = outcome.b_coeffs[alpha]
        sos_b = sos_decompose_univariate(dehomogenize(b), index=n + 1, n=n)
        v = tuple(a % 2 for a in alpha)
        root = one_minus ** ((alpha[0] - v[0]) // 2)
        for i in range(1, n + 1):
            root = root * Poly.x(i, n) ** ((alpha[i] - v[i]) // 2)
        base = sos_b.times_square(root)
        for i, sv in enumerate(registry.entries[v].sigmas):
            if len(sv):
                parts[i].extend((base * sv).terms)

    sigmas = tuple(SosPoly(tuple(p), n).merged() for p in parts)
    c9 = max(c.degree(gens) for c in registry.entries.values())
    info = {
        "frame": "simplex",
        "route": "polya",
        "lambda": lam,
        "k": k,
        "N": outcome.N_used,
        "ell": outcome.ell,
        "m": m,
        "c9": c9,
        "registry": registry.source,
    }
    info.update(meta or {})
    cert = Certificate(f, gens, sigmas, info)
    cert.degree_audit = make_audit(cert, degree_bounds(m, k, outcome.N_used, outcome.ell, c9, gens))
    _check(cert, "assemble_proposition")
    return cert


def assemble_univariate(f: Poly, gens, meta: dict | None = None) -> Certificate:
    """f in Q[Y] strictly positive: sigma_0 = its SOS, the rest empty."""
    n = f.n
    if f.deg_x() > 0:
        raise DomainError("univariate route needs f free of X")
    sigma0 = sos_decompose_univariate(f, index=n + 1, n=n)
    sigmas = (sigma0,) + tuple(SosPoly((), n) for _ in gens)
    info = {"frame": "simplex", "route": "univariate", "m": max(f.deg_y(), 0)}
    info.update(meta or {})
    cert = Certificate(f, tuple(gens), sigmas, info)
    cert.degree_audit = make_audit(cert, None)
    _check(cert, "assemble_univariate")
    return cert


def _compose_sos(s: SosPoly, mapping) -> SosPoly:
    return SosPoly(tuple((w, affine_substitute(q, mapping)) for w, q in s.terms), s.n)


def lift_theorem(cert: Certificate, n: int | None = None, check: bool = True) -> Certificate:
    """Compose a simplex-frame certificate with ell to get one over the unit box.

    ``check=False`` skips the re-expansion; callers that verify the result
    anyway use it to avoid expanding twice.
    """
    n = cert.n if n is None else n
    if n != cert.n:
        raise DomainError("arity mismatch in lift")
    mapping = ell_map(n)
    lifted = Certificate(
        affine_substitute(cert.f, mapping),
        tuple(affine_substitute(g, mapping) for g in cert.generators),
        tuple(_compose_sos(s, mapping) for s in cert.sigmas),
        dict(cert.meta, frame="unit-box"),
    )
    audit = make_audit(lifted, None)
    for key in ("term_bound_module", "term_bound_polya"):
        if key in cert.degree_audit:
            audit[key] = cert.degree_audit[key]
    if "term_bound_module" in audit:
        audit["ok"] = audit["max_term_degree"] <= max(audit["term_bound_module"], audit["term_bound_polya"])
    lifted.degree_audit = audit
    if check:
        _check(lifted, "lift_theorem")
    return lifted


def archimedean_transfer(witness: ArchimedeanWitness, gens, n: int) -> tuple[ArchimedeanWitness, tuple]:
    """Box-frame witness N - sum X^2 in M(g) -> simplex-frame witness over g o ell^{-1}.

    New bound N/(2n^2) + 1/(2n); also returns the transformed generators.
    """
    inv = ell_inverse_map(n)
    c = Fraction(1, 2 * n * n)
    sigmas = [_compose_sos(s, inv).scale(c) for s in witness.sigmas]
    extra = tuple((Fraction(1, 4 * n * n), Poly.x(i, n) * (2 * n) - 2) for i in range(1, n + 1))
    sigmas[0] = SosPoly(sigmas[0].terms + extra, n)
    new_gens = tuple(affine_substitute(g, inv) for g in gens)
    return ArchimedeanWitness(witness.bound * c + Fraction(1, 2 * n), tuple(sigmas)), new_gens
