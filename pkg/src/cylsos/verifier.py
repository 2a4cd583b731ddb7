"""Independent exact checker for certificates f = sigma_0 + sum sigma_i g_i.

Only the polynomial ring is shared with the rest of the package.  Sigmas are
read as sequences of (weight, root) pairs from any object exposing
``.terms`` or from the JSON records ``{"weight": ..., "poly": ...}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .polyring import Poly, as_fraction, evaluate, parse_poly, poly_sum


@dataclass
class VerificationReport:
    identity_ok: bool
    sos_ok: bool
    degree_ok: bool
    residual: Poly | None
    max_term_degree: int
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.sos_ok and self.degree_ok

    def to_text(self) -> str:
        lines = [
            f"identity_ok={str(self.identity_ok).lower()}",
            f"sos_ok={str(self.sos_ok).lower()}",
            f"degree_ok={str(self.degree_ok).lower()}",
            f"max_term_degree={self.max_term_degree}",
            f"residual={self.residual if self.residual is not None else 'not computed'}",
        ]
        lines += [f"note={n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _pairs(sigma, n: int):
    if hasattr(sigma, "terms"):
        return [(as_fraction(w), q) for w, q in sigma.terms]
    return [(as_fraction(r["weight"]), parse_poly(r["poly"], n)) for r in sigma]


def _expand(pairs, n: int) -> Poly:
    return poly_sum((q * q * w for w, q in pairs), n)


def verify_sos(sigma, n: int | None = None) -> bool:
    """Structural membership in the SOS cone: every weight strictly positive."""
    if hasattr(sigma, "terms"):
        return all(as_fraction(w) > 0 for w, _ in sigma.terms)
    return all(as_fraction(r["weight"]) > 0 for r in sigma)


def _spot_check(f, gens, sig_pairs, n, points: int, rng) -> bool:
    for _ in range(points):
        pt = [Fraction(rng.randint(-50, 50), rng.randint(1, 20)) for _ in range(n + 3)]
        pt[0] = Fraction(0)
        rhs = sum((w * evaluate(q, pt) ** 2 for w, q in sig_pairs[0]), Fraction(0))
        for pairs, g in zip(sig_pairs[1:], gens):
            if pairs:
                rhs += sum((w * evaluate(q, pt) ** 2 for w, q in pairs), Fraction(0)) * evaluate(g, pt)
        if rhs != evaluate(f, pt):
            return False
    return True


def _meta_int(meta, key):
    v = meta.get(key)
    if v is None:
        return None
    return int(as_fraction(v))


def verify_certificate(f: Poly, gens, cert, spot_points: int = 3, fast_fail: bool = False, seed: int = 0) -> VerificationReport:
    """Exact identity, SOS structure and degree bounds of ``cert`` for f over gens."""
    gens = list(gens)
    n = f.n
    notes = []
    if isinstance(cert, dict):
        sigmas, meta = cert["sigmas"], cert.get("meta", {})
    else:
        sigmas, meta = cert.sigmas, getattr(cert, "meta", {}) or {}
    if len(sigmas) != len(gens) + 1:
        notes.append(f"expected {len(gens) + 1} sigmas, found {len(sigmas)}")
        return VerificationReport(False, False, False, None, -1, notes)
    sig_pairs = [_pairs(s, n) for s in sigmas]
    sos_ok = all(w > 0 for pairs in sig_pairs for w, _ in pairs)
    if not sos_ok:
        notes.append("a sigma carries a non-positive weight")

    if spot_points and not _spot_check(f, gens, sig_pairs, n, spot_points, random.Random(seed)):
        notes.append("random-point pre-pass found a mismatch")
        if fast_fail:
            return VerificationReport(False, sos_ok, False, None, -1, notes)

    expanded = [_expand(p, n) for p in sig_pairs]
    rhs = expanded[0]
    degs = [expanded[0].degree() if not expanded[0].is_zero() else -1]
    for e, g in zip(expanded[1:], gens):
        term = e * g
        rhs = rhs + term
        degs.append(term.degree() if not term.is_zero() else -1)
    residual = f - rhs
    identity_ok = residual.is_zero()
    if not identity_ok:
        notes.append("identity residual is nonzero")
    max_deg = max(degs)

    params = {k: _meta_int(meta, k) for k in ("m", "k", "N", "ell", "c9")}
    if all(v is not None for v in params.values()):
        max_g = max((g.degree() for g in gens), default=0)
        bound = max(
            params["m"] + (2 * params["k"] + 1) * max_g,
            params["m"] + params["N"] + params["ell"] + params["c9"],
        )
        degree_ok = max_deg <= bound
        if not degree_ok:
            notes.append(f"max term degree {max_deg} exceeds recorded bound {bound}")
    else:
        degree_ok = True
        notes.append("no degree bounds recorded; degree audit skipped")
    return VerificationReport(identity_ok, sos_ok, degree_ok, residual, max_deg, notes)
