"""Problem files and the end-to-end certify / bounds orchestration."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from . import bounds, frames
from .assembler import Certificate, archimedean_transfer, assemble_proposition, assemble_univariate, lift_theorem
from .bounds import BoundReport, LojaConstants
from .errors import DomainError, HypothesisRejected, NotCertifiedError, ParseError, RegistryError
from .polya import Caps, PolyaOutcome, adaptive_certify_core, build_h, instance_params
from .polyring import Poly, as_fraction, format_fraction, infer_n, norm_bullet, parse_poly
from .region import SIMPLEX, UNIT_BOX, SemialgebraicSet, certified_min, check_fully_mic, estimate_loja
from .registry import ArchimedeanWitness, Registry, resolve_registry, verify_witness
from .sos1d import SosPoly, is_strictly_positive
from .verifier import VerificationReport, verify_certificate

log = logging.getLogger(__name__)

FRAMES = {"simplex": SIMPLEX, "unit-box": UNIT_BOX}
# exact h is only built for the bounds report when its X-degree stays small
EXACT_H_DEGREE_LIMIT = 64


@dataclass
class Problem:
    f: Poly
    generators: tuple
    frame: str = "unit-box"
    f_min: Fraction | None = None
    loja: LojaConstants | None = None
    registry: str | None = None
    caps: Caps = field(default_factory=Caps)
    grid_step: Fraction | None = None
    archimedean: ArchimedeanWitness | None = None
    numeric_registry: bool = False
    name: str = "problem"

    @property
    def n(self) -> int:
        return self.f.n

    def region(self) -> SemialgebraicSet:
        return SemialgebraicSet(self.generators, self.n, FRAMES[self.frame])

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "n": self.n,
            "frame": self.frame,
            "f": str(self.f),
            "generators": [str(g) for g in self.generators],
        }
        if self.f_min is not None:
            out["f_min"] = format_fraction(self.f_min)
        if self.loja is not None:
            out["loja"] = [format_fraction(self.loja.c1), format_fraction(self.loja.c2)]
        if self.registry is not None:
            out["registry"] = self.registry
        if self.grid_step is not None:
            out["grid_step"] = format_fraction(self.grid_step)
        if self.numeric_registry:
            out["numeric_registry"] = True
        if self.archimedean is not None:
            out["archimedean"] = {
                "bound": format_fraction(self.archimedean.bound),
                "sigmas": [s.to_records() for s in self.archimedean.sigmas],
            }
        defaults = Caps()
        caps = {
            k: (format_fraction(v) if isinstance(v, Fraction) else v)
            for k, v in vars(self.caps).items()
            if v != getattr(defaults, k)
        }
        if caps:
            out["caps"] = caps
        return out

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _text(value, what: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ParseError(f"{what} must be a polynomial string")
    if isinstance(value, float):
        raise ParseError(f"{what} must be exact; write rationals as p/q")
    return str(value)


def _rational(value, what: str) -> Fraction:
    if isinstance(value, float):
        raise ParseError(f"{what} must be exact; write rationals as p/q")
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"{what}: cannot read {value!r} as a rational") from exc


def problem_from_dict(data: dict, base_dir: Path | None = None) -> Problem:
    if not isinstance(data, dict):
        raise ParseError("problem file must be a mapping")
    for key in ("f", "generators"):
        if key not in data:
            raise ParseError(f"problem file lacks '{key}'")
    f_text = _text(data["f"], "f")
    gen_texts = [_text(g, "generator") for g in data["generators"]]
    n = int(data["n"]) if "n" in data else infer_n(f_text, *gen_texts)
    frame = data.get("frame", "unit-box")
    if frame not in FRAMES:
        raise ParseError(f"frame must be one of {sorted(FRAMES)}, got {frame!r}")
    loja = None
    if data.get("loja") is not None:
        c1, c2 = data["loja"]
        loja = LojaConstants(_rational(c1, "loja c1"), _rational(c2, "loja c2"), "user-supplied")
    caps_raw = dict(data.get("caps") or {})
    if "max_lambda" in caps_raw:
        caps_raw["max_lambda"] = _rational(caps_raw["max_lambda"], "max_lambda")
    caps = Caps(**caps_raw)
    registry = data.get("registry")
    if registry is not None and base_dir is not None and not Path(registry).is_absolute():
        registry = str(base_dir / registry)
    arch = None
    if data.get("archimedean") is not None:
        a = data["archimedean"]
        arch = ArchimedeanWitness(
            _rational(a["bound"], "archimedean bound"),
            tuple(SosPoly.from_records(r, n) for r in a["sigmas"]),
        )
    return Problem(
        f=parse_poly(f_text, n),
        generators=tuple(parse_poly(g, n) for g in gen_texts),
        frame=frame,
        f_min=None if data.get("f_min") is None else _rational(data["f_min"], "f_min"),
        loja=loja,
        registry=registry,
        caps=caps,
        grid_step=None if data.get("grid_step") is None else _rational(data["grid_step"], "grid_step"),
        archimedean=arch,
        numeric_registry=bool(data.get("numeric_registry", False)),
        name=str(data.get("name", "problem")),
    )


def load_problem(path) -> Problem:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse problem file {path}: {exc}") from exc
    prob = problem_from_dict(data, path.parent)
    if prob.name == "problem":
        prob.name = path.stem
    return prob


# ---- certify -----------------------------------------------------------------------------


@dataclass
class CertifyResult:
    problem: Problem
    certificate: Certificate
    report: BoundReport | None
    verification: VerificationReport
    simplex_f: Poly
    simplex_generators: tuple
    f_min: Fraction | None = None
    f_min_source: str = ""
    loja: LojaConstants | None = None
    outcome: PolyaOutcome | None = None
    fully_mic: object = None
    archimedean: str = ""
    timings: dict = field(default_factory=dict)


class VerificationFailed(Exception):
    def __init__(self, report: VerificationReport, certificate: Certificate):
        super().__init__("emitted certificate failed independent verification")
        self.report = report
        self.certificate = certificate


def _reject_fully_mic(res) -> None:
    if res.kind == "odd-degree":
        raise HypothesisRejected("odd-degree", f"deg_Y f = {res.m} is odd; f is not fully m-ic")
    if res.kind == "empty-grid":
        raise HypothesisRejected("empty-set", "no grid point of S was found; S looks empty")
    where = ", ".join(format_fraction(x) for x in res.witness)
    if res.kind == "vanishing-leading-coefficient":
        msg = f"not fully {res.m}-ic: the leading Y-coefficient vanishes at x = ({where})"
    else:
        msg = f"not fully {res.m}-ic: leading Y-coefficient not certified positive near x = ({where})"
    raise HypothesisRejected("not-fully-m-ic", msg, res.witness)


def _attest_archimedean(problem: Problem, sgens, registry: Registry | None) -> str:
    n = problem.n
    if problem.archimedean is not None:
        w = problem.archimedean
        if not verify_witness(w, problem.generators, n):
            raise HypothesisRejected("archimedean", "supplied archimedean witness does not verify")
        if problem.frame == "unit-box":
            w2, g2 = archimedean_transfer(w, problem.generators, n)
            if not verify_witness(w2, g2, n):
                raise ArithmeticError("transferred archimedean witness does not verify")
            return f"user witness N={format_fraction(w.bound)}, transferred N={format_fraction(w2.bound)}"
        return f"user witness N={format_fraction(w.bound)}"
    if registry is not None and registry.archimedean is not None:
        if not verify_witness(registry.archimedean, sgens, n):
            raise RegistryError("registry archimedean witness does not verify")
        return f"registry witness N={format_fraction(registry.archimedean.bound)}"
    if registry is not None:
        return "implied by corner certificates for X_i and 1 - sum X_i"
    return "not attested"


def _region_options(problem: Problem) -> dict:
    return {} if problem.grid_step is None else {"x_step": problem.grid_step}


def certify(problem: Problem) -> CertifyResult:
    """Run the whole pipeline; raises HypothesisRejected, InfeasibleBudgetError, VerificationFailed."""
    t0 = time.perf_counter()
    timings = {}
    n = problem.n
    f, gens = problem.f, problem.generators
    if not gens:
        raise DomainError("at least one generator is required")
    for g in gens:
        if g.n != n:
            raise DomainError("generators and f have different dimensions")
    region = problem.region()
    sregion = region.in_simplex_frame()
    boxed = problem.frame == "unit-box"
    sf = frames.to_simplex_frame(f) if boxed else f
    sgens = sregion.generators

    fm = check_fully_mic(f, region, **_region_options(problem))
    timings["fully_mic"] = time.perf_counter() - t0
    if not fm.ok:
        _reject_fully_mic(fm)

    if f.deg_x() <= 0:
        if not is_strictly_positive(f):
            raise NotCertifiedError("f lies in Q[Y] but is not strictly positive")
        cert = assemble_univariate(f, gens, {"frame": problem.frame, "archimedean": "not needed"})
        rep = verify_certificate(f, gens, cert)
        if not rep.ok:
            raise VerificationFailed(rep, cert)
        timings["total"] = time.perf_counter() - t0
        return CertifyResult(problem, cert, None, rep, sf, sgens, fully_mic=fm, timings=timings,
                             archimedean="not needed")

    opts = _region_options(problem)
    if problem.f_min is not None:
        f_min, f_min_source = problem.f_min, "user-supplied"
        if f_min <= 0:
            raise DomainError("f_min must be positive")
    else:
        cm = certified_min(sf, sregion, **opts)
        f_min, f_min_source = cm.lower_bound, f"certified-{cm.method}"
    _check_f_min(sf, f_min)
    timings["f_min"] = time.perf_counter() - t0

    loja = problem.loja or estimate_loja(sregion, **({"grid_step": problem.grid_step} if problem.grid_step else {}))
    timings["loja"] = time.perf_counter() - t0

    registry = resolve_registry(sgens, n, problem.registry, problem.numeric_registry)
    arch = _attest_archimedean(problem, sgens, registry)

    outcome = adaptive_certify_core(sf, sgens, f_min, loja, problem.caps)
    timings["polya"] = time.perf_counter() - t0

    meta = {
        "f_min": f_min,
        "f_min_source": f_min_source,
        "loja": [loja.c1, loja.c2],
        "loja_provenance": loja.provenance,
        "archimedean": arch,
        "trace": outcome.trace,
    }
    scert = assemble_proposition(sf, sgens, outcome, registry, meta)
    cert = lift_theorem(scert, check=False) if boxed else scert
    timings["assemble"] = time.perf_counter() - t0
    rep = verify_certificate(f, gens, cert)
    if not rep.ok:
        raise VerificationFailed(rep, cert)
    timings["verify"] = time.perf_counter() - t0

    params = instance_params(sf, sgens, f_min)
    lam_formula, k_formula = _formula_lambda_k(params, loja)
    extras = {
        "route": "polya",
        "frame": problem.frame,
        "f_min": f_min,
        "f_min_source": f_min_source,
        "loja_c1": loja.c1,
        "loja_c2": loja.c2,
        "loja_provenance": loja.provenance,
        "lambda_formula": lam_formula,
        "k_formula": k_formula,
        "h_norm": norm_bullet(outcome.h),
        "max_term_degree": rep.max_term_degree,
        "residual_zero": rep.identity_ok,
        "certificate_terms": sum(len(s) for s in cert.sigmas),
        "registry": registry.source,
    }
    report = bounds.build_bound_report(
        params, loja, outcome.lambda_used, outcome.k_used, outcome.ell, outcome.N_used,
        scert.meta["c9"], h_norm=norm_bullet(outcome.h), extras=extras,
    )
    timings["total"] = time.perf_counter() - t0
    return CertifyResult(problem, cert, report, rep, sf, sgens, f_min, f_min_source, loja, outcome, fm,
                         arch, timings)


def _check_f_min(sf: Poly, f_min: Fraction) -> None:
    # |f_bar| <= ||f|| (m+1)(d+1) on simplex x circle, so a larger "minimum" is impossible
    ceiling = norm_bullet(sf) * (max(sf.deg_y(), 0) + 1) * (max(sf.deg_x(), 0) + 1)
    if f_min > ceiling:
        raise DomainError(f"f_min = {format_fraction(f_min)} exceeds the a-priori ceiling {format_fraction(ceiling)}")


def _formula_lambda_k(params, loja):
    if params.d < 1:
        return None, None
    lam = bounds.compute_lambda(loja, params.n, params.norm_f, params.m, params.d, params.f_min)
    return lam, bounds.compute_k(lam, params.s, params.f_min)


# ---- bounds ------------------------------------------------------------------------------


def bound_report(problem: Problem) -> BoundReport | dict:
    """Formula constants (lambda, k, ell, N and the explicit bounds) without running Polya.

    For f in Q[Y] returns a dict describing the direct univariate route.
    """
    f, n = problem.f, problem.n
    region = problem.region()
    fm = check_fully_mic(f, region, **_region_options(problem))
    if not fm.ok:
        _reject_fully_mic(fm)
    if f.deg_x() <= 0:
        return {"route": "univariate", "reason": "f has no X; sigma_0 is a univariate SOS of f"}
    sregion = region.in_simplex_frame()
    sf = frames.to_simplex_frame(f) if problem.frame == "unit-box" else f
    sgens = sregion.generators
    if problem.f_min is not None:
        f_min, src = problem.f_min, "user-supplied"
    else:
        cm = certified_min(sf, sregion, **_region_options(problem))
        f_min, src = cm.lower_bound, f"certified-{cm.method}"
    _check_f_min(sf, f_min)
    loja = problem.loja or estimate_loja(sregion, **({"grid_step": problem.grid_step} if problem.grid_step else {}))
    params = instance_params(sf, sgens, f_min)
    lam, k = _formula_lambda_k(params, loja)
    ell = max(params.d, (2 * k + 1) * params.max_deg_g)
    if ell <= EXACT_H_DEGREE_LIMIT:
        h = build_h(sf, sgens, lam, k)
        ell = max(h.deg_x(), 0)
        h_norm, h_src = norm_bullet(h), "exact"
    else:
        h_norm, h_src = bounds.h_norm_bound(params, lam, k), "a-priori-bound"
    N = bounds.compute_polya_N(params.m, ell, h_norm, f_min)
    c9 = None
    try:
        reg = resolve_registry(sgens, n, problem.registry, problem.numeric_registry)
        c9 = max(c.degree(reg.generators) for c in reg.entries.values())
    except Exception as exc:  # no registry: report without c9
        log.info("bounds: registry unavailable (%s)", exc)
    extras = {
        "route": "polya",
        "frame": problem.frame,
        "f_min": f_min,
        "f_min_source": src,
        "loja_c1": loja.c1,
        "loja_c2": loja.c2,
        "loja_provenance": loja.provenance,
        "h_norm": h_norm,
        "h_norm_source": h_src,
        "norm_f_simplex": params.norm_f,
        "norm_f_original": norm_bullet(f),
        "norm_transform_bound": bounds.norm_transform_bound(norm_bullet(f), n, params.d)
        if problem.frame == "unit-box" else params.norm_f,
        "c9_known": c9 is not None,
    }
    return bounds.build_bound_report(params, loja, lam, k, ell, N, c9 or 0, h_norm=h_norm, extras=extras)
