"""cylsos command line: certify, verify, bounds, demo.

Exit codes: 0 ok, 1 parse/input error, 2 hypothesis rejected,
3 schedule budget exhausted, 4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import demos
from .assembler import Certificate
from .bounds import BoundReport, LojaConstants
from .errors import (
    DomainError,
    HypothesisRejected,
    InfeasibleBudgetError,
    ParseError,
    RegistryError,
    UnsupportedGenerators,
)
from .pipeline import Problem, VerificationFailed, bound_report, certify, load_problem
from .polya import PolyaExpansion
from .polyring import format_fraction, infer_n, parse_fraction, parse_poly
from .verifier import verify_certificate

EXIT_OK, EXIT_PARSE, EXIT_REJECTED, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3, 4

log = logging.getLogger("cylsos")


def _rational(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational p/q: {text!r}") from exc


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f-min", type=_rational, help="lower bound for f on S x circle (p/q)")
    p.add_argument("--loja", nargs=2, type=_rational, metavar=("C1", "C2"), help="Lojasiewicz constants")
    p.add_argument("--registry", help="corner-certificate registry file (JSON)")
    p.add_argument("--numeric-registry", action="store_true", help="allow the experimental numeric registry")
    p.add_argument("--max-N", dest="max_N", type=int)
    p.add_argument("--max-k", dest="max_k", type=int)
    p.add_argument("--max-lambda", dest="max_lambda", type=_rational)
    p.add_argument("--term-budget", dest="term_budget", type=int)
    p.add_argument("--grid-step", type=_rational)
    p.add_argument("-o", "--out", help="output directory (default cylsos-out/<name>)")
    p.add_argument("--no-figures", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cylsos", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="build and verify a certificate for a problem file")
    p.add_argument("problem")
    _add_schedule_flags(p)

    p = sub.add_parser("bounds", help="print the explicit constants without running Polya")
    p.add_argument("problem")
    _add_schedule_flags(p)

    p = sub.add_parser("verify", help="check a certificate file against f and generators")
    p.add_argument("f", help="file holding f")
    p.add_argument("gens", help="file holding one generator per line")
    p.add_argument("cert", help="certificate JSON")

    p = sub.add_parser("demo", help="run a built-in instance")
    p.add_argument("name", choices=demos.NAMES)
    p.add_argument("-o", "--out")
    p.add_argument("--no-figures", action="store_true")
    return parser


def _apply_flags(problem: Problem, args) -> Problem:
    caps = problem.caps
    updates = {k: getattr(args, k) for k in ("max_N", "max_k", "max_lambda", "term_budget") if getattr(args, k) is not None}
    if updates:
        caps = dataclasses.replace(caps, **updates)
    return dataclasses.replace(
        problem,
        f_min=args.f_min if args.f_min is not None else problem.f_min,
        loja=LojaConstants(*args.loja, "user-supplied") if args.loja else problem.loja,
        registry=args.registry or problem.registry,
        numeric_registry=args.numeric_registry or problem.numeric_registry,
        grid_step=args.grid_step or problem.grid_step,
        caps=caps,
    )


def _outdir(args, name: str) -> Path:
    out = Path(args.out) if getattr(args, "out", None) else Path("cylsos-out") / name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_block(title: str, text: str) -> None:
    print(f"# {title}")
    sys.stdout.write(text)
    print("# end")


def _run_certify(problem: Problem, args) -> int:
    out = _outdir(args, problem.name)
    try:
        result = certify(problem)
    except InfeasibleBudgetError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        if exc.report is not None:
            _print_block("formula report", exc.report.to_text())
        for t in exc.trace or []:
            print(f"trace: {json.dumps({k: str(v) for k, v in t.items()})}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationFailed as exc:
        print(f"verification failed:\n{exc.report.to_text()}", file=sys.stderr)
        exc.certificate.save(out / "certificate.rejected.json")
        return EXIT_VERIFY
    cert_path = out / "certificate.json"
    result.certificate.save(cert_path)
    (out / "problem.yaml").write_text(problem.dumps(), encoding="utf-8")
    if result.report is not None:
        text = result.report.to_text()
    else:
        text = f"route={result.certificate.meta.get('route')}\nresidual_zero={str(result.verification.identity_ok).lower()}\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    _print_block(f"certify {problem.name}", text)
    print(f"certificate: {cert_path}")
    print(f"verification: residual {'0' if result.verification.identity_ok else 'nonzero'}, "
          f"max term degree {result.verification.max_term_degree}")
    print("timings: " + ", ".join(f"{k}={v:.3f}s" for k, v in result.timings.items()))
    if not args.no_figures:
        from .plotting import certify_figures

        for path in certify_figures(result, out):
            print(f"figure: {path}")
    return EXIT_OK


def cmd_certify(args) -> int:
    return _run_certify(_apply_flags(load_problem(args.problem), args), args)


def cmd_bounds(args) -> int:
    problem = _apply_flags(load_problem(args.problem), args)
    report = bound_report(problem)
    out = _outdir(args, problem.name)
    if isinstance(report, dict):
        text = "".join(f"{k}={v}\n" for k, v in report.items())
    else:
        text = report.to_text()
    (out / "report.txt").write_text(text, encoding="utf-8")
    _print_block(f"bounds {problem.name}", text)
    if isinstance(report, BoundReport) and not args.no_figures:
        from .plotting import plot_bounds

        print(f"figure: {plot_bounds(report, out / 'bounds.png')}")
    return EXIT_OK


def _read_gens(path: str):
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    return [ln for ln in lines if ln and not ln.startswith("#")]


def cmd_verify(args) -> int:
    data = json.loads(Path(args.cert).read_text(encoding="utf-8"))
    f_text = Path(args.f).read_text(encoding="utf-8").strip()
    gen_texts = _read_gens(args.gens)
    n = int(data["n"]) if "n" in data else infer_n(f_text, *gen_texts)
    f = parse_poly(f_text, n)
    gens = [parse_poly(g, n) for g in gen_texts]
    report = verify_certificate(f, gens, data)
    _print_block("verify", report.to_text())
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_demo(args) -> int:
    name = args.name
    if name in ("desk", "counterexample"):
        problem = demos.desk_problem() if name == "desk" else demos.counterexample_problem()
        return _run_certify(problem, args)
    out = _outdir(args, name)
    if name == "archimedean":
        cert = demos.archimedean_certificate()
        cert.save(out / "certificate.json")
        (out / "f.txt").write_text(f"{cert.f}\n", encoding="utf-8")
        (out / "gens.txt").write_text("".join(f"{g}\n" for g in cert.generators), encoding="utf-8")
        report = verify_certificate(cert.f, cert.generators, cert)
        _print_block("verify archimedean identity", report.to_text())
        print(f"certificate: {out / 'certificate.json'}")
        return EXIT_OK if report.ok else EXIT_VERIFY
    H, exp, checked = demos.polya_minimal()
    lines = [f"H={H}"]
    probe = PolyaExpansion(H)
    for N in range(0, (exp.N if exp else 0) + 1):
        row = {a: format_fraction(Fraction(v[0], probe.scale)) for a, v in sorted(probe.coeffs.items(), reverse=True)}
        lines.append(f"N={N} coefficients=" + ",".join(row.values()) + f" positive={str(probe.ends_positive()).lower()}")
        probe.step()
    lines.append(f"minimal_N={exp.N if exp else 'none'}")
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    _print_block("polya-minimal", text)
    return EXIT_OK


def _fmt_point(p) -> str:
    if isinstance(p, (tuple, list)):
        return "(" + ", ".join(_fmt_point(x) for x in p) + ")"
    try:
        return format_fraction(Fraction(p))
    except (TypeError, ValueError):
        return str(p)


COMMANDS = {"certify": cmd_certify, "bounds": cmd_bounds, "verify": cmd_verify, "demo": cmd_demo}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except HypothesisRejected as exc:
        witness = "" if exc.witness is None else f" witness={_fmt_point(exc.witness)}"
        print(f"rejected [{exc.kind}]: {exc}{witness}", file=sys.stderr)
        return EXIT_REJECTED
    except (RegistryError, UnsupportedGenerators) as exc:
        print(f"rejected [registry]: {exc}; supply a registry file with --registry", file=sys.stderr)
        return EXIT_REJECTED
    except InfeasibleBudgetError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DomainError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
