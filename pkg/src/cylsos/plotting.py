"""Figures for certify / bounds reports (matplotlib, Agg backend, files only)."""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .polyring import Poly, homogenize_Y  # noqa: E402

STATUS_COLORS = {"ok": "tab:green", "h-not-positive": "tab:red", "polya-cap": "tab:orange"}


def _log2(x) -> float:
    x = Fraction(x)
    if x <= 0:
        return float("nan")
    return math.log2(x.numerator) - math.log2(x.denominator)


def _circle_min_1d(f_bar: Poly, xs: np.ndarray, n_angles: int = 181) -> np.ndarray:
    """min over the unit circle of f_bar(x, cos t, sin t), for n = 1 (float, plotting only)."""
    yi, zi = f_bar.n + 1, f_bar.n + 2
    theta = np.linspace(0, np.pi, n_angles)
    y, z = np.cos(theta), np.sin(theta)
    vals = np.zeros((len(xs), n_angles))
    for e, c in f_bar.items():
        vals += float(c) * np.outer(xs ** e[1], y ** e[yi] * z ** e[zi])
    return vals.min(axis=1)


def _generators_ok(gens, xs: np.ndarray) -> np.ndarray:
    ok = np.ones_like(xs, dtype=bool)
    for g in gens:
        v = np.zeros_like(xs)
        for e, c in g.items():
            v += float(c) * xs ** e[1]
        ok &= v >= 0
    return ok


def plot_landscape(result, path) -> Path | None:
    """Minimum over the circle of the homogenized f along the simplex frame (n = 1 only)."""
    f = result.simplex_f
    if f.n != 1:
        return None
    m = max(f.deg_y(), 0)
    f_bar = homogenize_Y(f, m)
    xs = np.linspace(0, 1, 401)
    mins = _circle_min_1d(f_bar, xs)
    inside = _generators_ok(result.simplex_generators, xs)
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(xs, mins, color="tab:blue", label="min over circle")
    ax.fill_between(xs, mins.min(), mins.max(), where=inside, color="tab:blue", alpha=0.12, label="S")
    if result.f_min is not None:
        ax.axhline(float(result.f_min), color="tab:red", ls="--", label=f"f_min = {result.f_min}")
    ax.set_xlabel("x (simplex frame)")
    ax.set_ylabel("value")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"{result.problem.name}: homogenized f on S x circle")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_schedule(trace, path) -> Path | None:
    """One marker per (lambda, k) attempt; height is N found or the cap tried."""
    if not trace:
        return None
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for i, t in enumerate(trace):
        status = t.get("status", "?")
        height = t.get("N", t.get("N_cap", 0)) or 0
        shown = height if height else 0.3  # failed attempts still get a visible stub
        ax.bar(i, shown, color=STATUS_COLORS.get(status, "grey"))
        ax.annotate(f"l={t['lambda']}\nk={t['k']}", (i, shown), ha="center", va="bottom", fontsize=7)
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in STATUS_COLORS.values()]
    ax.legend(handles, list(STATUS_COLORS), fontsize=8, loc="upper left")
    heights = [t.get("N", t.get("N_cap", 0)) or 0 for t in trace]
    ax.set_xticks(range(len(trace)))
    ax.set_xlabel("attempt")
    ax.set_ylabel("Polya N (found or cap)")
    if max(heights) > 64:
        ax.set_yscale("symlog")
    ax.set_ylim(0, max(max(heights), 1) * 1.35)
    ax.set_title("adaptive schedule")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_polya_coefficients(outcome, path) -> Path | None:
    """Smallest value on the circle of each b_alpha (float estimate), sorted by alpha."""
    if outcome is None or not outcome.b_coeffs:
        return None
    theta = np.linspace(0, np.pi, 361)
    y, z = np.cos(theta), np.sin(theta)
    keys = sorted(outcome.b_coeffs)
    mins = []
    for alpha in keys:
        b = outcome.b_coeffs[alpha]
        yi, zi = b.n + 1, b.n + 2
        v = np.zeros_like(theta)
        for e, c in b.items():
            v += float(c) * y ** e[yi] * z ** e[zi]
        mins.append(v.min())
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(range(len(keys)), mins, "o-", ms=3)
    ax.set_yscale("log")
    ax.set_xlabel("alpha (lexicographic index)")
    ax.set_ylabel("min of b_alpha on circle")
    ax.set_title(f"Polya coefficients at N = {outcome.N_used}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_bounds(report, path) -> Path:
    """log2 of the schedule values next to the explicit bounds."""
    pairs = [
        ("k", report.k, report.k_bound),
        ("ell", report.ell, report.ell_bound),
        ("N + ell", report.N + report.ell, report.n_plus_ell_bound),
    ]
    if "max_term_degree" in report.extras:
        pairs.append(("term degree", report.extras["max_term_degree"],
                      max(report.term_bound_module, report.term_bound_polya)))
    labels = [p[0] for p in pairs]
    used = [_log2(max(p[1], 1)) for p in pairs]
    bound = [_log2(max(p[2], 1)) for p in pairs]
    x = np.arange(len(pairs))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(x - 0.2, used, 0.4, label="used")
    ax.bar(x + 0.2, bound, 0.4, label="explicit bound")
    ax.set_xticks(x, labels)
    ax.set_ylabel("log2")
    ax.set_title(f"lambda = {report.lam}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def certify_figures(result, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    made = [
        plot_landscape(result, outdir / "landscape.png"),
        plot_schedule(result.outcome.trace if result.outcome else [], outdir / "schedule.png"),
        plot_polya_coefficients(result.outcome, outdir / "polya_coefficients.png"),
    ]
    if result.report is not None:
        made.append(plot_bounds(result.report, outdir / "bounds.png"))
    return [p for p in made if p is not None]
