"""Machine-readable verification bundle behind the ``report`` command."""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .figures import figure2_data, verify_figure1
from .model import RadialParameters
from .oracle import GridSpec, fd_spectrum, ode_residual
from .physics import Scenario1Params, Scenario2Params, frequency_scan
from .polynomial import RationalPolynomial, count_real_roots
from .recurrence import (
    _univariate_in_a,
    assemble_polynomial_solution,
    build_truncation_polynomial,
)
from .variational import DEFAULT_BASIS_SIZE, eigenvalues, hellmann_feynman_check, solve

SEED = 20201


def reference_truncation_polynomial(n: int) -> RationalPolynomial:
    """Integer-coefficient conditions for n = 0..3, written out term by term."""
    V = ("a", "b", "s")
    a, b, s = (RationalPolynomial.variable(V, v) for v in V)
    if n == 0:
        return 2 * a + b * (2 * s + 1)
    if n == 1:
        return (4 * a * a + 8 * a * b * (s + 1) + b * b * (2 * s + 1) * (2 * s + 3)
                - 8 * (2 * s + 1))
    if n == 2:
        return (8 * a * a * a + 12 * a * a * b * (2 * s + 3)
                + 2 * a * b * b * (12 * s * s + 36 * s + 23) - 32 * a * (4 * s + 3)
                + b * b * b * (2 * s + 1) * (2 * s + 3) * (2 * s + 5)
                - 16 * b * (2 * s + 1) * (4 * s + 7))
    if n == 3:
        return (16 * a**4 + 64 * a**3 * b * (s + 2) + 8 * a * a * b * b * (12 * s * s + 48 * s + 43)
                - 640 * a * a * (s + 1) + 16 * a * b**3 * (4 * s**3 + 24 * s * s + 43 * s + 22)
                - 128 * a * b * (10 * s * s + 30 * s + 17)
                + b**4 * (2 * s + 1) * (2 * s + 3) * (2 * s + 5) * (2 * s + 7)
                - 32 * b * b * (2 * s + 1) * (10 * s * s + 45 * s + 47)
                + 576 * (2 * s + 1) * (2 * s + 3))
    raise ValueError("reference forms exist for n = 0..3 only")


def check_polynomials():
    rows = []
    for n in range(4):
        ours = build_truncation_polynomial(n)
        rows.append({"n": n, "identical": ours == reference_truncation_polynomial(n),
                     "terms": len(ours.terms)})
    return {"passed": all(r["identical"] for r in rows), "cases": rows}


def check_real_roots(n_max=10, s_values=(0, Fraction(1, 2), 1, 2), b_values=(-4, -1, 0, 1, 4)):
    bad = []
    total = 0
    for n in range(n_max + 1):
        for s in s_values:
            for b in b_values:
                total += 1
                count = count_real_roots(_univariate_in_a(n, s, b))
                if count != n + 1:
                    bad.append({"n": n, "s": float(s), "b": b, "count": count})
    return {"passed": not bad, "cases": total, "failures": bad}


def check_figure1():
    check = verify_figure1(3, 0.0, np.linspace(-4, 4, 161))
    expected = [-6.090, -1.706, 1.706, 6.090]
    ok_zero = check.roots_at_zero is not None and all(
        abs(r - e) <= 1e-3 for r, e in zip(check.roots_at_zero, expected))
    return {"passed": check.passed and ok_zero, "branches": check.table.branches.shape[1],
            "max_jump_ratio": check.max_jump_ratio, "roots_at_b0": check.roots_at_zero,
            "crossings": check.table.crossings}


def check_figure2(N=DEFAULT_BASIS_SIZE):
    data = figure2_data(0.0, 1.0, 8, N=N)
    return {"passed": data.passed, "max_defect": data.max_defect, "line_W": data.line_W,
            "line_defects": [p.defect for p in data.line_points],
            "crossings": len(data.crossings), "unmatched": len(data.unmatched_crossings),
            "window": list(data.window), "basis_size": N}


def check_oscillator():
    w = eigenvalues(RadialParameters(0.0), DEFAULT_BASIS_SIZE)
    ritz_err = max(abs(w[j] - 2 * (2 * j + 1)) for j in range(5))
    errs = [abs(fd_spectrum(RadialParameters(0.0), GridSpec(10.0, n), 1)[0] - 2)
            for n in (4000, 8000)]
    ratio = errs[0] / errs[1]
    return {"passed": bool(ritz_err <= 1e-10 and errs[0] <= 1e-5 and 3.5 <= ratio <= 4.5),
            "ritz_max_error": ritz_err, "fd_error": errs[0], "fd_halving_ratio": ratio}


def check_closed_form():
    sol = assemble_polynomial_solution(1, 2, 0.0, 0.0)
    resid = ode_residual(sol)
    p = RadialParameters(0.0, math.sqrt(2), 0.0)
    ritz = abs(solve(p, 20).eigenvalues[0] - 4)
    fd = abs(fd_spectrum(p, levels=1)[0] - 4)
    return {"passed": resid <= 1e-12 and ritz <= 1e-8 and fd <= 1e-4 and abs(sol.a_root - math.sqrt(2)) < 1e-12,
            "residual": resid, "ritz_error": ritz, "fd_error": fd}


def check_hellmann_feynman(points=25, rng=None):
    rng = rng or np.random.default_rng(SEED)
    worst, positive = 0.0, True
    for a, b in rng.uniform(-3, 3, size=(points, 2)):
        for s in (0, 1):
            for j in (0, 1):
                rep = hellmann_feynman_check(RadialParameters.from_s(s, a, b), DEFAULT_BASIS_SIZE, j)
                worst = max(worst, *rep.defects)
                positive &= rep.positive
    origin = hellmann_feynman_check(RadialParameters(0.0), DEFAULT_BASIS_SIZE, 0)
    origin_err = max(abs(origin.dW_da_fd - math.sqrt(math.pi)),
                     abs(origin.dW_db_fd - math.sqrt(math.pi) / 2))
    return {"passed": positive and worst <= 1e-3 and origin_err <= 1e-4,
            "max_defect": worst, "all_positive": positive, "origin_error": origin_err}


def check_cross_solver(points=20, rng=None):
    rng = rng or np.random.default_rng(SEED + 1)
    worst = 0.0
    for g, a, b in zip(rng.uniform(0, 4, points), rng.uniform(-3, 3, points), rng.uniform(-3, 3, points)):
        p = RadialParameters(float(g), float(a), float(b))
        diff = np.abs(fd_spectrum(p, levels=3) - eigenvalues(p)[:3])
        worst = max(worst, float(diff.max()))
    return {"passed": worst <= 1e-3, "max_difference": worst, "points": points}


def check_scans():
    omegas = np.linspace(0.1, 5, 50)
    out = {}
    cases = {
        "scenario1": Scenario1Params(1.0, 1.0, 1, 1, 0.2),
        "scenario2": Scenario2Params(1.0, 1.0, 1, -1, 0.3),
        "decoupled": Scenario1Params(1.0, 1.0, 0, 1, 0.0),
    }
    passed = True
    for name, template in cases.items():
        rows = frequency_scan(template, omegas)
        ok = all(r.ok for r in rows) and max(r.defect for r in rows) <= 1e-6
        if name == "decoupled":
            dev = max(max(abs(r.E_particle - 1), abs(r.E_antiparticle + 1)) for r in rows)
            ok &= dev <= 1e-8
            out["decoupled_deviation"] = dev
        out[name] = {"points": len(rows), "failures": sum(not r.ok for r in rows),
                     "max_defect": max(r.defect for r in rows)}
        passed &= ok
    out["passed"] = passed
    return out


def check_monotonicity(rng=None):
    rng = rng or np.random.default_rng(SEED + 2)
    sizes = (12, 16, 20, 24, 28, 30)
    worst = -math.inf
    for g, a, b in zip(rng.uniform(0, 4, 5), rng.uniform(-3, 3, 5), rng.uniform(-3, 3, 5)):
        p = RadialParameters(float(g), float(a), float(b))
        W = np.array([eigenvalues(p, N)[:4] for N in sizes])
        worst = max(worst, float(np.max(W[1:] - W[:-1])))
    return {"passed": worst <= 1e-12, "max_increase": worst}


CHECKS = {
    "polynomial_reproduction": check_polynomials,
    "real_rootedness": check_real_roots,
    "figure1": check_figure1,
    "figure2": check_figure2,
    "oscillator_exactness": check_oscillator,
    "closed_form_certification": check_closed_form,
    "hellmann_feynman": check_hellmann_feynman,
    "cross_solver_agreement": check_cross_solver,
    "no_frequency_quantization": check_scans,
    "upper_bound_monotonicity": check_monotonicity,
}


def build_report(only=None, log=None) -> dict:
    """Run the checks; timings go to ``log`` (not the bundle) to keep it reproducible."""
    results = {}
    for name, check in CHECKS.items():
        if only and name not in only:
            continue
        start = time.perf_counter()
        results[name] = check()
        if log:
            log(f"{name}: {'pass' if results[name]['passed'] else 'FAIL'} "
                f"({time.perf_counter() - start:.1f} s)")
    return {
        "version": __version__,
        "basis_size": DEFAULT_BASIS_SIZE,
        "grid": {"x_max": GridSpec().x_max, "points": GridSpec().points},
        "passed": all(r["passed"] for r in results.values()),
        "checks": results,
    }
