"""Command-line entry point: ``qes-osc <command> [options]``.

Tables go to stdout unless an output directory is given (``--out-dir`` or the
``QES_OSC_OUTPUT_DIR`` environment variable); written files get a ``.meta.json``
sidecar. Exit status: 0 ok, 1 acceptance-level defect, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__
from .figures import ON_CURVE_TOL, figure2_data, parse_range, verify_figure1
from .model import NegativeGammaSquared, NonFinite, RadialParameters
from .oracle import GridSpec
from .output import csv_text, json_text, render_svg, write_with_sidecar
from .physics import (
    SCAN_HEADER,
    NoRoot,
    Scenario1Params,
    Scenario2Params,
    TachyonicLevel,
    frequency_scan,
    solve_scenario1_energy,
    solve_scenario2_energy,
)
from .recurrence import MAX_LEVEL, curve_sweep, truncation_energy, truncation_roots
from .variational import DEFAULT_BASIS_SIZE, IllConditioned, hellmann_feynman_check, spectrum_sweep

OUTPUT_ENV = "QES_OSC_OUTPUT_DIR"
HF_TOL = 1e-3
SCAN_DEFECT_TOL = 1e-6


class ConfigError(ValueError):
    pass


# -- plumbing -----------------------------------------------------------------


def _metadata(args, **extra) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out_dir")}
    meta = {
        "command": args.command,
        "config": config,
        "basis_size": getattr(args, "basis_size", None),
        "grid": {"x_max": GridSpec().x_max, "points": GridSpec().points},
        "versions": {"qes_oscillator": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "mpmath": mpmath.__version__},
    }
    meta.update(extra)
    return meta


def _out_dir(args) -> Path | None:
    value = args.out_dir or os.environ.get(OUTPUT_ENV)
    if not value:
        return None
    path = Path(value)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path


def _emit(args, stem: str, text: str, ext: str, **meta) -> None:
    out = _out_dir(args)
    if out is None:
        sys.stdout.write(text)
        return
    path = write_with_sidecar(out / f"{stem}.{ext}", text, _metadata(args, **meta))
    print(path, file=sys.stderr)


def _params(args, a=None, b=None) -> RadialParameters:
    a = args.a if a is None else a
    b = args.b if b is None else b
    if args.gamma_sq is not None:
        return RadialParameters(args.gamma_sq, a, b)
    return RadialParameters.from_s(args.s, a, b)


def _s(args) -> float:
    return _params(args, 0.0, 0.0).s


def _range(text: str, what: str) -> np.ndarray:
    try:
        return parse_range(text)
    except ValueError as exc:
        raise ConfigError(f"--{what}: {exc}") from None


def _check_level(n: int) -> None:
    if not 0 <= n <= MAX_LEVEL:
        raise ConfigError(f"n must be in 0..{MAX_LEVEL}, got {n}")


def _table(args, stem, header, rows, *, svg=None, **meta):
    rows = list(rows)
    if args.format == "csv":
        _emit(args, stem, csv_text(header, rows), "csv", **meta)
    elif args.format == "json":
        _emit(args, stem, json_text([dict(zip(header, r)) for r in rows]), "json", **meta)
    else:
        _emit(args, stem, svg(), "svg", **meta)


# -- commands -----------------------------------------------------------------


def cmd_truncate(args) -> int:
    _check_level(args.n)
    s = _s(args)
    W = truncation_energy(args.n, s, args.b)
    rows = [[args.n, i, a, W] for i, a in enumerate(truncation_roots(args.n, s, args.b), start=1)]

    def svg():
        return render_svg(points=[(r[2], r[3], None) for r in rows], title=f"truncation points n={args.n}",
                          xlabel="a", ylabel="W")

    _table(args, "truncate", ["n", "i", "a", "W"], rows, svg=svg)
    return 0


def cmd_curves(args) -> int:
    _check_level(args.n)
    table = curve_sweep(args.n, _s(args), _range(args.b_range, "b-range"))

    def svg():
        lines = [(table.b, table.branches[:, k], None) for k in range(table.branches.shape[1])]
        return render_svg(lines, title=f"branches a^({args.n},i)(b)", xlabel="b", ylabel="a")

    _table(args, "curves", table.header, table.rows(), svg=svg, crossings=table.crossings)
    return 0


def cmd_spectrum(args) -> int:
    if args.levels < 1:
        raise ConfigError("--levels must be positive")
    table = spectrum_sweep(_s(args), args.b, _range(args.a_range, "a-range"), args.levels,
                           args.basis_size)

    def svg():
        lines = [(table.a, table.W[:, j], None) for j in range(table.W.shape[1])]
        return render_svg(lines, title=f"W_j(a), b={args.b}", xlabel="a", ylabel="W")

    _table(args, "spectrum", table.header, table.rows(), svg=svg)
    return 0 if not any(table.flags) else 1


def cmd_verify_figure1(args) -> int:
    b_values = _range(args.b_range, "b-range")
    check = verify_figure1(args.n, _s(args), b_values)
    summary = {"passed": check.passed, "max_jump_ratio": check.max_jump_ratio,
               "roots_at_b0": check.roots_at_zero, "crossings": check.table.crossings}
    _emit(args, "figure1_summary", json_text(summary), "json")
    if _out_dir(args) is not None:
        table = check.table
        _emit(args, "figure1_curves", csv_text(table.header, table.rows()), "csv")
        lines = [(table.b, table.branches[:, k], None) for k in range(table.branches.shape[1])]
        _emit(args, "figure1", render_svg(lines, title=f"branches a^({args.n},i)(b)",
                                          xlabel="b", ylabel="a"), "svg")
    if not check.passed:
        print("figure 1: branch continuity check failed", file=sys.stderr)
    return 0 if check.passed else 1


def cmd_verify_figure2(args) -> int:
    _check_level(args.n_max)
    data = figure2_data(_s(args), args.b, args.n_max, N=args.basis_size, a_step=args.a_step)
    point_header = ["n", "i", "a", "W", "level", "W_ritz", "defect"]
    point_rows = [[p.n, p.i, p.a, p.W, p.level, p.W_ritz, p.defect] for p in data.points]
    summary = {"passed": data.passed, "line_W": data.line_W, "max_defect": data.max_defect,
               "tolerance": data.tolerance, "window": list(data.window),
               "crossings": [{"level": c.level, "a": c.a, "matched_root": c.matched_root}
                             for c in data.crossings],
               "unmatched_crossings": len(data.unmatched_crossings)}
    meta = {"tolerance": ON_CURVE_TOL, "line_W": data.line_W}
    if _out_dir(args) is None:
        sys.stdout.write(csv_text(point_header, point_rows))
    else:
        _emit(args, "figure2_points", csv_text(point_header, point_rows), "csv", **meta)
        _emit(args, "figure2_curves", csv_text(data.curves.header, data.curves.rows()), "csv", **meta)
        _emit(args, "figure2_summary", json_text(summary), "json", **meta)
        lines = [(data.curves.a, data.curves.W[:, j], "#1f4e9c") for j in range(data.curves.W.shape[1])]
        top = data.line_W + 4
        svg = render_svg(lines, [(p.a, p.W, "#c0392b") for p in data.points], [(data.line_W, None)],
                         title=f"W_j(a), b={args.b}", xlabel="a", ylabel="W",
                         ylim=(min(0.0, float(np.nanmin(data.curves.W))), top))
        _emit(args, "figure2", svg, "svg", **meta)
    if not data.passed:
        print(f"figure 2: max defect {data.max_defect:.3g}, "
              f"{len(data.unmatched_crossings)} unmatched crossings", file=sys.stderr)
    return 0 if data.passed else 1


def cmd_hellmann(args) -> int:
    rep = hellmann_feynman_check(_params(args), args.basis_size, args.level)
    summary = {"level": rep.level, "dW_da": rep.dW_da_fd, "mean_inv_x": rep.mean_inv_x,
               "dW_db": rep.dW_db_fd, "mean_x": rep.mean_x, "defects": list(rep.defects),
               "positive": rep.positive}
    ok = rep.positive and max(rep.defects) <= HF_TOL
    summary["passed"] = ok
    _emit(args, "hellmann", json_text(summary), "json", tolerance=HF_TOL)
    return 0 if ok else 1


def _scenario_template(args, omega):
    if args.scenario == 1:
        return Scenario1Params(args.m, omega, args.l, args.sigma, args.coupling)
    return Scenario2Params(args.m, omega, args.l, args.sigma, args.coupling)


def cmd_scenario(args) -> int:
    p = _scenario_template(args, args.omega)
    solve = solve_scenario1_energy if args.scenario == 1 else solve_scenario2_energy
    out = {}
    for branch in ("particle", "antiparticle"):
        try:
            lvl = solve(p, args.level, branch, N=args.basis_size)
        except (NoRoot, TachyonicLevel) as exc:
            print(f"{branch}: {exc}", file=sys.stderr)
            return 1
        out[branch] = {"E": lvl.E, "W": lvl.W, "defect": lvl.defect,
                       "other_roots": list(lvl.other_roots)}
    _emit(args, "scenario", json_text(out), "json")
    return 0


def cmd_scan(args) -> int:
    omegas = _range(args.omega, "omega")
    if omegas[0] <= 0:
        raise ConfigError("--omega range must be positive")
    template = _scenario_template(args, float(omegas[0]))
    rows = frequency_scan(template, omegas, args.level, N=args.basis_size)
    table = [[r.omega, r.E_particle, r.E_antiparticle, r.W, r.defect] for r in rows]

    def svg():
        xs = [r.omega for r in rows]
        return render_svg([(xs, [r.E_particle for r in rows], None),
                           (xs, [r.E_antiparticle for r in rows], None)],
                          title=f"scenario {args.scenario}, level {args.level}",
                          xlabel="omega", ylabel="E")

    _table(args, "scan", SCAN_HEADER, table, svg=svg, tolerance=SCAN_DEFECT_TOL)
    bad = [r for r in rows if not r.ok or not r.defect <= SCAN_DEFECT_TOL]
    for r in bad:
        print(f"omega={r.omega:g}: {r.error or f'defect {r.defect:.3g}'}", file=sys.stderr)
    return 1 if bad else 0


def cmd_report(args) -> int:
    from .report import CHECKS, build_report

    only = args.only or None
    if only:
        unknown = set(only) - set(CHECKS)
        if unknown:
            raise ConfigError(f"unknown checks: {sorted(unknown)}")
    log = (lambda msg: print(msg, file=sys.stderr)) if not args.quiet else None
    report = build_report(only, log=log)
    _emit(args, "report", json_text(report), "json")
    return 0 if report["passed"] else 1


# -- parser -------------------------------------------------------------------


def _add_radial(p, *, a=False, b=True):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--s", type=float, default=0.0, help="Frobenius exponent |gamma| (default 0)")
    group.add_argument("--gamma-sq", type=float, default=None, help="gamma^2 (alternative to --s)")
    if a:
        p.add_argument("--a", type=float, default=0.0, help="coefficient of 1/x")
    if b:
        p.add_argument("--b", type=float, default=0.0, help="coefficient of x")


def _add_common(p, formats=("csv", "json", "svg"), default="csv"):
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out-dir", default=None,
                   help=f"write files here instead of stdout (default: ${OUTPUT_ENV})")


def _add_scenario(p):
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    p.add_argument("--m", type=float, default=1.0, help="mass")
    p.add_argument("--l", type=int, default=0, help="angular quantum number")
    p.add_argument("--sigma", type=int, choices=(1, -1), default=1, help="spin label +1/-1")
    p.add_argument("--coupling", type=float, default=0.0,
                   help="ag*lambda (scenario 1) or a*B0*g (scenario 2)")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--basis-size", type=int, default=DEFAULT_BASIS_SIZE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qes-osc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("truncate", help="truncation roots a^(n,i) and W^(n)")
    p.add_argument("--n", type=int, required=True)
    _add_radial(p)
    _add_common(p)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("curves", help="branches a^(n,i)(b) over a b range")
    p.add_argument("--n", type=int, required=True)
    _add_radial(p, b=False)
    p.add_argument("--b-range", default="-4:4:0.05", help="lo:hi:step")
    _add_common(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("spectrum", help="Ritz eigenvalues W_j(a) at fixed b")
    _add_radial(p)
    p.add_argument("--a-range", default="-5:5:0.1", help="lo:hi:step")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--basis-size", type=int, default=DEFAULT_BASIS_SIZE)
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify-figure1", help="branch continuity and b=0 roots")
    p.add_argument("--n", type=int, default=3)
    _add_radial(p, b=False)
    p.add_argument("--b-range", default="-4:4:0.05", help="lo:hi:step")
    _add_common(p, ("json",), "json")
    p.set_defaults(func=cmd_verify_figure1)

    p = sub.add_parser("verify-figure2", help="truncation points on the Ritz curves")
    _add_radial(p)
    p.set_defaults(b=1.0)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--a-step", type=float, default=0.05)
    p.add_argument("--basis-size", type=int, default=DEFAULT_BASIS_SIZE)
    _add_common(p, ("csv",), "csv")
    p.set_defaults(func=cmd_verify_figure2)

    p = sub.add_parser("hellmann", help="finite-difference dW/da, dW/db vs <1/x>, <x>")
    _add_radial(p, a=True)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--basis-size", type=int, default=DEFAULT_BASIS_SIZE)
    _add_common(p, ("json",), "json")
    p.set_defaults(func=cmd_hellmann)

    p = sub.add_parser("scenario", help="particle/antiparticle energies at one frequency")
    _add_scenario(p)
    p.add_argument("--omega", type=float, required=True)
    _add_common(p, ("json",), "json")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("scan", help="energies over a frequency range")
    _add_scenario(p)
    p.add_argument("--omega", default="0.1:5:0.1", help="lo:hi:step")
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("report", help="full verification bundle (CI gate)")
    p.add_argument("--only", nargs="*", default=None, help="run a subset of checks")
    p.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    _add_common(p, ("json",), "json")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "basis_size", 1) < 1:
        print("error: --basis-size must be positive", file=sys.stderr)
        return 2
    if not getattr(args, "a_step", 1.0) > 0:
        print("error: --a-step must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, NonFinite, NegativeGammaSquared) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # bad physical inputs rejected by the library
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IllConditioned as exc:
        print(f"defect: {exc}", file=sys.stderr)
        return 1
