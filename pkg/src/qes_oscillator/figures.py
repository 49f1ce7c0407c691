"""Figure data and on-curve verification.

Figure 1: the branches a^{(n,i)}(b) of c_{n+1}(a, b) = 0.
Figure 2: Ritz curves W_j(a) at fixed b with the truncation points
(a^{(n,i)}(b), W^{(n)}) laid over them, and the horizontal line W^{(n_max)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import RadialParameters
from .recurrence import (
    CurveTable,
    _scaled_numerators,
    curve_sweep,
    truncation_energy,
    truncation_roots,
)
from .variational import DEFAULT_BASIS_SIZE, eigenvalues, spectrum_sweep, SweepTable

ON_CURVE_TOL = 1e-5


def parse_range(text: str) -> np.ndarray:
    """``lo:hi:step``; hi is included when (hi - lo)/step is integral within 1e-9."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ValueError(f"range must look like lo:hi:step, got {text!r}") from None
    if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(step)):
        raise ValueError(f"range bounds must be finite: {text!r}")
    if step <= 0 or lo > hi:
        raise ValueError(f"need lo <= hi and step > 0: {text!r}")
    ratio = (hi - lo) / step
    count = int(np.floor(ratio + 1e-9))
    values = lo + step * np.arange(count + 1)
    if abs(ratio - round(ratio)) <= 1e-9:
        values[-1] = hi
    return values


# -- Figure 1 -------------------------------------------------------------


@dataclass
class Figure1Check:
    table: CurveTable
    max_jump_ratio: float  # max over steps of |delta a| / (|da/db| * delta b * 2)
    roots_at_zero: list[float] | None
    passed: bool


def branch_slopes(n: int, s: float, b: float, roots) -> np.ndarray:
    """da/db along each branch by implicit differentiation of c_{n+1}(a, b) = 0."""
    from fractions import Fraction

    P = _scaled_numerators(n)[n + 1].substitute(s=Fraction(s))
    Pa, Pb = P.derivative("a"), P.derivative("b")
    return np.array([-Pb.evaluate(a=float(r), b=float(b)) / Pa.evaluate(a=float(r), b=float(b))
                     for r in roots])


def verify_figure1(n: int = 3, s: float = 0.0, b_values=None) -> Figure1Check:
    """Continuity of the n+1 branches and, when b = 0 is sampled, its root values."""
    b_values = np.linspace(-4, 4, 161) if b_values is None else np.asarray(b_values, float)
    table = curve_sweep(n, s, b_values)
    ratio = 0.0
    for k in range(1, len(b_values)):
        db = b_values[k] - b_values[k - 1]
        jump = np.abs(table.branches[k] - table.branches[k - 1])
        slope = np.maximum(np.abs(branch_slopes(n, s, b_values[k - 1], table.branches[k - 1])),
                           np.abs(branch_slopes(n, s, b_values[k], table.branches[k])))
        ratio = max(ratio, float(np.max(jump / (2 * slope * db + 1e-12))))
    zero = np.flatnonzero(np.isclose(b_values, 0.0, atol=1e-12))
    roots0 = sorted(map(float, table.branches[zero[0]])) if zero.size else None
    finite = bool(np.all(np.isfinite(table.branches)))
    passed = finite and ratio <= 1.0 and not table.crossings
    return Figure1Check(table=table, max_jump_ratio=ratio, roots_at_zero=roots0, passed=passed)


# -- Figure 2 -------------------------------------------------------------


@dataclass
class TruncationPoint:
    n: int
    i: int
    a: float
    W: float
    level: int  # nearest Ritz level
    W_ritz: float

    @property
    def defect(self) -> float:
        return abs(self.W_ritz - self.W)


@dataclass
class Crossing:
    level: int
    a: float
    matched_root: float | None


@dataclass
class Figure2Data:
    s: float
    b: float
    n_max: int
    N: int
    curves: SweepTable
    points: list[TruncationPoint]
    line_W: float
    crossings: list[Crossing]
    window: tuple[float, float]
    tolerance: float = ON_CURVE_TOL
    notes: list[str] = field(default_factory=list)

    @property
    def max_defect(self) -> float:
        return max(p.defect for p in self.points)

    @property
    def line_points(self) -> list[TruncationPoint]:
        return [p for p in self.points if p.n == self.n_max]

    @property
    def unmatched_crossings(self) -> list[Crossing]:
        return [c for c in self.crossings if c.matched_root is None]

    @property
    def passed(self) -> bool:
        matched = {c.matched_root for c in self.crossings if c.matched_root is not None}
        return (self.max_defect <= self.tolerance
                and not self.unmatched_crossings
                and len(matched) == self.n_max + 1)


def figure2_data(s: float = 0.0, b: float = 1.0, n_max: int = 8, *, N: int = DEFAULT_BASIS_SIZE,
                 levels: int | None = None, a_step: float = 0.05, pad: float = 1.0,
                 tolerance: float = ON_CURVE_TOL) -> Figure2Data:
    """Ritz curves, truncation points and the horizontal-line intersections."""
    levels = levels or n_max + 2
    points = []
    for n in range(n_max + 1):
        W = truncation_energy(n, s, b)
        for i, a in enumerate(truncation_roots(n, s, b), start=1):
            w = eigenvalues(RadialParameters.from_s(s, a, b), N)
            j = int(np.argmin(np.abs(w - W)))
            points.append(TruncationPoint(n=n, i=i, a=a, W=W, level=j, W_ritz=float(w[j])))
    a_lo = min(p.a for p in points) - pad
    a_hi = max(p.a for p in points) + pad
    a_grid = np.append(np.arange(a_lo, a_hi, a_step), a_hi)
    curves = spectrum_sweep(s, b, a_grid, levels, N)

    line_W = truncation_energy(n_max, s, b)
    line_roots = [p.a for p in points if p.n == n_max]
    crossings = []
    for j in range(levels):
        diff = curves.W[:, j] - line_W
        for k in np.flatnonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) <= 0):
            if diff[k] == 0 and k > 0 and diff[k - 1] * diff[k + 1] > 0:
                continue  # tangency on a grid point, not a crossing
            if diff[k] == diff[k + 1] == 0:
                continue

            def g(a, j=j):
                return eigenvalues(RadialParameters.from_s(s, a, b), N)[j] - line_W

            a_star = a_grid[k] if diff[k] == 0 else brentq(g, a_grid[k], a_grid[k + 1], xtol=1e-13)
            match = min(line_roots, key=lambda r: abs(r - a_star))
            slope = abs(diff[k + 1] - diff[k]) / (a_grid[k + 1] - a_grid[k])
            ok = abs(match - a_star) * max(slope, 1.0) <= tolerance
            crossings.append(Crossing(level=j, a=float(a_star), matched_root=match if ok else None))
    # a crossing landing exactly on a grid node is seen by two adjacent intervals
    unique = {}
    for c in crossings:
        unique.setdefault((c.level, round(c.a, 9)), c)
    return Figure2Data(s=float(s), b=float(b), n_max=n_max, N=N, curves=curves, points=points,
                       line_W=line_W, crossings=list(unique.values()), window=(a_lo, a_hi),
                       tolerance=tolerance)
