"""Independent checks: a finite-difference eigensolver and closed-form residuals.

The finite-difference solver works on ``u = sqrt(x) psi``, which turns the
weighted radial problem into a symmetric tridiagonal eigenproblem for

    -u'' + [(gamma^2 - 1/4)/x^2 + a/x + b x + x^2] u = W u.

The three-point stencil is taken in conservative form on cell-centred nodes.
Writing ``psi = x^s phi`` (phi is analytic at the origin) the operator becomes
``-(w phi')'/w + (a/x + b x + x^2) phi`` with ``w = x^(2s+1)``; the flux
``w phi'`` is differenced with interface weights ``w_{k+1/2}``, the face at the
origin carries no flux, and the result is symmetrized by ``sqrt(w_k)``, which
maps back to ``u = sqrt(x) psi`` on the nodes. The plain stencil on ``u`` stalls
at s = 0 (error near 0.25 that barely moves with h) and loses order for
s < 1/2; the weighted form is second order for every s >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate
from scipy.linalg import eigh_tridiagonal

from .model import RadialParameters
from .recurrence import TruncationSolution
from .variational import SpectrumResult, moment

DEFAULT_POINTS = 4000
DEFAULT_X_MAX = 10.0
WIDE_X_MAX = 14.0
# a deep Coulomb well (a << 0) squeezes the ground state to a length ~ 1/|a|;
# the default grid is doubled until h |a| stays below this
COULOMB_RESOLUTION = 0.045
MAX_DEFAULT_POINTS = 64000
RESIDUAL_DPS = 40


class GridTooCoarse(RuntimeError):
    pass


class NonNormalizable(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    x_max: float = DEFAULT_X_MAX
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.x_max < 8:
            raise ValueError(f"x_max must be >= 8, got {self.x_max}")
        if self.points < 100:
            raise ValueError(f"need at least 100 points, got {self.points}")

    @property
    def spacing(self) -> float:
        return self.x_max / self.points

    @property
    def nodes(self) -> np.ndarray:
        return self.spacing * (np.arange(self.points) + 0.5)

    def refined(self) -> "GridSpec":
        return GridSpec(self.x_max, 2 * self.points)

    @classmethod
    def default_for(cls, params: RadialParameters) -> "GridSpec":
        x_max = WIDE_X_MAX if params.b < -6 else DEFAULT_X_MAX
        points = DEFAULT_POINTS
        while x_max / points * max(0.0, -params.a) > COULOMB_RESOLUTION and points < MAX_DEFAULT_POINTS:
            points *= 2
        return cls(x_max, points)


def _tridiagonal(params: RadialParameters, grid: GridSpec):
    h = grid.spacing
    x = grid.nodes
    p = 2 * params.s + 1
    w = x**p
    right = (x + h / 2) ** p
    left = (x - h / 2) ** p  # left[0] == 0: no flux through the origin
    potential = params.a / x + params.b * x + x**2
    diag = (right + left) / (h * h * w) + potential
    off = -right[:-1] / (h * h * np.sqrt(w[:-1] * w[1:]))
    return diag, off


def _lowest(params, grid, levels):
    diag, off = _tridiagonal(params, grid)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                            select_range=(0, levels - 1))


def fd_spectrum(params: RadialParameters, grid: GridSpec | None = None, levels: int = 3, *,
                richardson_tol: float | None = None) -> np.ndarray:
    """Lowest ``levels`` eigenvalues on a uniform grid with Dirichlet outer end.

    With ``richardson_tol`` set, the grid is also solved at half spacing and
    :class:`GridTooCoarse` is raised when the two differ by more than the tolerance.
    """
    grid = grid or GridSpec.default_for(params)
    if levels < 1 or levels > grid.points // 4:
        raise ValueError(f"levels must be in 1..{grid.points // 4}")
    coarse = _lowest(params, grid, levels)
    if richardson_tol is not None:
        fine = _lowest(params, grid.refined(), levels)
        gap = float(np.max(np.abs(fine - coarse)))
        if gap > richardson_tol:
            raise GridTooCoarse(f"h vs h/2 eigenvalues differ by {gap:.3g} > {richardson_tol}")
    return coarse


# -- closed-form truncation solutions ----------------------------------------


def psi_derivatives(solution: TruncationSolution, x):
    """psi, psi', psi'' of x^s exp(-b x/2 - x^2/2) H(x) by the product rule."""
    x = np.asarray(x, dtype=float)
    s, b = solution.s, solution.b
    H = solution.polynomial()
    h0, h1, h2 = H(x), H.deriv(1)(x), H.deriv(2)(x)
    f0 = x**s
    f1 = s * x ** (s - 1) if s != 0 else 0 * x
    f2 = s * (s - 1) * x ** (s - 2) if s not in (0, 1) else 0 * x
    q1 = -b / 2 - x
    g0 = np.exp(-b * x / 2 - x * x / 2)
    g1 = q1 * g0
    g2 = (q1 * q1 - 1) * g0
    psi = f0 * g0 * h0
    d1 = f1 * g0 * h0 + f0 * g1 * h0 + f0 * g0 * h1
    d2 = (f2 * g0 * h0 + f0 * g2 * h0 + f0 * g0 * h2
          + 2 * (f1 * g1 * h0 + f1 * g0 * h1 + f0 * g1 * h1))
    return psi, d1, d2


def default_sample() -> np.ndarray:
    return np.geomspace(0.05, 8.0, 40)


def ode_residual(solution: TruncationSolution, sample=None, *, W: float | None = None) -> float:
    """max |LHS of the radial equation| / max |psi| over the sample points.

    Evaluated in extended precision: for b << 0 the sum c_j x^j cancels by ten
    orders of magnitude, which double arithmetic would report as a residual.
    ``W`` overrides the solution's eigenvalue (used to show the check has teeth).
    """
    x = default_sample() if sample is None else np.asarray(sample, dtype=float)
    if np.any(x <= 0):
        raise ValueError("sample points must be positive")
    with mpmath.workdps(RESIDUAL_DPS):
        exact = solution.exact_coeffs or solution.coeffs
        c = [_mp(v) for v in exact]
        h0 = c[::-1]
        h1 = [k * c[k] for k in range(1, len(c))][::-1] or [0]
        h2 = [k * (k - 1) * c[k] for k in range(2, len(c))][::-1] or [0]
        s, a, b = (mpmath.mpf(v) for v in (solution.s, solution.a_root, solution.b))
        if W is None:
            W = 2 * (solution.n + s + 1) - b * b / 4
        W = mpmath.mpf(W)
        worst = peak = mpmath.mpf(0)
        for xv in map(mpmath.mpf, x):
            # psi = f H with f = x^s exp(-b x/2 - x^2/2); q = f'/f
            f = xv**s * mpmath.exp(-b * xv / 2 - xv * xv / 2)
            q = s / xv - b / 2 - xv
            H, dH, d2H = (mpmath.polyval(p, xv) for p in (h0, h1, h2))
            psi = f * H
            d1 = f * (q * H + dH)
            d2 = f * ((q * q - s / xv**2 - 1) * H + 2 * q * dH + d2H)
            lhs = d2 + d1 / xv - (s * s / xv**2 + a / xv + b * xv + xv * xv - W) * psi
            worst = max(worst, abs(lhs))
            peak = max(peak, abs(psi))
        return float(worst / peak)


def _mp(value):
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def norm_check(state, level: int = 0) -> float:
    """int |psi|^2 x dx for a truncation solution, or v^T S v for a Ritz state."""
    if isinstance(state, SpectrumResult):
        value = state.norm(level)
    elif isinstance(state, TruncationSolution):
        value = _truncation_norm(state)
    else:
        raise TypeError(f"unsupported state {type(state).__name__}")
    if not (math.isfinite(value) and value > 0):
        raise NonNormalizable(f"norm = {value}")
    return value


def _truncation_norm(sol: TruncationSolution) -> float:
    c = np.asarray(sol.coeffs)
    if sol.b == 0:
        return float(sum(c[j] * c[k] * moment(2 * sol.s + j + k + 1)
                         for j in range(len(c)) for k in range(len(c))))

    def integrand(x):
        return psi_derivatives(sol, x)[0] ** 2 * x

    # the e^{-bx} factor shifts the Gaussian peak to about -b/2
    peak = max(0.0, -sol.b / 2)
    head, _ = integrate.quad(integrand, 0, peak + 1, limit=200)
    tail, _ = integrate.quad(integrand, peak + 1, np.inf, limit=200)
    return head + tail
