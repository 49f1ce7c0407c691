"""Dirac oscillator with a Coulomb-type term: the two symmetry-violation scenarios.

Both scenarios reduce to the generic radial problem. In the first the Coulomb
strength is proportional to the energy, so the energy is found self-consistently;
in the second the generic eigenvalue fixes E^2 directly. The spin label is
``sigma`` (+1/-1) throughout to keep it apart from the Frobenius exponent s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import brentq

from .model import NegativeGammaSquared, RadialParameters
from .oracle import fd_spectrum
from .variational import DEFAULT_BASIS_SIZE, eigenvalues

Branch = Literal["particle", "antiparticle"]
SCAN_SAMPLES = 160


class NoRoot(RuntimeError):
    """No sign change of the self-consistency defect in the scanned energy window."""


class TachyonicLevel(ValueError):
    """E^2 < 0 for the requested level."""


def _check_common(m, omega, sigma):
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if sigma not in (1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")


@dataclass(frozen=True)
class Scenario1Params:
    m: float
    omega: float
    l: int
    sigma: int
    ag_lambda: float

    def __post_init__(self):
        _check_common(self.m, self.omega, self.sigma)
        if self.gamma_sq < 0:
            raise NegativeGammaSquared(
                f"[l + (1 - sigma)/2]^2 - (ag lambda)^2 = {self.gamma_sq} < 0"
            )

    @property
    def gamma_sq(self) -> float:
        return (self.l + (1 - self.sigma) / 2) ** 2 - self.ag_lambda**2

    def with_omega(self, omega: float) -> "Scenario1Params":
        return Scenario1Params(self.m, omega, self.l, self.sigma, self.ag_lambda)


@dataclass(frozen=True)
class Scenario2Params:
    m: float
    omega: float
    l: int
    sigma: int
    aB0g: float

    def __post_init__(self):
        _check_common(self.m, self.omega, self.sigma)

    @property
    def gamma_sq(self) -> float:
        return (self.l + (1 - self.sigma) / 2) ** 2

    def with_omega(self, omega: float) -> "Scenario2Params":
        return Scenario2Params(self.m, omega, self.l, self.sigma, self.aB0g)


@dataclass(frozen=True)
class EnergyLevel:
    E: float
    level: int
    W: float
    branch: Branch
    defect: float = 0.0
    other_roots: tuple[float, ...] = field(default=(), compare=False)


def _spin_shift(m, omega, l, sigma) -> float:
    """2 m omega (l + 1/2) sigma + m omega, the E-independent part of alpha^2 + m^2."""
    return 2 * m * omega * (l + 0.5) * sigma + m * omega


def map_scenario1(p: Scenario1Params, E: float) -> tuple[RadialParameters, float]:
    """Generic parameters and the target W = alpha^2/(m omega) at energy E."""
    mw = p.m * p.omega
    beta = 2 * p.ag_lambda * E / math.sqrt(mw)
    params = RadialParameters(gamma_sq=p.gamma_sq, a=beta, b=0.0)
    alpha_sq = E * E - p.m**2 + _spin_shift(p.m, p.omega, p.l, p.sigma)
    return params, alpha_sq / mw


def _provider(N: int, use_fd: bool) -> Callable[[RadialParameters, int], float]:
    if use_fd:
        return lambda params, j: float(fd_spectrum(params, levels=j + 1)[j])
    return lambda params, j: float(eigenvalues(params, N)[j])


def decoupled_energy_sq(m, omega, l, sigma, gamma_sq, level) -> float:
    """E^2 with the coupling off: generic eigenvalue W = 2(2j + |gamma| + 1)."""
    W = 2 * (2 * level + math.sqrt(gamma_sq) + 1)
    return m * m + m * omega * W - _spin_shift(m, omega, l, sigma)


def solve_scenario1_energy(p: Scenario1Params, level: int = 0, branch: Branch = "particle", *,
                           N: int = DEFAULT_BASIS_SIZE, use_fd: bool = False) -> EnergyLevel:
    """Self-consistent E with W_level(beta(E)) = alpha^2(E)/(m omega) on one branch.

    The window ``|E| <= m + 10 sqrt(m omega (j + |l| + 2))`` is scanned for sign
    changes and each is refined by bracketing; the root nearest the decoupled
    energy is returned, any others are listed in ``other_roots``.
    """
    W_of = _provider(N, use_fd)
    sign = 1.0 if branch == "particle" else -1.0
    if branch not in ("particle", "antiparticle"):
        raise ValueError(f"unknown branch {branch!r}")

    def defect(E):
        params, target = map_scenario1(p, E)
        return W_of(params, level) - target

    E_max = p.m + 10 * math.sqrt(p.m * p.omega * (level + abs(p.l) + 2))
    grid = sign * np.linspace(0.0, E_max, SCAN_SAMPLES + 1)
    values = np.array([defect(E) for E in grid])
    roots = []
    for k in range(SCAN_SAMPLES):
        lo, hi, f_lo, f_hi = grid[k], grid[k + 1], values[k], values[k + 1]
        if f_lo == 0:
            roots.append(float(lo))
        elif f_lo * f_hi < 0:
            roots.append(brentq(defect, min(lo, hi), max(lo, hi), xtol=1e-14, rtol=1e-15))
    if values[-1] == 0:
        roots.append(float(grid[-1]))
    roots = sorted(set(roots), key=abs)
    if not roots:
        raise NoRoot(f"no bound-state energy for {p} level {level} on the {branch} branch")
    center_sq = decoupled_energy_sq(p.m, p.omega, p.l, p.sigma, max(p.gamma_sq, 0.0), level)
    center = sign * math.sqrt(max(center_sq, 0.0))
    E = min(roots, key=lambda r: abs(r - center))
    params, target = map_scenario1(p, E)
    W = W_of(params, level)
    return EnergyLevel(E=float(E), level=level, W=W, branch=branch, defect=abs(W - target),
                       other_roots=tuple(r for r in roots if r != E))


def map_scenario2(p: Scenario2Params) -> tuple[RadialParameters, Callable[[float], float]]:
    """Generic parameters and the affine map W -> E^2.

    The Coulomb sign flips: the scenario carries +tau/x where the generic
    equation carries -a/x, so a = -tau.
    """
    root_mw = math.sqrt(p.m * p.omega)
    tau = 2 * p.aB0g * (p.l + 0.5) / root_mw
    eta = 2 * p.aB0g * p.sigma / root_mw
    params = RadialParameters(gamma_sq=p.gamma_sq, a=-tau, b=eta)
    offset = p.m**2 - _spin_shift(p.m, p.omega, p.l, p.sigma) + p.aB0g**2

    def energy_sq(W: float) -> float:
        return p.m * p.omega * W + offset

    return params, energy_sq


def scenario2_W(p: Scenario2Params, E: float) -> float:
    """Inverse of the affine map: W = epsilon^2/(m omega)."""
    eps_sq = E * E - p.m**2 + _spin_shift(p.m, p.omega, p.l, p.sigma) - p.aB0g**2
    return eps_sq / (p.m * p.omega)


def solve_scenario2_energy(p: Scenario2Params, level: int = 0, branch: Branch = "particle", *,
                           N: int = DEFAULT_BASIS_SIZE, use_fd: bool = False) -> EnergyLevel:
    params, energy_sq = map_scenario2(p)
    W = _provider(N, use_fd)(params, level)
    E_sq = energy_sq(W)
    if E_sq < 0:
        raise TachyonicLevel(f"E^2 = {E_sq} < 0 for {p} level {level}")
    if branch not in ("particle", "antiparticle"):
        raise ValueError(f"unknown branch {branch!r}")
    E = math.sqrt(E_sq) if branch == "particle" else -math.sqrt(E_sq)
    return EnergyLevel(E=E, level=level, W=W, branch=branch, defect=abs(scenario2_W(p, E) - W))


@dataclass
class ScanRow:
    omega: float
    E_particle: float
    E_antiparticle: float
    W: float
    defect: float
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


SCAN_HEADER = ["omega", "E_particle", "E_antiparticle", "W", "defect"]


def frequency_scan(template: Scenario1Params | Scenario2Params, omegas, level: int = 0, *,
                   N: int = DEFAULT_BASIS_SIZE) -> list[ScanRow]:
    """Particle and antiparticle energies of one level at every frequency.

    Failures are kept as rows with ``error`` set so the caller can see every gap.
    """
    solve = solve_scenario1_energy if isinstance(template, Scenario1Params) else solve_scenario2_energy
    rows = []
    for omega in omegas:
        if not (omega > 0 and math.isfinite(omega)):
            raise ValueError(f"frequencies must be positive and finite, got {omega}")
        p = template.with_omega(float(omega))
        try:
            up = solve(p, level, "particle", N=N)
            down = solve(p, level, "antiparticle", N=N)
        except (NoRoot, TachyonicLevel, NegativeGammaSquared) as exc:
            rows.append(ScanRow(float(omega), math.nan, math.nan, math.nan, math.nan, str(exc)))
            continue
        rows.append(ScanRow(float(omega), up.E, down.E, up.W, max(up.defect, down.defect)))
    return rows
