"""Frobenius series, truncation polynomials and closed-form polynomial solutions.

With ``psi = x^s exp(-b x/2 - x^2/2) sum_j c_j x^j`` the coefficients obey

    c_{j+2} = A_j c_{j+1} + B_j c_j,   c_{-1} = 0, c_0 = 1,

and the series terminates at degree n when ``W = 2(n+s+1) - b^2/4`` and
``c_{n+1}(a, b) = 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import RadialParameters
from .polynomial import RationalPolynomial, as_fraction, isolate_real_roots

MAX_LEVEL = 24
COEFF_TOL = 1e-10
ROOT_TOL = Fraction(1, 10**12)


class RootCountMismatch(ArithmeticError):
    """Fewer certified real roots than the degree; all roots are provably real."""


class CertificationFailed(ArithmeticError):
    pass


class BranchCrossing(UserWarning):
    pass


def recurrence_coefficients(j: int, s: float, a: float, b: float, W: float) -> tuple[float, float]:
    if j < -1:
        raise ValueError(f"j must be >= -1, got {j}")
    den = (j + 2) * (j + 2 * (s + 1))
    A = (2 * a + b * (2 * j + 2 * s + 3)) / (2 * den)
    B = (4 * (2 * j + 2 * s - W + 2) - b * b) / (4 * den)
    return A, B


def series_coefficients(params: RadialParameters, W: float, count: int) -> list[float]:
    """c_0 .. c_{count-1} of the Frobenius factor H(x)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    s, a, b = params.s, params.a, params.b
    coeffs = [1.0]
    prev, cur = 0.0, 1.0
    for j in range(-1, count - 2):
        A, B = recurrence_coefficients(j, s, a, b, W)
        prev, cur = cur, A * cur + B * prev
        coeffs.append(cur)
    return coeffs[:count]


def truncation_energy(n: int, s: float, b: float) -> float:
    if n < 0 or s < 0:
        raise ValueError("need n >= 0 and s >= 0")
    return 2 * (n + s + 1) - b * b / 4


_ABS = ("a", "b", "s")


@lru_cache(maxsize=None)
def _scaled_numerators(n: int) -> tuple[RationalPolynomial, ...]:
    """P_0 .. P_{n+1} with P_k = c_k * prod_{i=-1}^{k-2} den_i, den_i = 2(i+2)(i+2s+2).

    Integer polynomials in (a, b, s):
    P_{j+2} = (2a + b(2j+2s+3)) P_{j+1} + 4(j-n) den_{j-1} P_j.
    """
    if not 0 <= n <= MAX_LEVEL:
        raise ValueError(f"n must be in [0, {MAX_LEVEL}], got {n}")
    a = RationalPolynomial.variable(_ABS, "a")
    b = RationalPolynomial.variable(_ABS, "b")
    s = RationalPolynomial.variable(_ABS, "s")
    one = RationalPolynomial.constant(_ABS, 1)
    zero = RationalPolynomial.constant(_ABS, 0)
    P = [one]
    prev = zero
    for j in range(-1, n):
        lin = 2 * a + b * (2 * s + (2 * j + 3))
        nxt = lin * P[-1]
        if j >= 0:
            den_prev = 2 * (j + 1) * (2 * s + (j + 1))  # den_{j-1}
            nxt = nxt + (4 * (j - n)) * den_prev * prev
        prev = P[-1]
        P.append(nxt)
    return tuple(P)


def _den_product(n: int, s: Fraction) -> Fraction:
    out = Fraction(1)
    for i in range(-1, n):
        out *= 2 * (i + 2) * (i + 2 * s + 2)
    return out


def build_truncation_polynomial(n: int, s=None) -> RationalPolynomial:
    """Canonical c_{n+1}(a, b) at ``W = W_s^{(n)}``.

    ``s=None`` keeps s symbolic (variables ``(a, b, s)``); otherwise s is taken
    exactly as a rational and the result is in ``(a, b)``. Canonical means integer
    coefficients, content 1, positive leading coefficient in a.
    """
    P = _scaled_numerators(n)[n + 1]
    if s is not None:
        P = P.substitute(s=as_fraction(s))
    return P.canonical("a")


def truncation_scale(n: int, s) -> Fraction:
    """Factor k with ``c_{n+1}(a, b) = k * build_truncation_polynomial(n, s)(a, b)``."""
    s = as_fraction(s)
    P = _scaled_numerators(n)[n + 1].substitute(s=s)
    canon = P.canonical("a")
    top = next(iter(canon.terms))
    return (P.terms[top] / canon.terms[top]) / _den_product(n, s)


def _univariate_in_a(n: int, s, b) -> list[Fraction]:
    P = _scaled_numerators(n)[n + 1].substitute(s=as_fraction(s), b=as_fraction(b))
    return P.univariate("a")


def truncation_roots(n: int, s: float, b: float) -> list[float]:
    """The n+1 real roots a^{(n,i)}(b), ascending, repeated by multiplicity."""
    if not 0 <= n <= MAX_LEVEL:
        raise ValueError(f"n must be in 0..{MAX_LEVEL}, got {n}")
    if s < 0 or not math.isfinite(b):
        raise ValueError("need s >= 0 and finite b")
    return list(_certified_roots(n, as_fraction(float(s)), as_fraction(float(b))))


@lru_cache(maxsize=4096)
def _certified_roots(n: int, s: Fraction, b: Fraction) -> tuple[float, ...]:
    poly = _univariate_in_a(n, s, b)
    roots = []
    for lo, hi, mult in isolate_real_roots(poly, ROOT_TOL):
        mid = (lo + hi) / 2
        if mult == 1:
            # the interval certifies the root; Newton only adds digits inside it
            fine = _newton(poly, float(mid), 20)
            if fine is not None and lo <= fine <= hi:
                mid = fine
        roots.extend([float(mid)] * mult)
    if len(roots) != n + 1:
        raise RootCountMismatch(
            f"c_{n + 1}(a, b={float(b)}) at s={float(s)}: {len(roots)} certified real roots, "
            f"expected {n + 1}"
        )
    return tuple(roots)


def exact_series_coefficients(n: int, s, a, b, count: int) -> list[Fraction]:
    """c_0 .. c_{count-1} in exact arithmetic at W = W^{(n)}.

    Float inputs are taken at their exact binary value, so the only rounding is
    the one already present in the arguments.
    """
    s, a, b = as_fraction(s), as_fraction(a), as_fraction(b)
    W = 2 * (n + s + 1) - b * b / 4
    prev, cur = Fraction(0), Fraction(1)
    out = [cur]
    for j in range(-1, count - 2):
        den = 2 * (j + 2) * (j + 2 * s + 2)
        A = (2 * a + b * (2 * j + 2 * s + 3)) / den
        B = (4 * (2 * j + 2 * s - W + 2) - b * b) / (2 * den)
        prev, cur = cur, A * cur + B * prev
        out.append(cur)
    return out[:count]


def _newton(poly: list[Fraction], a0, digits: int):
    """Newton iterates on an exact polynomial (ascending coefficients) in mpmath."""
    with mpmath.workdps(digits + 10):
        desc = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(poly)]
        deriv = [k * c for k, c in zip(range(len(desc) - 1, 0, -1), desc[:-1])]
        a = mpmath.mpf(a0)
        for _ in range(8):
            slope = mpmath.polyval(deriv, a)
            if slope == 0:
                return None
            step = mpmath.polyval(desc, a) / slope
            a -= step
            if abs(step) <= mpmath.mpf(10) ** -digits * max(1, abs(a)):
                break
        man, exp = a.man_exp  # man_exp drops the sign
        value = Fraction(int(man)) * Fraction(2) ** int(exp)
        return -value if a < 0 else value


def polish_root(n: int, s, b, a0: float, digits: int = 40) -> Fraction:
    """Newton-refine a root of c_{n+1}(., b) far below double rounding.

    Needed for the closed form: at b << 0 the factor exp(-b x/2) amplifies the
    1e-13 tail left by a double-precision root into a visible ODE residual.
    """
    a = _newton(_univariate_in_a(n, as_fraction(s), as_fraction(b)), a0, digits)
    if a is None or abs(a - as_fraction(a0)) > 1e-9 * max(1.0, abs(a0)):
        return as_fraction(a0)  # double root or a wandering iterate: keep the certified value
    return a


@dataclass(frozen=True)
class TruncationSolution:
    n: int
    i: int
    s: float
    b: float
    a_root: float
    W: float
    coeffs: tuple[float, ...]
    tail: tuple[float, float] = (0.0, 0.0)
    residual: float | None = field(default=None, compare=False)
    # the same coefficients before rounding; the residual check evaluates these
    exact_coeffs: tuple[Fraction, ...] | None = field(default=None, compare=False, repr=False)

    @property
    def params(self) -> RadialParameters:
        return RadialParameters.from_s(self.s, self.a_root, self.b)

    def polynomial(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(self.coeffs)


def assemble_polynomial_solution(n: int, i: int, s: float, b: float, *, tol: float = COEFF_TOL,
                                 certify_residual: bool = True) -> TruncationSolution:
    """Closed-form solution on the i-th (1-based, ascending in a) root branch.

    The coefficients come from the recurrence run exactly at the rounded root:
    the float recurrence loses up to 1e-6 relative to cancellation when b << 0.
    """
    if not 1 <= i <= n + 1:
        raise ValueError(f"root index i must be in 1..{n + 1}, got {i}")
    a_root = truncation_roots(n, s, b)[i - 1]
    W = truncation_energy(n, s, b)
    full = exact_series_coefficients(n, s, polish_root(n, s, b, a_root), b, n + 3)
    scale = max(abs(c) for c in full[: n + 1])
    tail = (float(abs(full[n + 1]) / scale), float(abs(full[n + 2]) / scale))
    if max(tail) > tol:
        raise CertificationFailed(
            f"n={n}, i={i}: |c_n+1|, |c_n+2| relative = {tail} exceed {tol}"
        )
    sol = TruncationSolution(n=n, i=i, s=float(s), b=float(b), a_root=a_root, W=W,
                             coeffs=tuple(float(c) for c in full[: n + 1]), tail=tail,
                             exact_coeffs=tuple(full[: n + 1]))
    if certify_residual:
        from .oracle import ode_residual

        sol = replace(sol, residual=ode_residual(sol))
    return sol


@dataclass
class CurveTable:
    n: int
    s: float
    b: np.ndarray
    branches: np.ndarray  # shape (len(b), n+1), columns follow continuation
    crossings: list[float] = field(default_factory=list)

    def rows(self):
        for bv, row in zip(self.b, self.branches):
            yield [float(bv), *map(float, row)]

    @property
    def header(self) -> list[str]:
        return ["b", *[f"a_{k}" for k in range(1, self.n + 2)]]


def curve_sweep(n: int, s: float, b_values, *, crossing_tol: float = 1e-6) -> CurveTable:
    """Roots a^{(n,i)}(b) over a b grid, continued branch by branch.

    Consecutive samples are matched by minimal total displacement; near-collisions
    are recorded (and warned) rather than treated as errors.
    """
    b_values = np.asarray(list(b_values), dtype=float)
    if b_values.size == 0 or not np.all(np.isfinite(b_values)):
        raise ValueError("b grid must be non-empty and finite")
    table = np.empty((b_values.size, n + 1))
    crossings = []
    prev = None
    for k, bv in enumerate(b_values):
        roots = np.array(truncation_roots(n, s, float(bv)))
        gaps = np.diff(roots)
        if gaps.size and gaps.min() <= crossing_tol * max(1.0, np.abs(roots).max()):
            crossings.append(float(bv))
        if prev is not None:
            cost = np.abs(prev[:, None] - roots[None, :])
            _, cols = linear_sum_assignment(cost)
            roots = roots[cols]
        table[k] = roots
        prev = roots
    if crossings:
        warnings.warn(f"branches approach within tolerance at b = {crossings}", BranchCrossing,
                      stacklevel=2)
    return CurveTable(n=n, s=float(s), b=b_values, branches=table, crossings=crossings)
