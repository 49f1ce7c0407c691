"""Rayleigh-Ritz solver in the non-orthogonal basis x^{s+k} exp(-x^2/2).

Every matrix element reduces to the Gaussian moments

    M(p) = int_0^inf x^p exp(-x^2) dx = Gamma((p+1)/2) / 2.

The monomial Gram matrix is catastrophically ill-conditioned (about 1e33 at
N = 30), so the overlap Cholesky factor and the change to the orthonormal basis
are carried out in extended precision; only the final, well-conditioned
symmetric eigenproblem runs in double precision. Cholesky factors of nested
bases are nested, so the operator matrices for any N <= capacity are leading
blocks of one cached computation per exponent s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .model import RadialParameters

DEFAULT_BASIS_SIZE = 30
MIN_BASIS_SIZE = 12
BASIS_STEP = 4
# ceiling on the overlap condition number relative to the extended working precision
CONDITION_CEILING = 1e12
_CAPACITY = 32


class MomentDivergent(ValueError):
    pass


class IllConditioned(np.linalg.LinAlgError):
    """Overlap factorization failed or is too ill-conditioned; reduce N."""


@dataclass(frozen=True)
class BasisSpec:
    s: float
    N: int = DEFAULT_BASIS_SIZE

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"basis size must be >= 1, got {self.N}")
        if not self.s >= 0:
            raise ValueError(f"s must be >= 0, got {self.s}")

    def evaluate(self, x) -> np.ndarray:
        """Basis functions at x, shape (N, len(x))."""
        x = np.asarray(x, dtype=float)
        k = np.arange(self.N)[:, None]
        return x ** (self.s + k) * np.exp(-x * x / 2)


def moment(p: float) -> float:
    if p <= -1:
        raise MomentDivergent(f"int x^{p} exp(-x^2) dx diverges at 0")
    return math.gamma((p + 1) / 2) / 2


def _mp_moment(p):
    if p <= -1:
        raise MomentDivergent(f"int x^{p} exp(-x^2) dx diverges at 0")
    return mpmath.gamma((p + 1) / 2) / 2


def _element_terms(s, k, l):
    """(coefficient, power) pairs of the four operator pieces for <phi_k|.|phi_l>.

    Kinetic plus centrifugal (gamma^2 = s^2) and the x^2 confinement; the 1/x and
    x pieces are separate so a and b stay free parameters.
    """
    q = 2 * s + k + l
    base = [
        ((s + k) * (s + l) + s * s, q - 1),
        (-(2 * s + k + l), q + 1),
        (2, q + 3),
    ]
    return base, [(1, q)], [(1, q + 2)], [(1, q + 1)]


def _sum_moments(terms, moment_fn):
    total = 0
    for coeff, p in terms:
        if coeff == 0:
            continue  # never evaluate a moment with a vanishing multiplier
        total += coeff * moment_fn(p)
    return total


def assemble_matrices(params: RadialParameters, basis: BasisSpec) -> tuple[np.ndarray, np.ndarray]:
    """Double-precision H and S in the raw monomial-Gaussian basis."""
    if abs(basis.s - params.s) > 1e-14 * max(1.0, params.s):
        raise ValueError(f"basis exponent {basis.s} does not match params s={params.s}")
    s, N = params.s, basis.N
    H = np.empty((N, N))
    S = np.empty((N, N))
    for k in range(N):
        for l in range(k, N):
            base, inv_x, lin_x, over = _element_terms(s, k, l)
            h = (_sum_moments(base, moment) + params.a * _sum_moments(inv_x, moment)
                 + params.b * _sum_moments(lin_x, moment))
            H[k, l] = H[l, k] = h
            S[k, l] = S[l, k] = _sum_moments(over, moment)
    return H, S


@dataclass(frozen=True)
class _OrthonormalOperators:
    """Operators in the S-orthonormal basis chi = L^{-1} phi, as float arrays."""

    s: float
    capacity: int
    base: np.ndarray  # kinetic + gamma^2/x^2 + x^2
    inv_x: np.ndarray
    x: np.ndarray
    back: np.ndarray  # L^{-T}: orthonormal coefficients -> phi coefficients
    scaled_overlap: np.ndarray  # D S D, D = diag(S)^{-1/2}
    scaled_inverse_factor: np.ndarray  # L^{-1} D^{-1}; (D S D)^{-1} = its Gram matrix
    dps: int

    _conditions: dict = field(default_factory=dict, repr=False, compare=False)

    def condition(self, N: int) -> float:
        """2-norm condition number of the unit-diagonal overlap of the first N functions."""
        if N not in self._conditions:
            top = np.linalg.norm(self.scaled_overlap[:N, :N], 2)
            inv = np.linalg.norm(self.scaled_inverse_factor[:N, :N], 2) ** 2
            self._conditions[N] = float(top * inv)
        return self._conditions[N]


def _lower_inverse(L, n):
    """Inverse of a lower-triangular mp matrix by forward substitution."""
    inv = mpmath.matrix(n, n)
    for j in range(n):
        inv[j, j] = 1 / L[j, j]
        for i in range(j + 1, n):
            acc = mpmath.fdot((L[i, k], inv[k, j]) for k in range(j, i))
            inv[i, j] = -acc / L[i, i]
    return inv


@lru_cache(maxsize=64)
def _orthonormal_operators(s: float, capacity: int) -> _OrthonormalOperators:
    dps = int(1.25 * capacity) + 40
    with mpmath.workdps(dps):
        ms = mpmath.mpf(s)
        n = capacity
        S = mpmath.matrix(n, n)
        A = mpmath.matrix(n, n)
        I = mpmath.matrix(n, n)
        X = mpmath.matrix(n, n)
        # every power is 2s + m with integer m >= -1: tabulate the moments once
        table = {}

        def cached(p):
            if p not in table:
                table[p] = _mp_moment(p)
            return table[p]

        for k in range(n):
            for l in range(k, n):
                base, inv_x, lin_x, over = _element_terms(ms, k, l)
                S[k, l] = S[l, k] = _sum_moments(over, cached)
                A[k, l] = A[l, k] = _sum_moments(base, cached)
                I[k, l] = I[l, k] = _sum_moments(inv_x, cached)
                X[k, l] = X[l, k] = _sum_moments(lin_x, cached)
        d = [1 / mpmath.sqrt(S[k, k]) for k in range(n)]
        scaled = np.array([[float(S[k, l] * d[k] * d[l]) for l in range(n)] for k in range(n)])
        try:
            L = mpmath.cholesky(S)
        except (ValueError, ZeroDivisionError) as exc:
            raise IllConditioned(f"overlap Cholesky failed at s={s}, N={n}") from exc
        Linv = _lower_inverse(L, n)
        inv_factor = np.array([[float(Linv[k, l] / d[l]) for l in range(n)] for k in range(n)])
        LinvT = Linv.T

        def transform(M):
            return np.array((Linv * M * LinvT).tolist(), dtype=float)

        base_o = transform(A)
        inv_o = transform(I)
        x_o = transform(X)
        back = np.array(LinvT.tolist(), dtype=float)
    sym = lambda m: (m + m.T) / 2  # noqa: E731  (exact symmetry lost only in the last bit)
    return _OrthonormalOperators(s=s, capacity=capacity, base=sym(base_o), inv_x=sym(inv_o),
                                 x=sym(x_o), back=back, scaled_overlap=scaled,
                                 scaled_inverse_factor=inv_factor, dps=dps)


def _operators_for(s: float, N: int) -> _OrthonormalOperators:
    return _orthonormal_operators(float(s), max(N, _CAPACITY))


@dataclass
class SpectrumResult:
    params: RadialParameters
    basis: BasisSpec
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns: coefficients in the phi basis, S-normalized
    condition_estimate: float
    orthonormal_vectors: np.ndarray = field(repr=False)
    _ops: _OrthonormalOperators = field(repr=False)

    def _block(self, M):
        N = self.basis.N
        return M[:N, :N]

    def expectation(self, operator: str, level: int) -> float:
        u = self.orthonormal_vectors[:, level]
        M = {"inv_x": self._ops.inv_x, "x": self._ops.x}[operator]
        return float(u @ self._block(M) @ u)

    def norm(self, level: int) -> float:
        """v^T S v of the stored eigenvector (1 by construction)."""
        u = self.orthonormal_vectors[:, level]
        return float(u @ u)

    def wavefunction(self, level: int, x) -> np.ndarray:
        return self.eigenvectors[:, level] @ self.basis.evaluate(x)


def solve(params: RadialParameters, basis: BasisSpec | int | None = None, *,
          condition_ceiling: float = CONDITION_CEILING) -> SpectrumResult:
    """Generalized symmetric eigenproblem H v = W S v, eigenvalues ascending."""
    if basis is None:
        basis = BasisSpec(params.s)
    elif isinstance(basis, int):
        basis = BasisSpec(params.s, basis)
    N = basis.N
    ops = _operators_for(params.s, N)
    condition = ops.condition(N)
    # the ceiling applies to the digits left over after the extended-precision factorization
    if condition * 10.0 ** -(ops.dps - 16) > condition_ceiling:
        raise IllConditioned(
            f"overlap condition {condition:.3g} exceeds the ceiling at {ops.dps} digits"
        )
    Hn = ops.base[:N, :N] + params.a * ops.inv_x[:N, :N] + params.b * ops.x[:N, :N]
    w, u = np.linalg.eigh(Hn)
    vectors = ops.back[:N, :N] @ u
    return SpectrumResult(params=params, basis=basis, eigenvalues=w, eigenvectors=vectors,
                          condition_estimate=condition,
                          orthonormal_vectors=u, _ops=ops)


def solve_with_fallback(params: RadialParameters, N: int = DEFAULT_BASIS_SIZE) -> SpectrumResult:
    """Solve at N, stepping the basis down by 4 (not below 12) on IllConditioned."""
    while True:
        try:
            return solve(params, BasisSpec(params.s, N))
        except IllConditioned:
            if N - BASIS_STEP < MIN_BASIS_SIZE:
                raise
            N -= BASIS_STEP


def eigenvalues(params: RadialParameters, N: int = DEFAULT_BASIS_SIZE) -> np.ndarray:
    """Ritz values only; the cheap path for root solves and sweeps."""
    while True:
        ops = _operators_for(params.s, N)
        if ops.condition(N) * 10.0 ** -(ops.dps - 16) <= CONDITION_CEILING:
            break
        if N - BASIS_STEP < MIN_BASIS_SIZE:
            raise IllConditioned(f"no usable basis size for s={params.s}")
        N -= BASIS_STEP
    Hn = ops.base[:N, :N] + params.a * ops.inv_x[:N, :N] + params.b * ops.x[:N, :N]
    return np.linalg.eigvalsh(Hn)


def expectation_inverse_x(result: SpectrumResult, level: int) -> float:
    """<1/x> of the S-normalized state: v^T M(2s+k+l) v."""
    return result.expectation("inv_x", level)


def expectation_x(result: SpectrumResult, level: int) -> float:
    """<x> of the S-normalized state: v^T M(2s+k+l+2) v."""
    return result.expectation("x", level)


@dataclass(frozen=True)
class HellmannFeynmanReport:
    level: int
    dW_da_fd: float
    mean_inv_x: float
    dW_db_fd: float
    mean_x: float

    @property
    def defects(self) -> tuple[float, float]:
        return abs(self.dW_da_fd - self.mean_inv_x), abs(self.dW_db_fd - self.mean_x)

    @property
    def positive(self) -> bool:
        return self.dW_da_fd > 0 and self.dW_db_fd > 0


def hellmann_feynman_check(params: RadialParameters, basis: BasisSpec | int | None = None,
                           level: int = 0, step: float = 1e-4) -> HellmannFeynmanReport:
    """Central differences of W_level in a and b against <1/x> and <x>."""
    if step <= 0:
        raise ValueError("step must be positive")
    center = solve(params, basis)
    N = center.basis.N
    ha = step * max(1.0, abs(params.a))
    hb = step * max(1.0, abs(params.b))

    def W(**shift):
        return solve(params.replace(**shift), N).eigenvalues[level]

    dW_da = (W(a=params.a + ha) - W(a=params.a - ha)) / (2 * ha)
    dW_db = (W(b=params.b + hb) - W(b=params.b - hb)) / (2 * hb)
    return HellmannFeynmanReport(level=level, dW_da_fd=float(dW_da),
                                 mean_inv_x=expectation_inverse_x(center, level),
                                 dW_db_fd=float(dW_db), mean_x=expectation_x(center, level))


@dataclass
class SweepTable:
    s: float
    b: float
    N: int
    a: np.ndarray
    W: np.ndarray  # shape (len(a), levels), NaN where flagged
    flags: list[str]

    @property
    def header(self) -> list[str]:
        return ["a", *[f"W_{j}" for j in range(self.W.shape[1])], "flag"]

    def rows(self):
        for a, row, flag in zip(self.a, self.W, self.flags):
            yield [float(a), *map(float, row), flag]


def spectrum_sweep(s: float, b: float, a_grid, levels: int, N: int = DEFAULT_BASIS_SIZE) -> SweepTable:
    """Lowest ``levels`` Ritz eigenvalues W_j(a) at fixed s, b."""
    a_grid = np.asarray(list(a_grid), dtype=float)
    if not np.all(np.isfinite(a_grid)):
        raise ValueError("a grid must be finite")
    if levels > N:
        raise ValueError(f"cannot report {levels} levels from a basis of {N}")
    out = np.full((a_grid.size, levels), np.nan)
    flags = []
    for k, a in enumerate(a_grid):
        try:
            out[k] = solve(RadialParameters.from_s(s, a, b), N).eigenvalues[:levels]
            flags.append("")
        except IllConditioned:
            flags.append("ill-conditioned")
    return SweepTable(s=float(s), b=float(b), N=N, a=a_grid, W=out, flags=flags)
