"""Dimensionless radial eigenproblem and its admissibility rules.

The operator is

    -psi'' - psi'/x + (gamma^2/x^2 + a/x + b x + x^2) psi = W psi,

self-adjoint under the weight ``x dx`` on (0, inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class NegativeGammaSquared(ValueError):
    """gamma^2 < 0: the 1/x^2 term is attractive enough to collapse the state."""


class NonFinite(ValueError):
    pass


@dataclass(frozen=True)
class RadialParameters:
    gamma_sq: float
    a: float = 0.0
    b: float = 0.0
    s: float = field(init=False)

    def __post_init__(self):
        for name in ("gamma_sq", "a", "b"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NonFinite(f"{name} must be finite, got {value!r}")
        if self.gamma_sq < 0:
            raise NegativeGammaSquared(
                f"gamma_sq = {self.gamma_sq!r} < 0 is outside the admissible regime"
            )
        object.__setattr__(self, "gamma_sq", float(self.gamma_sq))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "s", math.sqrt(self.gamma_sq))

    @classmethod
    def from_s(cls, s: float, a: float = 0.0, b: float = 0.0) -> "RadialParameters":
        """Build from the Frobenius exponent ``s = |gamma|``.

        ``s * s`` is squared again by ``__post_init__``; for the usual integer and
        half-integer exponents that round trip is exact.
        """
        if not math.isfinite(s):
            raise NonFinite(f"s must be finite, got {s!r}")
        return cls(gamma_sq=float(s) * float(s), a=a, b=b)

    def replace(self, **changes) -> "RadialParameters":
        values = {"gamma_sq": self.gamma_sq, "a": self.a, "b": self.b}
        values.update(changes)
        return RadialParameters(**values)


@dataclass(frozen=True)
class SpectralPoint:
    W: float
    level: int
    params: RadialParameters


def validate(params: RadialParameters | None = None, *, gamma_sq=None, a=0.0, b=0.0) -> RadialParameters:
    """Normalize raw inputs to a :class:`RadialParameters`.

    Accepts either an existing instance (re-checked) or keyword values.
    """
    if params is not None:
        return RadialParameters(gamma_sq=params.gamma_sq, a=params.a, b=params.b)
    if gamma_sq is None:
        raise TypeError("validate() needs params or gamma_sq")
    return RadialParameters(gamma_sq=gamma_sq, a=a, b=b)


def effective_potential(params: RadialParameters, x: float) -> float:
    """Potential of the Liouville-transformed problem for ``u = sqrt(x) psi``.

    ``-u'' + V u = W u`` with ``V = (gamma^2 - 1/4)/x^2 + a/x + b x + x^2``.
    """
    if not x > 0:
        raise ValueError(f"x must be positive, got {x!r}")
    return (params.gamma_sq - 0.25) / (x * x) + params.a / x + params.b * x + x * x
