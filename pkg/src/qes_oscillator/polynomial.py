"""Exact polynomial arithmetic over the rationals and certified real-root isolation.

Multivariate polynomials are sparse maps from exponent tuples to
:class:`fractions.Fraction`. Univariate helpers work on dense coefficient lists,
lowest degree first.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from numbers import Rational

Number = int | Fraction


def as_fraction(value) -> Fraction:
    """Exact conversion; floats are taken at their binary value."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot convert {value!r} to a rational")
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


class RationalPolynomial:
    """Sparse polynomial with rational coefficients in named variables."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms=None):
        self.variables = tuple(variables)
        cleaned = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(self.variables):
                raise ValueError(f"exponent {exps} does not match variables {self.variables}")
            coeff = as_fraction(coeff)
            if coeff:
                cleaned[exps] = cleaned.get(exps, Fraction(0)) + coeff
                if not cleaned[exps]:
                    del cleaned[exps]
        self.terms = cleaned

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, variables, value) -> "RationalPolynomial":
        return cls(variables, {(0,) * len(tuple(variables)): value})

    @classmethod
    def variable(cls, variables, name) -> "RationalPolynomial":
        variables = tuple(variables)
        exps = tuple(1 if v == name else 0 for v in variables)
        if sum(exps) != 1:
            raise ValueError(f"{name!r} is not one of {variables}")
        return cls(variables, {exps: 1})

    def _coerce(self, other) -> "RationalPolynomial":
        if isinstance(other, RationalPolynomial):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        return RationalPolynomial.constant(self.variables, other)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, Fraction(0)) + c
        return RationalPolynomial(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return RationalPolynomial(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = RationalPolynomial.constant(self.variables, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, RationalPolynomial):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"RationalPolynomial({self.variables}, {self.format()})"

    # -- inspection -------------------------------------------------------
    def _index(self, name) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ValueError(f"{name!r} is not one of {self.variables}") from None

    def degree(self, name) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        k = self._index(name)
        return max((e[k] for e in self.terms), default=-1)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficient(self, **powers) -> Fraction:
        exps = tuple(powers.get(v, 0) for v in self.variables)
        return self.terms.get(exps, Fraction(0))

    def leading_coefficient(self, name) -> "RationalPolynomial":
        """Coefficient of the highest power of ``name``, as a polynomial in the rest."""
        k = self._index(name)
        d = self.degree(name)
        rest = self.variables[:k] + self.variables[k + 1:]
        return RationalPolynomial(
            rest, {e[:k] + e[k + 1:]: c for e, c in self.terms.items() if e[k] == d}
        )

    def content(self) -> Fraction:
        """Positive rational g with self/g having coprime integer coefficients."""
        if not self.terms:
            return Fraction(0)
        nums = abs(reduce(math.gcd, (c.numerator for c in self.terms.values())))
        dens = reduce(math.lcm, (c.denominator for c in self.terms.values()))
        return Fraction(nums, dens)

    def canonical(self, lead_variable: str | None = None) -> "RationalPolynomial":
        """Integer coefficients with content 1 and a positive leading coefficient.

        The sign is fixed by the lexicographically highest term with respect to
        ``lead_variable`` first (default: the first variable).
        """
        if not self.terms:
            return self
        g = self.content()
        lead = lead_variable or self.variables[0]
        k = self._index(lead)
        top = max(self.terms, key=lambda e: (e[k],) + e)
        if self.terms[top] < 0:
            g = -g
        return RationalPolynomial(self.variables, {e: c / g for e, c in self.terms.items()})

    def derivative(self, name) -> "RationalPolynomial":
        k = self._index(name)
        out = {}
        for exps, c in self.terms.items():
            if exps[k]:
                e = list(exps)
                e[k] -= 1
                out[tuple(e)] = c * exps[k]
        return RationalPolynomial(self.variables, out)

    def evaluate(self, **values):
        """Evaluate at numeric values for every variable.

        Exact when all values are ints/Fractions; float otherwise.
        """
        missing = [v for v in self.variables if v not in values]
        if missing:
            raise ValueError(f"missing values for {missing}")
        point = [values[v] for v in self.variables]
        exact = all(isinstance(x, (int, Fraction)) for x in point)
        total = Fraction(0) if exact else 0.0
        for exps, c in self.terms.items():
            term = c if exact else float(c)
            for x, p in zip(point, exps):
                if p:
                    term = term * x**p
            total += term
        return total

    def substitute(self, **values) -> "RationalPolynomial":
        """Exact substitution of rational values; removes those variables."""
        idx = [i for i, v in enumerate(self.variables) if v in values]
        keep = [i for i, v in enumerate(self.variables) if v not in values]
        vals = {i: as_fraction(values[self.variables[i]]) for i in idx}
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            term = c
            for i in idx:
                if exps[i]:
                    term *= vals[i] ** exps[i]
            key = tuple(exps[i] for i in keep)
            out[key] = out.get(key, Fraction(0)) + term
        return RationalPolynomial([self.variables[i] for i in keep], out)

    def univariate(self, name=None) -> list[Fraction]:
        """Dense coefficients (low to high) of a polynomial in a single variable."""
        if len(self.variables) != 1 or (name is not None and self.variables[0] != name):
            raise ValueError(f"not univariate in {name!r}: {self.variables}")
        d = self.degree(self.variables[0])
        coeffs = [Fraction(0)] * (d + 1)
        for (p,), c in self.terms.items():
            coeffs[p] = c
        return coeffs

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, reverse=True):
            c = self.terms[exps]
            mono = "*".join(
                v if p == 1 else f"{v}^{p}" for v, p in zip(self.variables, exps) if p
            )
            if mono:
                coeff = "" if c == 1 else "-" if c == -1 else f"{c}*"
                parts.append(f"{coeff}{mono}")
            else:
                parts.append(str(c))
        return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# Univariate exact arithmetic (dense, low degree first)
# ---------------------------------------------------------------------------


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_derivative(p):
    return _trim([k * c for k, c in enumerate(p)][1:])


def poly_divmod(num, den):
    num = [Fraction(c) for c in _trim(num)]
    den = [Fraction(c) for c in _trim(den)]
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    if len(num) < len(den):
        return [], num
    quot = [Fraction(0)] * (len(num) - len(den) + 1)
    lead = den[-1]
    while len(num) >= len(den) and num:
        shift = len(num) - len(den)
        factor = num[-1] / lead
        quot[shift] = factor
        for k, c in enumerate(den):
            num[k + shift] -= factor * c
        num = _trim(num)
    return _trim(quot), num


def _monic(p):
    p = _trim(p)
    return [c / p[-1] for c in p] if p else p


def poly_gcd(p, q):
    p, q = _trim(p), _trim(q)
    while q:
        p, q = q, poly_divmod(p, q)[1]
    return _monic(p)


def _primitive(p):
    """Scale to coprime integers (keeps sign); speeds up exact evaluation."""
    p = [Fraction(c) for c in _trim(p)]
    if not p:
        return p
    den = reduce(math.lcm, (c.denominator for c in p))
    ints = [int(c * den) for c in p]
    g = abs(reduce(math.gcd, ints))
    return [c // g for c in ints]


def squarefree_decomposition(p):
    """Yun's algorithm: list of (factor, multiplicity) with squarefree, coprime factors."""
    p = _monic(p)
    if len(p) <= 1:
        return []
    dp = poly_derivative(p)
    a = poly_gcd(p, dp)
    b = poly_divmod(p, a)[0]
    c = poly_divmod(dp, a)[0]
    d = [x - y for x, y in _zip_pad(c, poly_derivative(b))]
    out = []
    k = 1
    while len(_trim(b)) > 1:
        a = poly_gcd(b, d)
        if len(a) > 1:
            out.append((a, k))
        b = poly_divmod(b, a)[0]
        c = poly_divmod(d, a)[0]
        d = [x - y for x, y in _zip_pad(c, poly_derivative(b))]
        k += 1
    return out


def _zip_pad(p, q):
    n = max(len(p), len(q))
    return zip(list(p) + [0] * (n - len(p)), list(q) + [0] * (n - len(q)))


def sturm_sequence(p):
    """Canonical Sturm chain p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k)."""
    seq = [_primitive(p)]
    if len(seq[0]) <= 1:
        return seq
    seq.append(_primitive(poly_derivative(seq[0])))
    while len(seq[-1]) > 1:
        rem = poly_divmod(seq[-2], seq[-1])[1]
        if not rem:
            break
        # positive rescaling keeps the sign pattern
        seq.append([-c for c in _primitive(rem)])
    return seq


def _sign_changes(values):
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)


def _scaled_eval(p, x: Fraction) -> int:
    """den^deg * p(num/den) for integer p: same sign as p(x), integer-only arithmetic."""
    num, den = x.numerator, x.denominator
    acc = 0
    scale = 1
    for c in reversed(p):
        acc = acc * num + c * scale
        scale *= den
    return acc


def _sign_at(p, x) -> int:
    v = _scaled_eval(p, Fraction(x))
    return (v > 0) - (v < 0)


def variations_at(seq, x) -> int:
    return _sign_changes([_sign_at(q, x) for q in seq])


def variations_at_infinity(seq, sign: int) -> int:
    vals = []
    for q in seq:
        deg = len(q) - 1
        lead = q[-1]
        vals.append(lead if (sign > 0 or deg % 2 == 0) else -lead)
    return _sign_changes(vals)


def count_distinct_real_roots(p, lo=None, hi=None) -> int:
    """Sturm count of distinct real roots, on (lo, hi] or the whole line."""
    seq = sturm_sequence(p)
    v_lo = variations_at_infinity(seq, -1) if lo is None else variations_at(seq, lo)
    v_hi = variations_at_infinity(seq, +1) if hi is None else variations_at(seq, hi)
    return v_lo - v_hi


def count_real_roots(p) -> int:
    """Number of real roots counted with multiplicity."""
    return sum(m * count_distinct_real_roots(f) for f, m in squarefree_decomposition(p))


def root_bound(p) -> Fraction:
    """Cauchy bound: every complex root satisfies |z| < bound."""
    p = [Fraction(c) for c in _trim(p)]
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0)) + 1


_SPLITS = (Fraction(1, 2), Fraction(3, 7), Fraction(4, 7), Fraction(5, 11), Fraction(6, 11))


def _split_point(p, lo, hi):
    for t in _SPLITS:
        m = lo + (hi - lo) * t
        if _sign_at(p, m) != 0:
            return m, False
    return lo + (hi - lo) / 2, True


def _isolate_squarefree(p, seq, lo, hi, out):
    """Append isolating intervals (lo, hi) of the squarefree p; endpoints are never roots."""
    n = variations_at(seq, lo) - variations_at(seq, hi)
    if n == 0:
        return
    if n == 1:
        out.append((lo, hi))
        return
    m, exact_root = _split_point(p, lo, hi)
    if exact_root:  # every candidate split is a root, so m itself is one
        eps = (hi - lo) / 1024
        while _sign_at(p, m - eps) == 0 or _sign_at(p, m + eps) == 0 or (
            variations_at(seq, m - eps) - variations_at(seq, m + eps) != 1
        ):
            eps /= 2
        _isolate_squarefree(p, seq, lo, m - eps, out)
        out.append((m - eps, m + eps))
        _isolate_squarefree(p, seq, m + eps, hi, out)
        return
    _isolate_squarefree(p, seq, lo, m, out)
    _isolate_squarefree(p, seq, m, hi, out)


def _refine(p, lo, hi, tol):
    f_lo = _sign_at(p, lo)
    while hi - lo > tol:
        m = (lo + hi) / 2
        f_m = _sign_at(p, m)
        if f_m == 0:
            return m, m
        if f_m == f_lo:
            lo = m
        else:
            hi = m
    return lo, hi


def isolate_real_roots(p, tol=Fraction(1, 10**12)):
    """All real roots of p with multiplicities, certified by Sturm counts.

    Returns a sorted list of ``(lo, hi, multiplicity)`` with rational endpoints,
    ``hi - lo <= tol`` and exactly one distinct root in ``[lo, hi]``.
    """
    tol = as_fraction(tol)
    found = []
    for factor, mult in squarefree_decomposition(p):
        q = _primitive(factor)
        seq = sturm_sequence(q)
        # a power of two keeps every bisection point dyadic
        bound = Fraction(2 ** math.ceil(math.log2(root_bound(q))))
        intervals = []
        _isolate_squarefree(q, seq, -bound, bound, intervals)
        for lo, hi in intervals:
            lo, hi = _refine(q, lo, hi, tol)
            found.append((lo, hi, mult))
    found.sort(key=lambda t: t[0])
    return found
