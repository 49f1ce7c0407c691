from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from qes_oscillator.polynomial import (
    RationalPolynomial,
    as_fraction,
    count_distinct_real_roots,
    count_real_roots,
    isolate_real_roots,
    poly_divmod,
    poly_gcd,
    squarefree_decomposition,
    sturm_sequence,
)

V = ("a", "b", "s")
a, b, s = (RationalPolynomial.variable(V, v) for v in V)


def from_roots(roots, extra=()):
    """Ascending coefficients of prod (x - r) times the given extra factor."""
    p = [Fraction(1)]
    for r in roots:
        p = [Fraction(0)] + p
        for k in range(len(p) - 1):
            p[k] -= r * p[k + 1]
    for f in extra:
        q = [Fraction(0)] * (len(p) + len(f) - 1)
        for i, x in enumerate(p):
            for j, y in enumerate(f):
                q[i + j] += x * y
        p = q
    return p


def to_sympy(poly):
    syms = sympy.symbols(poly.variables)
    expr = 0
    for exps, coeff in poly.terms.items():
        term = sympy.Rational(coeff.numerator, coeff.denominator)
        for sym, e in zip(syms, exps):
            term *= sym**e
        expr += term
    return sympy.expand(expr)


def test_as_fraction_exact_binary():
    assert as_fraction(0.5) == Fraction(1, 2)
    assert as_fraction(0.1) == Fraction(3602879701896397, 36028797018963968)
    with pytest.raises(ValueError):
        as_fraction(float("nan"))
    with pytest.raises(TypeError):
        as_fraction("1")


def test_zero_coefficients_never_stored():
    p = a * b - b * a + 3
    assert list(p.terms) == [(0, 0, 0)]
    assert not (a - a)


def test_arithmetic_matches_sympy():
    p = (2 * a + b * (2 * s + 1)) ** 2 - 8 * (2 * s + 1) * a
    A, B, S = sympy.symbols("a b s")
    expected = sympy.expand((2 * A + B * (2 * S + 1)) ** 2 - 8 * (2 * S + 1) * A)
    assert sympy.expand(to_sympy(p) - expected) == 0


def test_degrees_and_coefficients():
    p = 4 * a * a + 8 * a * b * (s + 1) - 8 * (2 * s + 1)
    assert p.degree("a") == 2 and p.degree("b") == 1 and p.total_degree() == 3
    assert p.coefficient(a=2) == 4
    assert p.coefficient(a=1, b=1, s=1) == 8


def test_canonical_clears_denominators_and_fixes_sign():
    p = (-(2 * a + b * (2 * s + 1))) * Fraction(3, 7)
    c = p.canonical("a")
    assert c == 2 * a + b * (2 * s + 1)
    assert c.content() == 1


def test_evaluate_and_substitute():
    p = a * a * s + b
    assert p.evaluate(a=2, b=1, s=3) == 13
    q = p.substitute(s=Fraction(1, 2))
    assert q.evaluate(a=2, b=0) == 2


def test_derivative():
    p = a**3 * b + 5 * a
    assert p.derivative("a") == 3 * a * a * b + 5


def test_univariate_extraction():
    p = (a * a - 2).substitute(b=0, s=0)
    assert p.univariate("a") == [-2, 0, 1]


def test_divmod_and_gcd():
    p = from_roots([1, 2, 3])
    q, r = poly_divmod(p, from_roots([2]))
    assert q == from_roots([1, 3]) and r == []
    assert poly_gcd(from_roots([1, 2]), from_roots([2, 5])) == from_roots([2])


def test_squarefree_matches_sympy():
    p = from_roots([1, 1, 1, 2, 2, -3], extra=[[1, 0, 1]])
    mine = {tuple(f): m for f, m in squarefree_decomposition(p)}
    x = sympy.symbols("x")
    poly = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in p])), x)
    _, factors = sympy.sqf_list(poly)
    expected = {}
    for f, m in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(f.monic().all_coeffs())]
        expected[tuple(coeffs)] = m
    assert {m for m in mine.values()} == set(expected.values())
    for f, m in mine.items():
        lead = f[-1]
        assert tuple(c / lead for c in f) in expected


def test_sturm_sequence_ends_in_constant():
    seq = sturm_sequence(from_roots([0, 1, 2]))
    assert len(seq[-1]) == 1


def test_counts_ignore_complex_roots():
    p = from_roots([Fraction(-1, 3), 2], extra=[[1, 0, 1], [5, 2, 1]])
    assert count_real_roots(p) == 2
    assert count_distinct_real_roots([1, 0, 1]) == 0


def test_counts_with_multiplicity():
    p = from_roots([0, 0, 1, 1, 1, 5])
    assert count_real_roots(p) == 6
    assert count_distinct_real_roots(p) == 3


def test_half_open_interval_count():
    p = from_roots([-2, 0, 3])
    assert count_distinct_real_roots(p, Fraction(-1), Fraction(4)) == 2


roots_strategy = st.lists(
    st.fractions(min_value=-20, max_value=20, max_denominator=50), min_size=1, max_size=7
)


@given(roots_strategy, st.lists(st.integers(1, 3), min_size=7, max_size=7))
def test_isolation_brackets_every_root(roots, mults):
    expanded = [r for r, m in zip(roots, mults) for _ in range(m)]
    p = from_roots(expanded, extra=[[3, 1, 1]])  # plus a complex pair
    found = isolate_real_roots(p, Fraction(1, 10**12))
    assert sum(m for *_, m in found) == len(expanded) == count_real_roots(p)
    distinct = sorted(set(roots))
    assert len(found) == len(distinct)
    for (lo, hi, m), r in zip(found, distinct):
        assert lo <= r <= hi and hi - lo <= Fraction(1, 10**12)
        assert m == sum(mm for rr, mm in zip(roots, mults) if rr == r)


def test_isolation_of_close_irrational_roots():
    # x^2 - 2 and x^2 - 2.0001 have roots 2.5e-5 apart
    p = from_roots([], extra=[[-2, 0, 1], [Fraction(-20001, 10000), 0, 1]])
    found = isolate_real_roots(p)
    assert len(found) == 4
    mids = [float((lo + hi) / 2) for lo, hi, _ in found]
    assert mids[2] == pytest.approx(2**0.5, abs=1e-12)
    assert mids[3] == pytest.approx(2.0001**0.5, abs=1e-12)
