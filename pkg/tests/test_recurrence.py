import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from qes_oscillator.model import RadialParameters
from qes_oscillator.recurrence import (
    BranchCrossing,
    CertificationFailed,
    MAX_LEVEL,
    assemble_polynomial_solution,
    build_truncation_polynomial,
    curve_sweep,
    exact_series_coefficients,
    polish_root,
    recurrence_coefficients,
    series_coefficients,
    truncation_energy,
    truncation_roots,
    truncation_scale,
)

A, B, S, X = sympy.symbols("a b s x")

# Integer-coefficient truncation conditions for n = 0..3, typed in independently.
REFERENCE_FORMS = {
    0: "2*a + b*(2*s + 1)",
    1: "4*a**2 + 8*a*b*(s + 1) + b**2*(2*s + 1)*(2*s + 3) - 8*(2*s + 1)",
    2: ("8*a**3 + 12*a**2*b*(2*s + 3) + 2*a*b**2*(12*s**2 + 36*s + 23) - 32*a*(4*s + 3)"
        " + b**3*(2*s + 1)*(2*s + 3)*(2*s + 5) - 16*b*(2*s + 1)*(4*s + 7)"),
    3: ("16*a**4 + 64*a**3*b*(s + 2) + 8*a**2*b**2*(12*s**2 + 48*s + 43) - 640*a**2*(s + 1)"
        " + 16*a*b**3*(4*s**3 + 24*s**2 + 43*s + 22) - 128*a*b*(10*s**2 + 30*s + 17)"
        " + b**4*(2*s + 1)*(2*s + 3)*(2*s + 5)*(2*s + 7) - 32*b**2*(2*s + 1)*(10*s**2 + 45*s + 47)"
        " + 576*(2*s + 1)*(2*s + 3)"),
}


def as_sympy(poly):
    syms = {"a": A, "b": B, "s": S}
    expr = 0
    for exps, coeff in poly.terms.items():
        term = sympy.Integer(coeff.numerator) / coeff.denominator
        for name, e in zip(poly.variables, exps):
            term *= syms[name] ** e
        expr += term
    return sympy.expand(expr)


# -- recurrence ----------------------------------------------------------------


def test_recurrence_coefficient_examples():
    assert recurrence_coefficients(-1, 0, 1, 0, 123.0)[0] == 1
    assert recurrence_coefficients(0, 0, 0, 0, 2)[1] == 0
    assert recurrence_coefficients(0, 0, 0, 0, 4)[1] == -0.5
    with pytest.raises(ValueError):
        recurrence_coefficients(-2, 0, 0, 0, 0)


def test_recurrence_derived_from_ansatz():
    """Plug f(x) x^k into the radial operator and read off A_j, B_j."""
    x = sympy.symbols("x", positive=True)
    k, W = sympy.symbols("k W")
    f = x**S * sympy.exp(-B * x / 2 - x**2 / 2)
    psi = f * x**k
    op = sympy.diff(psi, x, 2) + sympy.diff(psi, x) / x - (S**2 / x**2 + A / x + B * x + x**2 - W) * psi
    # x^2 op / psi = alpha_k + beta_k x + gamma_k x^2
    poly = sympy.Poly(sympy.powsimp(sympy.expand(op * x**2 / psi), force=True), x)
    assert poly.degree() == 2
    gamma, beta, alpha = poly.all_coeffs()
    j = sympy.symbols("j")
    A_j = -beta.subs(k, j + 1) / alpha.subs(k, j + 2)
    B_j = -gamma.subs(k, j) / alpha.subs(k, j + 2)
    for jv, sv, av, bv, wv in [(-1, 0, 1, 0, 3), (0, 0.5, -1.2, 0.7, 5.1), (3, 2, 2.5, -1.5, 9)]:
        subs = {j: jv, S: sv, A: av, B: bv, W: wv}
        mine = recurrence_coefficients(jv, sv, av, bv, wv)
        assert float(A_j.subs(subs)) == pytest.approx(mine[0], rel=1e-14, abs=1e-15)
        assert float(B_j.subs(subs)) == pytest.approx(mine[1], rel=1e-14, abs=1e-15)


@pytest.mark.parametrize(
    "params, W, count, expected",
    [
        (RadialParameters(0.0), 2, 3, [1, 0, 0]),
        (RadialParameters(0.0, math.sqrt(2)), 4, 4, [1, math.sqrt(2), 0, 0]),
        (RadialParameters(0.0), 0, 3, [1, 0, 0.5]),
    ],
)
def test_series_coefficient_examples(params, W, count, expected):
    assert series_coefficients(params, W, count) == pytest.approx(expected, abs=1e-15)


def test_series_needs_positive_count():
    with pytest.raises(ValueError):
        series_coefficients(RadialParameters(0.0), 2, 0)


@pytest.mark.parametrize("n, s, b, W", [(0, 0, 0, 2), (8, 0, 1, 17.75), (3, 2, 2, 11)])
def test_truncation_energy_examples(n, s, b, W):
    assert truncation_energy(n, s, b) == W


def test_exact_series_matches_float_series():
    exact = exact_series_coefficients(2, Fraction(1, 2), Fraction(3, 4), Fraction(-1, 2), 6)
    W = truncation_energy(2, 0.5, -0.5)
    floats = series_coefficients(RadialParameters.from_s(0.5, 0.75, -0.5), W, 6)
    assert [float(c) for c in exact] == pytest.approx(floats, rel=1e-14, abs=1e-15)


# -- truncation polynomials --------------------------------------------------------


@pytest.mark.parametrize("n", range(4))
def test_bit_exact_reference_forms(n):
    ours = as_sympy(build_truncation_polynomial(n))
    expected = sympy.expand(sympy.sympify(REFERENCE_FORMS[n], locals={"a": A, "b": B, "s": S}))
    assert sympy.expand(ours - expected) == 0
    # integer coefficients with content 1
    coeffs = sympy.Poly(ours, A, B, S).coeffs()
    assert all(c.is_integer for c in coeffs)
    assert math.gcd(*[int(c) for c in coeffs]) == 1


def test_quartic_slice():
    p = build_truncation_polynomial(3, 0).substitute(b=0)
    assert p.univariate("a") == [1728, 0, -640, 0, 16]


@pytest.mark.parametrize("n", range(11))
def test_degrees(n):
    p = build_truncation_polynomial(n)
    assert p.degree("a") == n + 1
    assert p.degree("b") == n + 1
    assert p.leading_coefficient("a").evaluate(b=0, s=0) > 0


@pytest.mark.parametrize("n", range(7))
def test_series_consistency(n):
    rng = np.random.default_rng(100 + n)
    for s in (0, 0.5, 1.5):
        exact = build_truncation_polynomial(n, s)
        scale = truncation_scale(n, s)
        W = truncation_energy(n, s, 0)
        for a, b in rng.uniform(-3, 3, size=(4, 2)):
            W = truncation_energy(n, s, b)
            c = series_coefficients(RadialParameters.from_s(s, a, b), W, n + 2)[n + 1]
            predicted = float(scale * exact.evaluate(a=Fraction(a), b=Fraction(b)))
            assert predicted == pytest.approx(c, rel=1e-12, abs=1e-14 * max(1, abs(c)))


def test_level_guard():
    with pytest.raises(ValueError):
        build_truncation_polynomial(MAX_LEVEL + 1)
    with pytest.raises(ValueError):
        truncation_roots(-1, 0, 0)


# -- roots -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "n, s, b, expected",
    [
        (0, 0, 2, [-1]),
        (1, 0, 0, [-math.sqrt(2), math.sqrt(2)]),
        (3, 0, 0, [-math.sqrt(20 + math.sqrt(292)), -math.sqrt(20 - math.sqrt(292)),
                   math.sqrt(20 - math.sqrt(292)), math.sqrt(20 + math.sqrt(292))]),
    ],
)
def test_truncation_root_examples(n, s, b, expected):
    assert truncation_roots(n, s, b) == pytest.approx(expected, abs=1e-12)


def test_quartic_roots_rounded():
    assert [round(r, 5) for r in truncation_roots(3, 0, 0)] == [-6.08999, -1.70646, 1.70646, 6.08999]


@given(st.integers(0, 10), st.sampled_from([0, 0.5, 1, 1.5, 2]), st.floats(-4, 4))
def test_all_roots_real(n, s, b):
    roots = truncation_roots(n, s, b)
    assert len(roots) == n + 1
    assert roots == sorted(roots)


def test_roots_solve_the_condition():
    for n in (2, 5, 8):
        p = build_truncation_polynomial(n, 1)
        for r in truncation_roots(n, 1, 0.75):
            value = float(p.evaluate(a=Fraction(r), b=Fraction(0.75)))
            deriv = float(p.derivative("a").evaluate(a=Fraction(r), b=Fraction(0.75)))
            assert abs(value / deriv) <= 1e-12 * max(1, abs(r))


def test_polish_root_adds_digits():
    a = polish_root(1, 0, 0, 1.4142135623)
    assert abs(a * a - 2) < Fraction(1, 10**35)
    # a start far outside the certified neighbourhood is handed back untouched
    assert polish_root(1, 0, 0, 1.4) == Fraction(1.4)
    # a double root has zero slope: the input comes back unchanged
    assert polish_root(0, 0, 0, 0.0) == 0


# -- assembled solutions -----------------------------------------------------------


def test_ground_state_solution():
    sol = assemble_polynomial_solution(0, 1, 0, 0)
    assert sol.a_root == 0 and sol.W == 2 and sol.coeffs == (1.0,)
    assert sol.residual <= 1e-14


def test_first_excited_solution():
    sol = assemble_polynomial_solution(1, 2, 0, 0)
    assert sol.a_root == pytest.approx(math.sqrt(2), abs=1e-15)
    assert sol.W == 4
    assert sol.coeffs == pytest.approx((1, math.sqrt(2)), abs=1e-15)
    assert sol.residual <= 1e-12


def test_quartic_solution():
    sol = assemble_polynomial_solution(3, 4, 0, 0)
    assert sol.a_root == pytest.approx(6.08999, abs=1e-5)
    assert sol.W == 8
    assert len(sol.coeffs) == 4 and sol.coeffs[0] == 1


@pytest.mark.parametrize("n", [2, 6, 10])
@pytest.mark.parametrize("s", [0, 0.5, 2])
@pytest.mark.parametrize("b", [-4, 1.3])
def test_certification_invariants(n, s, b):
    for i in (1, n + 1):
        sol = assemble_polynomial_solution(n, i, s, b, certify_residual=False)
        assert sol.coeffs[0] == 1
        assert max(sol.tail) <= 1e-10
        assert sol.W == truncation_energy(n, s, b)


def test_bad_root_index():
    with pytest.raises(ValueError):
        assemble_polynomial_solution(2, 4, 0, 0)


def test_certification_rejects_loose_tolerance():
    with pytest.raises(CertificationFailed):
        assemble_polynomial_solution(3, 2, 0, 0.3, tol=0.0)


# -- branch sweeps ----------------------------------------------------------------


def test_linear_branch():
    table = curve_sweep(0, 0, [0, 1, 2])
    assert table.branches[:, 0] == pytest.approx([0, -0.5, -1])
    assert table.header == ["b", "a_1"]


def test_sweep_rows_at_zero():
    table = curve_sweep(3, 0, np.linspace(-1, 1, 5))
    assert sorted(table.branches[2]) == pytest.approx(truncation_roots(3, 0, 0))
    assert list(table.rows())[2][0] == 0
    table = curve_sweep(1, 0, [0.0])
    assert table.branches[0] == pytest.approx([-math.sqrt(2), math.sqrt(2)])


def test_branches_stay_continuous():
    b = np.linspace(-4, 4, 81)
    table = curve_sweep(3, 0, b)
    jumps = np.abs(np.diff(table.branches, axis=0))
    assert jumps.max() < 1.0
    assert not table.crossings


def test_close_approach_is_flagged_not_fatal():
    with pytest.warns(BranchCrossing):
        table = curve_sweep(1, 0, [0.0, 0.1], crossing_tol=10.0)
    assert table.crossings == [0.0, 0.1]


def test_sweep_rejects_bad_grid():
    with pytest.raises(ValueError):
        curve_sweep(1, 0, [])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(ValueError):
            curve_sweep(1, 0, [0.0, math.nan])
