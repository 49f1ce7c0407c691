import math

import numpy as np
import pytest

from qes_oscillator.model import NegativeGammaSquared
from qes_oscillator.physics import (
    Scenario1Params,
    Scenario2Params,
    TachyonicLevel,
    decoupled_energy_sq,
    frequency_scan,
    map_scenario1,
    map_scenario2,
    scenario2_W,
    solve_scenario1_energy,
    solve_scenario2_energy,
)


def test_map1_coupling_off():
    params, _ = map_scenario1(Scenario1Params(1.0, 1.0, 2, -1, 0.0), 3.7)
    assert params.a == 0 and params.b == 0 and params.gamma_sq == 9


def test_map1_target():
    _, W = map_scenario1(Scenario1Params(1.0, 1.0, 0, 1, 0.0), 1.0)
    assert W == 2


def test_map1_gamma():
    assert Scenario1Params(1.0, 1.0, 0, -1, 0.3).gamma_sq == pytest.approx(0.91, abs=1e-15)


def test_map1_beta_linear_in_energy():
    p = Scenario1Params(2.0, 0.5, 1, 1, 0.4)
    assert map_scenario1(p, 1.5)[0].a == pytest.approx(2 * 0.4 * 1.5)


def test_map2_examples():
    params, _ = map_scenario2(Scenario2Params(1.0, 1.0, 0, 1, 1.0))
    assert (params.a, params.b) == (-1.0, 2.0)
    params, _ = map_scenario2(Scenario2Params(1.0, 1.0, 3, -1, 0.0))
    assert params.a == 0 and params.b == 0


@pytest.mark.parametrize("omega", [0.1, 0.7, 1.0, 4.2])
def test_decoupled_unit_energy(omega):
    up = solve_scenario1_energy(Scenario1Params(1.0, omega, 0, 1, 0.0), 0, "particle")
    down = solve_scenario1_energy(Scenario1Params(1.0, omega, 0, 1, 0.0), 0, "antiparticle")
    assert up.E == pytest.approx(1, abs=1e-8) and down.E == pytest.approx(-1, abs=1e-8)
    e2 = solve_scenario2_energy(Scenario2Params(1.0, omega, 0, 1, 0.0))
    assert e2.W == pytest.approx(2, abs=1e-10) and e2.E == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("m, omega, l, sigma, j", [
    (1.0, 0.5, 1, 1, 0), (2.0, 1.3, -2, -1, 1), (0.7, 3.0, 0, -1, 2), (1.5, 0.2, 3, 1, 1)])
def test_decoupled_closed_form(m, omega, l, sigma, j):
    gamma_sq = (l + (1 - sigma) / 2) ** 2
    expected = decoupled_energy_sq(m, omega, l, sigma, gamma_sq, j)
    assert expected == pytest.approx(
        m * m + m * omega * (2 * (2 * j + abs(l + (1 - sigma) / 2) + 1) - 2 * (l + 0.5) * sigma - 1))
    if expected > 0:
        E1 = solve_scenario1_energy(Scenario1Params(m, omega, l, sigma, 0.0), j).E
        E2 = solve_scenario2_energy(Scenario2Params(m, omega, l, sigma, 0.0), j).E
        assert E1**2 == pytest.approx(expected, abs=1e-8)
        assert E2**2 == pytest.approx(expected, abs=1e-8)


def test_scenario1_self_consistent():
    p = Scenario1Params(1.0, 0.5, 1, 1, 0.2)
    for branch in ("particle", "antiparticle"):
        lvl = solve_scenario1_energy(p, 0, branch)
        assert lvl.defect <= 1e-6
        assert (lvl.E > 0) == (branch == "particle")


def test_scenario2_against_fd():
    p = Scenario2Params(1.0, 0.8, 1, -1, 0.5)
    ritz = solve_scenario2_energy(p, 1)
    fd = solve_scenario2_energy(p, 1, use_fd=True)
    assert math.isfinite(ritz.E) and ritz.defect <= 1e-6
    assert ritz.W == pytest.approx(fd.W, abs=1e-3)


@pytest.mark.parametrize("omega", [0.3, 1.0, 2.5])
def test_scenario2_aligned_spin_is_exact(omega):
    # with sigma = +1 the n = 0 truncation condition holds at every l, so E = m
    lvl = solve_scenario2_energy(Scenario2Params(1.3, omega, 1, 1, 0.4))
    assert lvl.E == pytest.approx(1.3, abs=1e-9)


def test_affine_round_trip_and_branch_symmetry():
    p = Scenario2Params(1.0, 1.7, 2, -1, 0.6)
    up = solve_scenario2_energy(p, 2, "particle")
    down = solve_scenario2_energy(p, 2, "antiparticle")
    assert abs(scenario2_W(p, up.E) - up.W) <= 1e-12
    assert up.E == -down.E


def test_errors():
    with pytest.raises(NegativeGammaSquared):
        Scenario1Params(1.0, 1.0, 0, 1, 0.5)
    with pytest.raises(ValueError):
        Scenario1Params(0.0, 1.0, 0, 1, 0.0)
    with pytest.raises(ValueError):
        Scenario2Params(1.0, -1.0, 0, 1, 0.0)
    with pytest.raises(ValueError):
        Scenario2Params(1.0, 1.0, 0, 0, 0.0)
    with pytest.raises(ValueError):
        solve_scenario2_energy(Scenario2Params(1.0, 1.0, 0, 1, 0.0), 0, "both")
    with pytest.raises(ValueError):
        solve_scenario1_energy(Scenario1Params(1.0, 1.0, 0, 1, 0.0), 0, "both")


def test_scan_is_gap_free():
    rows = frequency_scan(Scenario2Params(1.0, 1.0, 0, -1, 0.3), np.linspace(0.1, 5, 50))
    assert len(rows) == 50 and all(r.ok for r in rows)
    assert max(r.defect for r in rows) <= 1e-6


def _fake_spectrum(monkeypatch, W):
    from qes_oscillator import physics
    monkeypatch.setattr(physics, "eigenvalues", lambda params, N: np.array([W]))


def test_tachyonic_level_reported(monkeypatch):
    _fake_spectrum(monkeypatch, -100.0)
    with pytest.raises(TachyonicLevel):
        solve_scenario2_energy(Scenario2Params(1.0, 1.0, 0, 1, 0.0))


def test_scan_records_failures(monkeypatch):
    _fake_spectrum(monkeypatch, -100.0)
    rows = frequency_scan(Scenario2Params(1.0, 1.0, 0, 1, 0.0), [0.001, 1.0])
    assert rows[0].ok and not rows[1].ok and math.isnan(rows[1].E_particle)
    assert "E^2" in rows[1].error
    with pytest.raises(ValueError):
        frequency_scan(Scenario2Params(1.0, 1.0, 0, 1, 0.0), [0.0])


def test_scan_continuity():
    template = Scenario1Params(1.0, 1.0, 1, 1, 0.2)
    jumps = []
    for count in (6, 11, 21):
        E = [r.E_particle for r in frequency_scan(template, np.linspace(0.5, 1.5, count))]
        jumps.append(np.max(np.abs(np.diff(E))))
    assert 1.6 <= jumps[0] / jumps[1] <= 2.4
    assert 1.6 <= jumps[1] / jumps[2] <= 2.4
