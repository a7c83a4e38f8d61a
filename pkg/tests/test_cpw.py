"""Resonator mode solver: root properties and lumped-parameter oracles."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from ltcsim import cpw
from ltcsim.errors import SolverError

# quarter-wave line used throughout: 0.5 cm arm, 0.5 nH terminator
STD = cpw.CpwSpec(d=0.50, L_l=4.37, C_l=1586.42, L_S=0.5)


def test_wavevector_satisfies_transcendental_root():
    k = cpw.solve_mode_wavevector(STD, 0)
    kd = k * STD.d
    assert 0.0 < kd < math.pi / 2.0
    assert kd * math.tan(kd) == pytest.approx(STD.d * STD.L_l / STD.L_S, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    d=st.floats(min_value=0.1, max_value=3.0),
    L_l=st.floats(min_value=1.0, max_value=10.0),
    C_l=st.floats(min_value=300.0, max_value=3000.0),
    L_S=st.floats(min_value=0.05, max_value=5.0),
    m=st.integers(min_value=0, max_value=3),
)
def test_wavevector_root_property(d, L_l, C_l, L_S, m):
    spec = cpw.CpwSpec(d=d, L_l=L_l, C_l=C_l, L_S=L_S)
    k = cpw.solve_mode_wavevector(spec, m)
    kd = k * d
    assert m * math.pi < kd < m * math.pi + math.pi / 2.0
    assert kd * math.tan(kd) == pytest.approx(d * L_l / L_S, abs=1e-7 * (1 + d * L_l / L_S))


def test_stiff_terminator_approaches_quarter_wave():
    # L_S -> 0 pins the far end at a current antinode: kd -> pi/2
    spec = cpw.CpwSpec(d=0.50, L_l=4.37, C_l=1586.42, L_S=0.01)
    kd = cpw.solve_mode_wavevector(spec, 0) * spec.d
    assert kd == pytest.approx(math.pi / 2.0, abs=1e-2)


def test_standard_mode_parameters():
    p = cpw.fundamental_mode(STD)
    # independent closed forms from the solved wave vector
    kd = p.k * STD.d
    v = 1.0 / math.sqrt(STD.L_l * STD.C_l * 1e-24)  # cm/s
    assert p.freq == pytest.approx(p.k * v / (2.0 * math.pi) / 1e9, rel=1e-9)
    assert p.C_k == pytest.approx(
        STD.d * STD.C_l / 2.0 * (1.0 + math.sin(2.0 * kd) / (2.0 * kd)), rel=1e-12
    )
    assert p.eta == pytest.approx(math.cos(kd), rel=1e-12)
    assert p.freq == pytest.approx(4.9119, abs=2e-4)
    assert p.C_k == pytest.approx(480.14, abs=0.01)
    assert p.E_C == pytest.approx(0.040343, abs=1e-5)
    assert p.E_L == pytest.approx(74.755, abs=5e-3)


def test_mode_energies_consistent_oscillator():
    p = cpw.fundamental_mode(STD)
    assert math.sqrt(8.0 * p.E_C * p.E_L) == pytest.approx(p.freq, rel=1e-9)
    assert p.phi_zpf * p.n_zpf == pytest.approx(0.5, rel=1e-12)


def test_mode_from_energies_roundtrip():
    p = cpw.fundamental_mode(STD)
    q = cpw.mode_from_energies(p.E_C, p.E_L, p.eta)
    assert q.freq == pytest.approx(p.freq, rel=1e-12)
    assert q.C_k == pytest.approx(p.C_k, rel=1e-12)
    assert q.eta == p.eta
    with pytest.raises(ValueError):
        cpw.mode_from_energies(-1.0, 74.0, 0.3)


def test_sweep_monotone_in_terminator():
    grid = [0.1 + 0.1 * i for i in range(10)]
    rows = cpw.sweep_vs_terminator(STD, grid)
    freqs = [r["freq_GHz"] for r in rows if "error" not in r]
    assert len(freqs) == len(grid)
    # a softer terminator pushes the mode down in frequency
    assert all(a > b for a, b in zip(freqs, freqs[1:]))


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError):
        cpw.sweep_vs_terminator(STD, [])


def test_negative_mode_index_rejected():
    with pytest.raises(ValueError):
        cpw.solve_mode_wavevector(STD, -1)
