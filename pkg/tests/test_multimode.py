"""Three-mode coupler chain: quadratic-form oracle and degeneracy tests."""

import dataclasses
import math

import numpy as np
import pytest

from ltcsim import config as cfgmod
from ltcsim import multimode
from ltcsim.errors import NumericsError


@pytest.fixture(scope="module")
def mm_spec():
    cfg = cfgmod.load(cfgmod.fixture_path("table7_multimode.cfg"))
    return cfgmod.build_multimode(cfg)


def test_quadratic_modes_oracle():
    # uncoupled diagonal case: w_i = sqrt(M_ii K_ii)
    M = np.diag([8.0 * 0.04, 8.0 * 0.02])
    K = np.diag([74.0, 149.0])
    w = multimode.quadratic_modes(M, K)
    expected = sorted(math.sqrt(M[i, i] * K[i, i]) for i in range(2))
    assert w == pytest.approx(expected, rel=1e-12)


def test_quadratic_modes_two_by_two_splitting():
    # symmetric pair with weak spring coupling: exact +- splitting
    w0, g = 5.0, 0.05
    M = np.eye(2)
    K = np.array([[w0**2, g], [g, w0**2]])
    w = multimode.quadratic_modes(M, K)
    assert w == pytest.approx(
        [math.sqrt(w0**2 - g), math.sqrt(w0**2 + g)], rel=1e-12
    )


def test_quadratic_modes_rejects_unstable():
    with pytest.raises(NumericsError):
        multimode.quadratic_modes(np.eye(2), np.diag([1.0, -1.0]))


def test_chain_degeneracy_without_bridge(mm_spec):
    # cutting the LTC half-wave bridge at the nulling bias leaves three
    # resonator modes within a few MHz of each other
    free = dataclasses.replace(mm_spec, J_c=0.0)
    w = multimode.coupler_mode_frequencies(free, 0.283)
    assert np.max(w) - np.min(w) < 3e-3


def test_bridge_lifts_degeneracy(mm_spec):
    w0 = multimode.coupler_mode_frequencies(
        dataclasses.replace(mm_spec, J_c=0.0), 0.283
    )
    w1 = multimode.coupler_mode_frequencies(mm_spec, 0.283)
    assert np.max(w1) - np.min(w1) > np.max(w0) - np.min(w0)


def test_coupler_modes_continuous(mm_spec):
    grid = np.linspace(0.0, 0.5, 26)
    rows = multimode.coupler_modes(mm_spec, grid)
    assert all("error" not in r for r in rows)
    for key in ("mode1_GHz", "mode2_GHz", "mode3_GHz"):
        vals = np.array([r[key] for r in rows])
        assert np.max(np.abs(np.diff(vals))) < 0.05


def test_spec_validation(mm_spec):
    with pytest.raises(ValueError):
        dataclasses.replace(mm_spec, J_c=-0.1)
