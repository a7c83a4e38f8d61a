"""Unit-conversion coefficients against direct physical-constant oracles."""

import math

import pytest
from hypothesis import given, strategies as st
from scipy.constants import e, h

from ltcsim import units


def test_charging_energy_oracle():
    # E_C = e^2 / (2 C), recomputed here from scratch for C = 1 fF
    expected = e**2 / (2.0 * 1e-15) / h / 1e9
    assert units.charging_energy(1.0) == pytest.approx(expected, rel=1e-12)
    assert units.E_C_COEF == pytest.approx(19.370229, rel=1e-6)


def test_inductive_energy_oracle():
    phi0 = h / (2.0 * e)
    expected = (phi0 / (2.0 * math.pi)) ** 2 / 1e-9 / h / 1e9
    assert units.inductive_energy(1.0) == pytest.approx(expected, rel=1e-12)
    assert units.E_L_COEF == pytest.approx(163.461513, rel=1e-6)


def test_charge_coupling_coefficient():
    # J = 4 e^2 [C^-1]: exactly eight single-capacitor charging energies
    assert units.J_COEF == pytest.approx(8.0 * units.E_C_COEF, rel=1e-15)


def test_josephson_energy_200na():
    assert units.josephson_energy(200.0) == pytest.approx(99.33670, abs=5e-5)


@given(st.floats(min_value=1e-3, max_value=1e6))
def test_charging_energy_inverse_scaling(c):
    assert units.charging_energy(c) * c == pytest.approx(units.E_C_COEF, rel=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e6))
def test_inductive_energy_inverse_scaling(l):
    assert units.inductive_energy(l) * l == pytest.approx(units.E_L_COEF, rel=1e-12)


@pytest.mark.parametrize("fn", [units.charging_energy, units.inductive_energy,
                                units.josephson_energy])
@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_inputs_rejected(fn, bad):
    with pytest.raises(ValueError):
        fn(bad)
