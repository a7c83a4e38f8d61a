"""Unit conventions and conversion constants.

Everything downstream works in a single unit system: lengths in cm,
inductances in nH, capacitances in fF, energies and frequencies in GHz
(linear frequency, i.e. E/h), and times in ns.  With those choices
frequency * time is dimensionless and the Schrodinger equation picks up
an explicit 2*pi.
"""

from __future__ import annotations

import math

from scipy.constants import e, h

# Flux quantum in SI (Wb).
PHI0 = h / (2.0 * e)

# Charging energy of a capacitor: E_C = e^2 / (2 C).
# With C in fF the result is in GHz: multiply by 1e15 (fF -> F) / 1e9 (Hz -> GHz).
E_C_COEF = e**2 / (2.0 * h) * 1e15 / 1e9  # GHz * fF, ~19.37

# Inductive energy of an inductor: E_L = (PHI0 / 2 pi)^2 / L.
# With L in nH the result is in GHz.
E_L_COEF = (PHI0 / (2.0 * math.pi)) ** 2 / h * 1e9 / 1e9  # GHz * nH, ~163.46

# Charge-charge coupling from an inverse capacitance matrix entry:
# J = 4 e^2 [C^-1]_jk, with [C^-1] in 1/fF the result is in GHz.
J_COEF = 4.0 * e**2 / h * 1e15 / 1e9  # GHz * fF, ~154.96


def charging_energy(c_ff: float) -> float:
    """E_C in GHz for a capacitance in fF."""
    if c_ff <= 0.0:
        raise ValueError(f"capacitance must be positive, got {c_ff}")
    return E_C_COEF / c_ff


def inductive_energy(l_nh: float) -> float:
    """E_L in GHz for an inductance in nH."""
    if l_nh <= 0.0:
        raise ValueError(f"inductance must be positive, got {l_nh}")
    return E_L_COEF / l_nh


def josephson_energy(i_c_na: float) -> float:
    """E_J in GHz for a junction critical current in nA.

    E_J = PHI0 * I_c / (2 pi), reported as a linear frequency.
    """
    if i_c_na <= 0.0:
        raise ValueError(f"critical current must be positive, got {i_c_na}")
    return PHI0 * (i_c_na * 1e-9) / (2.0 * math.pi) / h / 1e9
