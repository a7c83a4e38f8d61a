"""Long-range tunable coupler: equilibrium, linearization, bias conditions.

The coupler is two inductor-terminated quarter-wave resonator modes joined
by a junction.  The junction contributes a cosine potential in the
combination x = eta1 phi1 - eta2 phi2 minus the loop flux; expanding
around the classical equilibrium yields bias-shifted inductive energies
and a pair of inter-mode couplings (inductive, tunable; capacitive,
static).  The inductive coupling nulls at a bias fixed by the coupler
alone, which is what makes the architecture attractive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpw import ModeParams
from .errors import NumericsError, SolverError
from .units import E_C_COEF

_EQ_TOL = 1e-13
_MAX_NEWTON = 100
_MAX_CONT_STEP = 0.005  # flux fraction per continuation step


@dataclass(frozen=True)
class LtcSpec:
    """Two resonator modes joined by a coupling junction.

    E_Jc in GHz, C_J in fF, phi_ext_c as a fraction of the flux quantum.
    """

    mode1: ModeParams
    mode2: ModeParams
    E_Jc: float
    C_J: float = 0.0
    phi_ext_c: float = 0.0

    def __post_init__(self) -> None:
        if self.E_Jc <= 0.0:
            raise ValueError("LtcSpec.E_Jc must be positive")
        if self.C_J < 0.0:
            raise ValueError("LtcSpec.C_J must be nonnegative")

    @property
    def E_C_c(self) -> float:
        """Capacitive coupling energy e^2 C_J / (C_1 C_2) in GHz."""
        return 2.0 * E_C_COEF * self.C_J / (self.mode1.C_k * self.mode2.C_k)

    @property
    def slope_sum(self) -> float:
        """sum_j eta_j^2 E_Jc / E_L,cj, the prefactor in the equilibrium relation."""
        return self.E_Jc * (
            self.mode1.eta**2 / self.mode1.E_L + self.mode2.eta**2 / self.mode2.E_L
        )

    def at_bias(self, phi_ext_c: float) -> "LtcSpec":
        return LtcSpec(self.mode1, self.mode2, self.E_Jc, self.C_J, phi_ext_c)


@dataclass(frozen=True)
class LtcLinearization:
    """Bias-dependent linearized coupler data (energies in GHz, phases in rad)."""

    phibar1: float
    phibar2: float
    xbar: float
    E_L_tilde_1: float
    E_L_tilde_2: float
    g_ind: float
    g_cap: float
    damped_newton: bool = False


def _solve_xbar(S: float, phi_rad: float, x0: float) -> tuple[float, bool]:
    """Newton solve of x + S sin(x - phi) = 0 warm-started at x0."""
    x = x0
    damped = False
    for _ in range(_MAX_NEWTON):
        g = x + S * math.sin(x - phi_rad)
        if abs(g) < _EQ_TOL:
            return x, damped
        dg = 1.0 + S * math.cos(x - phi_rad)
        if abs(dg) < 1e-10:
            raise SolverError(
                f"equilibrium Jacobian vanished at bias {phi_rad / (2 * math.pi)}"
            )
        step = g / dg
        # keep the iterate on the tracked branch for steep slopes
        if abs(step) > 0.5:
            step = math.copysign(0.5, step)
            damped = True
        x -= step
    raise SolverError(f"equilibrium solve stalled at bias {phi_rad / (2 * math.pi)}")


def equilibrium_point(spec: LtcSpec) -> tuple[float, float, float]:
    """Equilibrium phases (phibar1, phibar2, xbar) on the branch through zero.

    The scalar fixed-point equation for xbar can develop multiple roots at
    large E_Jc / E_L; the physical branch is pinned by continuation from
    zero bias in steps of at most 0.005 flux quantum.
    """
    S = spec.slope_sum
    frac = spec.phi_ext_c
    n_steps = max(1, math.ceil(abs(frac) / _MAX_CONT_STEP))
    x = 0.0
    damped_any = False
    for i in range(1, n_steps + 1):
        phi_rad = 2.0 * math.pi * frac * i / n_steps
        x, damped = _solve_xbar(S, phi_rad, x)
        damped_any = damped_any or damped
    phi_rad = 2.0 * math.pi * frac
    s = math.sin(x - phi_rad)
    phibar1 = -spec.mode1.eta * spec.E_Jc / spec.mode1.E_L * s
    phibar2 = spec.mode2.eta * spec.E_Jc / spec.mode2.E_L * s
    # both equilibrium relations must close
    r1 = phibar1 + spec.mode1.eta * spec.E_Jc / spec.mode1.E_L * s
    r2 = phibar2 - spec.mode2.eta * spec.E_Jc / spec.mode2.E_L * s
    if max(abs(r1), abs(r2)) > 1e-12:
        raise SolverError("equilibrium relations failed to close")
    return phibar1, phibar2, x


def _zpf(E_C: float, E_L: float) -> tuple[float, float]:
    phi = (8.0 * E_C / E_L) ** 0.25 / math.sqrt(2.0)
    n = (E_L / (8.0 * E_C)) ** 0.25 / math.sqrt(2.0)
    return phi, n


def linearize(spec: LtcSpec) -> LtcLinearization:
    """Second-order expansion of the coupler potential around equilibrium."""
    phibar1, phibar2, xbar = equilibrium_point(spec)
    phi_rad = 2.0 * math.pi * spec.phi_ext_c
    c = math.cos(xbar - phi_rad)
    m1, m2 = spec.mode1, spec.mode2
    elt1 = m1.E_L + spec.E_Jc * m1.eta**2 * c
    elt2 = m2.E_L + spec.E_Jc * m2.eta**2 * c
    if elt1 <= 0.0 or elt2 <= 0.0:
        raise NumericsError(
            f"negative shifted inductive energy at bias {spec.phi_ext_c}"
        )
    phi1_zpf, n1_zpf = _zpf(m1.E_C, elt1)
    phi2_zpf, n2_zpf = _zpf(m2.E_C, elt2)
    g_ind = -spec.E_Jc * m1.eta * m2.eta * c * phi1_zpf * phi2_zpf
    g_cap = -4.0 * spec.E_C_c * m1.eta * m2.eta * n1_zpf * n2_zpf
    return LtcLinearization(
        phibar1=phibar1,
        phibar2=phibar2,
        xbar=xbar,
        E_L_tilde_1=elt1,
        E_L_tilde_2=elt2,
        g_ind=g_ind,
        g_cap=g_cap,
    )


def zero_coupling_bias(spec: LtcSpec) -> tuple[float, float]:
    """(phi_off, phi_on) flux fractions: coupling nulled / maximal.

    Closed form: at the off point x - phi = pi/2 + m pi, so
    phi = -S sin(pi/2 + m pi) - (pi/2 + m pi); the branch with m = -1
    lands in (0, 0.5).  The maximal-coupling bias sits at integer
    multiples of half a flux quantum; zero is returned.
    """
    S = spec.slope_sum
    phi_off_rad = S + math.pi / 2.0
    phi_off = phi_off_rad / (2.0 * math.pi)
    if not 0.0 < phi_off < 0.5:
        raise NumericsError(
            f"zero-coupling bias {phi_off} left (0, 0.5); "
            "coupler parameters outside the modeled regime"
        )
    return phi_off, 0.0


def bare_ltc_modes(spec: LtcSpec) -> tuple[float, float]:
    """Normal-mode frequencies (GHz) of the linearized two-mode coupler.

    Exact quadratic-form (Bogoliubov) diagonalization including both the
    inductive and capacitive couplings; no rotating-wave step.
    """
    lin = linearize(spec)
    phi_rad = 2.0 * math.pi * spec.phi_ext_c
    c = math.cos(lin.xbar - phi_rad)
    m1, m2 = spec.mode1, spec.mode2
    M = np.array(
        [
            [8.0 * m1.E_C, 4.0 * spec.E_C_c * m1.eta * m2.eta],
            [4.0 * spec.E_C_c * m1.eta * m2.eta, 8.0 * m2.E_C],
        ]
    )
    K = np.array(
        [
            [lin.E_L_tilde_1, -spec.E_Jc * m1.eta * m2.eta * c],
            [-spec.E_Jc * m1.eta * m2.eta * c, lin.E_L_tilde_2],
        ]
    )
    w2 = np.linalg.eigvals(M @ K)
    if np.any(w2.real <= 0.0) or np.max(np.abs(w2.imag)) > 1e-9:
        raise NumericsError(f"unphysical linearized mode frequencies: {w2}")
    w = np.sort(np.sqrt(w2.real))
    return float(w[0]), float(w[1])


def coupling_sweep(spec: LtcSpec, bias_grid: np.ndarray) -> list[dict]:
    """Couplings and bare modes across a bias grid (serial continuation)."""
    rows = []
    for frac in bias_grid:
        point = spec.at_bias(float(frac))
        lin = linearize(point)
        lo, hi = bare_ltc_modes(point)
        rows.append(
            {
                "phi_frac": float(frac),
                "xbar_rad": lin.xbar,
                "g_ind_GHz": lin.g_ind,
                "g_cap_GHz": lin.g_cap,
                "mode_lo_GHz": lo,
                "mode_hi_GHz": hi,
            }
        )
    return rows
