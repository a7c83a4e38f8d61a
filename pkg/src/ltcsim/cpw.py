"""Mode analysis of a quarter-wave CPW resonator terminated by a linear inductor.

The resonator is described by its length, per-length inductance and
capacitance, and the terminating inductance to ground.  Each eigenmode
satisfies the transcendental relation

    k d * tan(k d) = d L_l / L_S

with the mode-m root confined to (m pi, m pi + pi/2).  The mode maps onto
a lumped LC oscillator whose effective capacitance and inductance follow
from the phase-field profile, and the end-of-line profile factor
eta = cos(k d) scales every coupling made through the termination point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SolverError
from .units import charging_energy, inductive_energy

_BRACKET_EPS = 1e-9
_RESIDUAL_TOL = 1e-10
_MAX_ITER = 200


@dataclass(frozen=True)
class CpwSpec:
    """Physical CPW geometry: d (cm), L_l (nH/cm), C_l (fF/cm), L_S (nH)."""

    d: float
    L_l: float
    C_l: float
    L_S: float

    def __post_init__(self) -> None:
        for name in ("d", "L_l", "C_l", "L_S"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"CpwSpec.{name} must be positive")

    @property
    def impedance(self) -> float:
        """Characteristic impedance sqrt(L_l / C_l) in kOhm-free units.

        nH/fF = (1e-9 H)/(1e-15 F) gives Ohm^2 * 1e6, so take sqrt and
        scale by 1e3 to report Ohms.
        """
        return math.sqrt(self.L_l / self.C_l) * 1e3

    @property
    def wave_velocity(self) -> float:
        """Wave velocity 1/sqrt(L_l C_l) in cm/ns."""
        # nH/cm * fF/cm = 1e-24 s^2/cm^2; sqrt gives 1e-12 s/cm = 1e-3 ns/cm
        return 1.0 / math.sqrt(self.L_l * self.C_l) * 1e3


@dataclass(frozen=True)
class ModeParams:
    """Effective lumped-oscillator parameters of one resonator mode."""

    mode_index: int
    k: float  # rad/cm
    freq: float  # GHz
    C_k: float  # fF
    L_k: float  # nH
    eta: float  # cos(kd), dimensionless
    E_C: float  # GHz
    E_L: float  # GHz
    phi_zpf: float
    n_zpf: float


def solve_mode_wavevector(spec: CpwSpec, mode_index: int = 0) -> float:
    """Root of kd tan(kd) = d L_l / L_S in (m pi, m pi + pi/2), as k in rad/cm.

    Bracketed bisection refined by Newton steps; the bracket stays clear of
    the tan poles.  Raises SolverError when the residual target is missed.
    """
    if mode_index < 0:
        raise ValueError("mode_index must be >= 0")
    target = spec.d * spec.L_l / spec.L_S

    def f(u: float) -> float:
        return u * math.tan(u) - target

    lo = mode_index * math.pi + _BRACKET_EPS
    hi = mode_index * math.pi + math.pi / 2.0 - _BRACKET_EPS
    if f(lo) > 0.0 or f(hi) < 0.0:
        raise SolverError(
            f"no root bracketed in mode-{mode_index} interval ({lo}, {hi}) "
            f"for dL_l/L_S = {target}"
        )
    u = 0.5 * (lo + hi)
    for _ in range(_MAX_ITER):
        fu = f(u)
        if abs(fu) < _RESIDUAL_TOL:
            return u / spec.d
        if fu > 0.0:
            hi = u
        else:
            lo = u
        # Newton step, falling back to bisection when it leaves the bracket
        t = math.tan(u)
        dfu = t + u * (1.0 + t * t)
        u_new = u - fu / dfu
        if not (lo < u_new < hi):
            u_new = 0.5 * (lo + hi)
        u = u_new
    raise SolverError(
        f"mode-{mode_index} root did not converge: bracket ({lo}, {hi}), "
        f"residual {f(u)}"
    )


def mode_parameters(spec: CpwSpec, k: float, mode_index: int = 0) -> ModeParams:
    """Lumped-oscillator parameters for a solved wave vector."""
    kd = k * spec.d
    shape = 1.0 + math.sin(2.0 * kd) / (2.0 * kd)
    C_k = spec.d * spec.C_l / 2.0 * shape
    L_k = 2.0 * spec.d * spec.L_l / (kd * kd) / shape
    eta = math.cos(kd)
    E_C = charging_energy(C_k)
    E_L = inductive_energy(L_k)
    phi_zpf = (8.0 * E_C / E_L) ** 0.25 / math.sqrt(2.0)
    n_zpf = (E_L / (8.0 * E_C)) ** 0.25 / math.sqrt(2.0)
    freq = k * spec.wave_velocity / (2.0 * math.pi)
    return ModeParams(
        mode_index=mode_index,
        k=k,
        freq=freq,
        C_k=C_k,
        L_k=L_k,
        eta=eta,
        E_C=E_C,
        E_L=E_L,
        phi_zpf=phi_zpf,
        n_zpf=n_zpf,
    )


def fundamental_mode(spec: CpwSpec) -> ModeParams:
    """Convenience wrapper: solve and parameterize the fundamental mode."""
    return mode_parameters(spec, solve_mode_wavevector(spec, 0), 0)


def mode_from_energies(E_C: float, E_L: float, eta: float) -> ModeParams:
    """Mode record built from tabulated oscillator energies (GHz).

    Used when a parameter table quotes the effective E_C and E_L of a
    resonator mode directly; the profile factor eta still comes from the
    underlying line geometry.  The wave vector is not defined in this
    construction and is stored as 0; freq is the lumped-oscillator value.
    """
    if E_C <= 0.0 or E_L <= 0.0:
        raise ValueError("mode energies must be positive")
    C_k = charging_energy(E_C)  # inverse map: same coefficient both ways
    L_k = inductive_energy(E_L)
    phi_zpf = (8.0 * E_C / E_L) ** 0.25 / math.sqrt(2.0)
    n_zpf = (E_L / (8.0 * E_C)) ** 0.25 / math.sqrt(2.0)
    return ModeParams(
        mode_index=0,
        k=0.0,
        freq=math.sqrt(8.0 * E_C * E_L),
        C_k=C_k,
        L_k=L_k,
        eta=eta,
        E_C=E_C,
        E_L=E_L,
        phi_zpf=phi_zpf,
        n_zpf=n_zpf,
    )


def sweep_vs_terminator(
    spec: CpwSpec,
    L_S_grid: list[float],
    mode_indices: tuple[int, ...] = (0,),
) -> list[dict]:
    """Re-solve the mode problem across terminating inductances.

    Returns one row dict per (L_S, mode) pair.  Solver failures mark the
    row with an 'error' entry instead of aborting the sweep.
    """
    if not L_S_grid:
        raise ValueError("L_S grid must be nonempty")
    rows: list[dict] = []
    for L_S in L_S_grid:
        point = CpwSpec(spec.d, spec.L_l, spec.C_l, L_S)
        for m in mode_indices:
            row: dict = {"L_S_nH": L_S, "mode": m}
            try:
                params = mode_parameters(point, solve_mode_wavevector(point, m), m)
            except SolverError as exc:
                row["error"] = str(exc)
            else:
                row.update(
                    kd_rad=params.k * point.d,
                    freq_GHz=params.freq,
                    C_k_fF=params.C_k,
                    L_k_nH=params.L_k,
                    eta=params.eta,
                    E_C_GHz=params.E_C,
                    E_L_GHz=params.E_L,
                )
            rows.append(row)
    return rows
