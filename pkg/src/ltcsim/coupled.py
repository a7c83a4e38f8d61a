"""Fluxonium-coupler-fluxonium assembly, labeling, and interaction metrics.

The composite Hamiltonian lives on the tensor product (Q1, R1, R2, Q2)
of truncated fluxonium eigenbases and resonator Fock spaces, with the
coupler entering through its linearized bias-dependent form.  Every
operator in the product is real in the bases used here, so the full
Hamiltonian is a real symmetric matrix and its eigenvectors are real;
dressed charge operators are then purely imaginary with a real
antisymmetric core, which the propagator module exploits.

Dressed levels are labeled |Q1 Q2, C> where C indexes the eigenstates of
the isolated (linearized) coupler block at the same bias.  Labels come
from maximum squared overlap against those decoupled eigenstates with a
greedy one-to-one assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    DEFAULT_BASIS_SIZE,
    DEFAULT_N_KEEP,
    CompositeSpace,
    DiagonalizedMode,
    FluxoniumSpec,
    diagonalize_fluxonium,
    oscillator_mode,
)
from .errors import LabelingError, NumericsError
from .ltc import LtcLinearization, LtcSpec, bare_ltc_modes, linearize

DEFAULT_N_FOCK = 5
AMBIGUITY_THRESHOLD = 0.5


@dataclass(frozen=True)
class SystemSpec:
    """Two fluxonium qubits attached to the coupler by charge coupling (GHz)."""

    q1: FluxoniumSpec
    q2: FluxoniumSpec
    ltc: LtcSpec
    J_c1: float
    J_c2: float
    n_keep: int = DEFAULT_N_KEEP
    basis_size: int = DEFAULT_BASIS_SIZE
    n_fock: int = DEFAULT_N_FOCK


@dataclass(frozen=True)
class LabeledSpectrum:
    """Labeled eigenlevels of a composite system at one bias."""

    bias: float
    labels: tuple[tuple[int, ...], ...]
    energies: np.ndarray
    overlaps: np.ndarray
    provenance: str = "max-overlap-vs-decoupled"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_index", {lab: i for i, lab in enumerate(self.labels)}
        )

    def energy(self, label: tuple[int, ...], strict: bool = False) -> float:
        """Energy of a labeled level.

        Levels whose assignment overlap falls below 0.5 are flagged as
        ambiguous; with strict=True they raise instead.  The lenient
        default exists because strongly hybridized plasmon states at the
        interaction bias legitimately sit near 50/50 mixing while still
        being the physically addressed levels.
        """
        i = self._index.get(label)
        if i is None:
            raise LabelingError(f"level {label} not present in labeled spectrum")
        if strict and self.overlaps[i] < AMBIGUITY_THRESHOLD:
            raise LabelingError(
                f"level {label} ambiguous: assignment overlap {self.overlaps[i]:.3f}"
            )
        return float(self.energies[i])

    def is_ambiguous(self, label: tuple[int, ...]) -> bool:
        i = self._index.get(label)
        if i is None:
            raise LabelingError(f"level {label} not present in labeled spectrum")
        return bool(self.overlaps[i] < AMBIGUITY_THRESHOLD)

    def overlap(self, label: tuple[int, ...]) -> float:
        i = self._index.get(label)
        if i is None:
            raise LabelingError(f"level {label} not present in labeled spectrum")
        return float(self.overlaps[i])


@dataclass(frozen=True)
class InteractionMetrics:
    """Static interaction metrics at one bias (energies in GHz, signed shifts)."""

    bias: float
    hyb_12_21: float
    hyb_03_30: float
    dshift_12_i: float
    dshift_i_12: float
    zz: float
    ambiguous: tuple[tuple[int, ...], ...] = ()


class CoupledModel:
    """Diagonalized composite system at a fixed coupler bias."""

    def __init__(self, spec: SystemSpec, bias: float | None = None):
        self.spec = spec
        self.bias = spec.ltc.phi_ext_c if bias is None else float(bias)
        ltc = spec.ltc.at_bias(self.bias)
        self.lin: LtcLinearization = linearize(ltc)
        self.q1m = diagonalize_fluxonium(spec.q1, spec.basis_size, spec.n_keep)
        self.q2m = diagonalize_fluxonium(spec.q2, spec.basis_size, spec.n_keep)
        self.r1m = oscillator_mode(ltc.mode1.E_C, self.lin.E_L_tilde_1, spec.n_fock)
        self.r2m = oscillator_mode(ltc.mode2.E_C, self.lin.E_L_tilde_2, spec.n_fock)
        self.space = CompositeSpace(
            names=("Q1", "R1", "R2", "Q2"),
            dims=(spec.n_keep, spec.n_fock, spec.n_fock, spec.n_keep),
        )
        phi_rad = 2.0 * math.pi * self.bias
        self.g_phi = (
            -ltc.E_Jc
            * ltc.mode1.eta
            * ltc.mode2.eta
            * math.cos(self.lin.xbar - phi_rad)
        )
        self.g_nn = 4.0 * ltc.E_C_c * ltc.mode1.eta * ltc.mode2.eta
        self._diagonalize()

    # -- assembly ---------------------------------------------------------

    def _coupler_block(self) -> np.ndarray:
        """Real symmetric Hamiltonian of the isolated linearized coupler."""
        d = self.spec.n_fock
        h = np.add.outer(self.r1m.energies, self.r2m.energies).reshape(-1)
        block = np.diag(h)
        phi1, phi2 = self.r1m.phi_elems, self.r2m.phi_elems
        b1, b2 = self.r1m.n_imag, self.r2m.n_imag
        block += self.g_phi * np.kron(phi1, phi2)
        # n x n coupling: (i b1)(i b2) contributes with a flipped sign
        block -= self.g_nn * np.kron(b1, b2)
        return block

    def assemble(self) -> np.ndarray:
        """Full real symmetric Hamiltonian on the product space."""
        sp = self.space
        h = np.zeros((sp.dim, sp.dim))
        for name, mode in (
            ("Q1", self.q1m),
            ("R1", self.r1m),
            ("R2", self.r2m),
            ("Q2", self.q2m),
        ):
            h += sp.lift(name, np.diag(mode.energies))
        h += self.g_phi * (
            sp.lift("R1", self.r1m.phi_elems) @ sp.lift("R2", self.r2m.phi_elems)
        )
        h -= self.g_nn * (
            sp.lift("R1", self.r1m.n_imag) @ sp.lift("R2", self.r2m.n_imag)
        )
        h -= self.spec.J_c1 * (
            sp.lift("Q1", self.q1m.n_imag) @ sp.lift("R1", self.r1m.n_imag)
        )
        h -= self.spec.J_c2 * (
            sp.lift("Q2", self.q2m.n_imag) @ sp.lift("R2", self.r2m.n_imag)
        )
        defect = np.max(np.abs(h - h.T))
        if defect > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
            raise NumericsError(f"assembled Hamiltonian asymmetry {defect}")
        return h

    # -- diagonalization and labeling -------------------------------------

    def _diagonalize(self) -> None:
        nk, nf = self.spec.n_keep, self.spec.n_fock
        self.coupler_evals, self.coupler_evecs = np.linalg.eigh(
            self._coupler_block()
        )
        self.coupler_evals = self.coupler_evals - self.coupler_evals[0]
        self.coupler_index_occupation = self._coupler_occupations()

        h = self.assemble()
        self.evals, self.evecs = np.linalg.eigh(h)

        # overlaps against decoupled references e_k (x) coupler_vec (x) e_l
        v = self.evecs.reshape(nk, nf * nf, nk, self.space.dim)
        amp = np.einsum("mc,kmln->kcln", self.coupler_evecs, v)
        o2 = (amp**2).reshape(self.space.dim, self.space.dim)

        order = np.argsort(o2, axis=None)[::-1]
        ref_taken = np.zeros(self.space.dim, dtype=bool)
        eig_taken = np.zeros(self.space.dim, dtype=bool)
        assign = np.full(self.space.dim, -1, dtype=int)  # eigindex -> ref row
        remaining = self.space.dim
        for flat in order:
            r, n = divmod(int(flat), self.space.dim)
            if ref_taken[r] or eig_taken[n]:
                continue
            assign[n] = r
            ref_taken[r] = True
            eig_taken[n] = True
            remaining -= 1
            if remaining == 0:
                break

        labels = []
        overlaps = np.empty(self.space.dim)
        for n in range(self.space.dim):
            r = assign[n]
            k, c, l = np.unravel_index(r, (nk, nf * nf, nk))
            labels.append((int(k), int(l), int(c)))
            overlaps[n] = o2[r, n]
        self.labeled = LabeledSpectrum(
            bias=self.bias,
            labels=tuple(labels),
            energies=self.evals - self.evals[0],
            overlaps=overlaps,
        )
        self._decoupled_amp = amp  # kept for hybridization overlaps

    def _coupler_occupations(self) -> list[tuple[int, int]]:
        """Map coupler eigenstate index -> (n_lo, n_hi) normal-mode photons."""
        ltc = self.spec.ltc.at_bias(self.bias)
        w_lo, w_hi = bare_ltc_modes(ltc)
        nf = self.spec.n_fock
        cands = [
            (a, b, a * w_lo + b * w_hi) for a in range(2 * nf) for b in range(2 * nf)
        ]
        occ = []
        for e in self.coupler_evals:
            a, b, _ = min(cands, key=lambda t: abs(t[2] - e))
            occ.append((a, b))
        return occ

    # -- metrics -----------------------------------------------------------

    def hybridization(
        self, dressed: tuple[int, int, int], reference: tuple[int, int, int]
    ) -> float:
        """|<dressed eigenstate | decoupled reference>|^2."""
        n = self.labeled._index.get(dressed)
        if n is None:
            raise LabelingError(f"dressed level {dressed} not labeled")
        nk, nf = self.spec.n_keep, self.spec.n_fock
        k, l, c = reference
        return float(self._decoupled_amp[k, c, l, n] ** 2)

    def metrics(self) -> InteractionMetrics:
        e = self.labeled.energy
        needed = [
            (0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0),
            (2, 0, 0), (2, 1, 0), (0, 2, 0), (1, 2, 0),
        ]
        flagged = tuple(l for l in needed if self.labeled.is_ambiguous(l))
        return InteractionMetrics(
            bias=self.bias,
            hyb_12_21=self.hybridization((1, 2, 0), (2, 1, 0)),
            hyb_03_30=self.hybridization((0, 3, 0), (3, 0, 0)),
            dshift_12_i=(e((2, 1, 0)) - e((1, 1, 0))) - (e((2, 0, 0)) - e((1, 0, 0))),
            dshift_i_12=(e((1, 2, 0)) - e((1, 1, 0))) - (e((0, 2, 0)) - e((0, 1, 0))),
            zz=(e((1, 1, 0)) - e((0, 1, 0))) - (e((1, 0, 0)) - e((0, 0, 0))),
            ambiguous=flagged,
        )

    def collision_frequencies(self) -> list[float]:
        """Drive frequencies of the two-photon processes |k0,0> <-> |(k+1)0,2>.

        The coupler label 2 is the second excited coupler eigenstate, one
        photon in the upper normal mode at the biases of interest.
        """
        e = self.labeled.energy
        out = []
        for initial, final in (
            ((1, 0, 0), (2, 0, 2)),
            ((0, 1, 0), (0, 2, 2)),
        ):
            out.append((e(final) - e(initial)) / 2.0)
        return out


def assemble(spec: SystemSpec, bias: float | None = None) -> np.ndarray:
    return CoupledModel(spec, bias).assemble()


def label_spectrum(spec: SystemSpec, bias: float | None = None) -> LabeledSpectrum:
    return CoupledModel(spec, bias).labeled


def interaction_metrics(spec: SystemSpec, bias: float | None = None) -> InteractionMetrics:
    return CoupledModel(spec, bias).metrics()


def collision_frequencies(spec: SystemSpec, bias: float | None = None) -> list[float]:
    return CoupledModel(spec, bias).collision_frequencies()


def metrics_sweep(spec: SystemSpec, bias_grid: np.ndarray) -> list[InteractionMetrics]:
    return [CoupledModel(spec, float(b)).metrics() for b in bias_grid]


# -- closed-form estimates --------------------------------------------------


def shift_estimate(delta_p: float, g_p: float) -> float:
    """Level-repulsion estimate |dw| = sqrt((D/2)^2 + g^2) - D/2."""
    if delta_p < 0.0:
        raise ValueError("delta_p must be nonnegative")
    return math.sqrt((delta_p / 2.0) ** 2 + g_p**2) - delta_p / 2.0


def effective_coupling_formula(
    g_p1: float, g_p2: float, g_c: float, omega_c: float, omega_p: tuple[float, float]
) -> tuple[float, float]:
    """Coupler-mediated flip-flop strength: (second-order form, exact-mode form).

    The first value sums 1/Delta^2 + 1/(w_c Delta) over the two qubits;
    the second diagonalizes the coupler exactly into modes
    w_pm = sqrt(w_c^2 +- 2 g_c w_c) before eliminating the couplings.
    """
    second = 0.0
    for wp in omega_p:
        d = wp - omega_c
        second += 1.0 / d**2 + 1.0 / (omega_c * d)
    second *= g_p1 * g_p2 * g_c / 2.0

    w_plus = math.sqrt(omega_c**2 + 2.0 * g_c * omega_c)
    w_minus = math.sqrt(omega_c**2 - 2.0 * g_c * omega_c)
    u_plus = (1.0 / math.sqrt(2.0) + g_c / (2.0 * math.sqrt(2.0) * omega_c)) ** 2
    u_minus = (1.0 / math.sqrt(2.0) - g_c / (2.0 * math.sqrt(2.0) * omega_c)) ** 2
    exact = 0.0
    for wp in omega_p:
        exact += u_plus / (wp - w_plus) - u_minus / (wp - w_minus)
    exact *= g_p1 * g_p2 / 2.0
    return second, exact


def effective_coupling(
    model: CoupledModel, transition: tuple[int, int] = (1, 2)
) -> tuple[float, float]:
    """Perturbative estimate of the plasmon flip-flop coupling for a model.

    Returns (second-order, exact-mode) values; warns outside the
    dispersive regime and refuses near resonance where the elimination
    breaks down.
    """
    import warnings

    k, l = transition
    spec = model.spec
    omega_c = math.sqrt(
        8.0
        * math.sqrt(spec.ltc.mode1.E_C * spec.ltc.mode2.E_C)
        * math.sqrt(model.lin.E_L_tilde_1 * model.lin.E_L_tilde_2)
    )
    g_c = model.lin.g_ind
    omega_p = (
        float(model.q1m.energies[l] - model.q1m.energies[k]),
        float(model.q2m.energies[l] - model.q2m.energies[k]),
    )
    n1 = abs(model.q1m.n_imag[k, l]) * abs(model.r1m.n_imag[0, 1])
    n2 = abs(model.q2m.n_imag[k, l]) * abs(model.r2m.n_imag[0, 1])
    g_p = (spec.J_c1 * n1, spec.J_c2 * n2)
    for gp, wp in zip(g_p, omega_p):
        delta = wp - omega_c
        if abs(delta) < 10.0 * abs(gp):
            raise NumericsError(
                f"near-resonant fluxonium-coupler pair (Delta={delta}, g_p={gp}); "
                "perturbative coupling formula invalid"
            )
        if abs(gp / delta) > 0.3:
            warnings.warn(
                "fluxonium-coupler coupling outside the dispersive regime; "
                "estimate is qualitative",
                stacklevel=2,
            )
    return effective_coupling_formula(g_p[0], g_p[1], g_c, omega_c, omega_p)
