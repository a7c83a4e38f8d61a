"""Three-mode long-range coupler: an LTC chained to a half-wave resonator.

The coupler is a linear chain of three oscillators with alternating
tunable (inductive, bias-dependent) and fixed (capacitive) couplings.
The module covers both the coupler-only eigenmode analysis and the full
five-factor system with a fluxonium attached at each end of the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import (
    DEFAULT_BASIS_SIZE,
    CompositeSpace,
    FluxoniumSpec,
    diagonalize_fluxonium,
    oscillator_mode,
)
from .coupled import AMBIGUITY_THRESHOLD, InteractionMetrics, LabeledSpectrum
from .cpw import ModeParams
from .errors import LabelingError, NumericsError
from .ltc import LtcSpec, linearize

DEFAULT_N_FOCK_CHAIN = 4
DEFAULT_N_KEEP_CHAIN = 5


@dataclass(frozen=True)
class MultimodeSpec:
    """LTC plus half-wave resonator chain with a fluxonium at each end.

    The chain order is Q1 - LTC.mode1 - LTC.mode2 - half_wave - Q2:
    J_c1 attaches Q1 to the LTC, J_c joins the LTC to the half-wave
    resonator, J_c2 attaches Q2 to the half-wave resonator (all GHz).
    """

    ltc: LtcSpec
    half_wave: ModeParams
    J_c: float
    q1: FluxoniumSpec
    q2: FluxoniumSpec
    J_c1: float
    J_c2: float
    n_keep: int = DEFAULT_N_KEEP_CHAIN
    basis_size: int = DEFAULT_BASIS_SIZE
    n_fock: int = DEFAULT_N_FOCK_CHAIN

    def __post_init__(self) -> None:
        if self.J_c < 0.0:
            raise ValueError("MultimodeSpec.J_c must be nonnegative")


def quadratic_modes(M: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Normal-mode frequencies of H = n' M n / 2 + phi' K phi / 2.

    Exact quadratic-form diagonalization via the eigenvalues of M K;
    raises on unphysical (non-positive or complex) squared frequencies.
    """
    w2 = np.linalg.eigvals(np.asarray(M) @ np.asarray(K))
    if np.any(w2.real <= 0.0) or np.max(np.abs(w2.imag)) > 1e-9 * np.max(w2.real):
        raise NumericsError(f"unphysical quadratic-form frequencies: {w2}")
    return np.sort(np.sqrt(w2.real))


def _chain_matrices(spec: MultimodeSpec, bias: float) -> tuple[np.ndarray, np.ndarray]:
    ltc = spec.ltc.at_bias(bias)
    lin = linearize(ltc)
    phi_rad = 2.0 * math.pi * bias
    c = math.cos(lin.xbar - phi_rad)
    m1, m2, hw = ltc.mode1, ltc.mode2, spec.half_wave
    cap = 4.0 * ltc.E_C_c * m1.eta * m2.eta
    M = np.array(
        [
            [8.0 * m1.E_C, cap, 0.0],
            [cap, 8.0 * m2.E_C, spec.J_c],
            [0.0, spec.J_c, 8.0 * hw.E_C],
        ]
    )
    K = np.array(
        [
            [lin.E_L_tilde_1, -ltc.E_Jc * m1.eta * m2.eta * c, 0.0],
            [-ltc.E_Jc * m1.eta * m2.eta * c, lin.E_L_tilde_2, 0.0],
            [0.0, 0.0, hw.E_L],
        ]
    )
    return M, K


def coupler_mode_frequencies(spec: MultimodeSpec, bias: float) -> np.ndarray:
    """Three chain eigenfrequencies (GHz, ascending) at one bias."""
    M, K = _chain_matrices(spec, bias)
    return quadratic_modes(M, K)


def coupler_modes(spec: MultimodeSpec, bias_grid: np.ndarray) -> list[dict]:
    """Chain eigenfrequencies across a bias grid."""
    rows = []
    for frac in bias_grid:
        row: dict = {"phi_frac": float(frac)}
        try:
            w = coupler_mode_frequencies(spec, float(frac))
        except NumericsError as exc:
            row["error"] = str(exc)
        else:
            row.update(mode1_GHz=w[0], mode2_GHz=w[1], mode3_GHz=w[2])
        rows.append(row)
    return rows


class MultimodeModel:
    """Diagonalized five-factor system at a fixed LTC bias."""

    def __init__(self, spec: MultimodeSpec, bias: float | None = None):
        self.spec = spec
        self.bias = spec.ltc.phi_ext_c if bias is None else float(bias)
        ltc = spec.ltc.at_bias(self.bias)
        self.lin = linearize(ltc)
        self.q1m = diagonalize_fluxonium(spec.q1, spec.basis_size, spec.n_keep)
        self.q2m = diagonalize_fluxonium(spec.q2, spec.basis_size, spec.n_keep)
        nf = spec.n_fock
        self.r1m = oscillator_mode(ltc.mode1.E_C, self.lin.E_L_tilde_1, nf)
        self.r2m = oscillator_mode(ltc.mode2.E_C, self.lin.E_L_tilde_2, nf)
        self.r3m = oscillator_mode(spec.half_wave.E_C, spec.half_wave.E_L, nf)
        self.space = CompositeSpace(
            names=("Q1", "R1", "R2", "R3", "Q2"),
            dims=(spec.n_keep, nf, nf, nf, spec.n_keep),
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

    def _coupler_block(self) -> np.ndarray:
        """Real symmetric Hamiltonian of the isolated three-mode chain."""
        nf = self.spec.n_fock
        e = (
            np.add.outer(
                np.add.outer(self.r1m.energies, self.r2m.energies),
                self.r3m.energies,
            )
        ).reshape(-1)
        block = np.diag(e)
        eye = np.eye(nf)
        phi12 = np.kron(np.kron(self.r1m.phi_elems, self.r2m.phi_elems), eye)
        b12 = np.kron(np.kron(self.r1m.n_imag, self.r2m.n_imag), eye)
        b23 = np.kron(np.kron(eye, self.r2m.n_imag), self.r3m.n_imag)
        block += self.g_phi * phi12
        # charge products (i b)(i b) flip sign
        block -= self.g_nn * b12
        block -= self.spec.J_c * b23
        return block

    def assemble(self) -> np.ndarray:
        """Full real symmetric Hamiltonian on the five-factor product."""
        sp = self.space
        h = np.zeros((sp.dim, sp.dim))
        for name, mode in (
            ("Q1", self.q1m),
            ("R1", self.r1m),
            ("R2", self.r2m),
            ("R3", self.r3m),
            ("Q2", self.q2m),
        ):
            h += sp.lift(name, np.diag(mode.energies))
        h += self.g_phi * (
            sp.lift("R1", self.r1m.phi_elems) @ sp.lift("R2", self.r2m.phi_elems)
        )
        h -= self.g_nn * (
            sp.lift("R1", self.r1m.n_imag) @ sp.lift("R2", self.r2m.n_imag)
        )
        h -= self.spec.J_c * (
            sp.lift("R2", self.r2m.n_imag) @ sp.lift("R3", self.r3m.n_imag)
        )
        h -= self.spec.J_c1 * (
            sp.lift("Q1", self.q1m.n_imag) @ sp.lift("R1", self.r1m.n_imag)
        )
        h -= self.spec.J_c2 * (
            sp.lift("Q2", self.q2m.n_imag) @ sp.lift("R3", self.r3m.n_imag)
        )
        defect = np.max(np.abs(h - h.T))
        if defect > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
            raise NumericsError(f"assembled Hamiltonian asymmetry {defect}")
        return h

    def _diagonalize(self) -> None:
        nk, nf = self.spec.n_keep, self.spec.n_fock
        self.coupler_evals, self.coupler_evecs = np.linalg.eigh(self._coupler_block())
        self.coupler_evals = self.coupler_evals - self.coupler_evals[0]

        h = self.assemble()
        self.evals, self.evecs = np.linalg.eigh(h)

        v = self.evecs.reshape(nk, nf**3, nk, self.space.dim)
        amp = np.einsum("mc,kmln->kcln", self.coupler_evecs, v)
        o2 = (amp**2).reshape(self.space.dim, self.space.dim)

        order = np.argsort(o2, axis=None)[::-1]
        ref_taken = np.zeros(self.space.dim, dtype=bool)
        eig_taken = np.zeros(self.space.dim, dtype=bool)
        assign = np.full(self.space.dim, -1, dtype=int)
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
            k, c, l = np.unravel_index(r, (nk, nf**3, nk))
            labels.append((int(k), int(l), int(c)))
            overlaps[n] = o2[r, n]
        self.labeled = LabeledSpectrum(
            bias=self.bias,
            labels=tuple(labels),
            energies=self.evals - self.evals[0],
            overlaps=overlaps,
        )
        self._decoupled_amp = amp

    def hybridization(
        self, dressed: tuple[int, int, int], reference: tuple[int, int, int]
    ) -> float:
        n = self.labeled._index.get(dressed)
        if n is None:
            raise LabelingError(f"dressed level {dressed} not labeled")
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


def coupled_metrics(
    spec: MultimodeSpec, bias_grid: np.ndarray
) -> list[InteractionMetrics]:
    """Interaction metrics of the five-factor system across a bias grid."""
    return [MultimodeModel(spec, float(b)).metrics() for b in bias_grid]
