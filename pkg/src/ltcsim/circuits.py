"""Single-circuit diagonalization and tensor-product operator assembly.

Fluxonium Hamiltonians are built in the harmonic-oscillator basis of
their own (E_C, E_L) oscillator, with the external flux placed in the
inductive term.  Diagonalized circuits expose charge and phase operators
in the truncated eigenbasis; CompositeSpace lifts those operators into a
fixed-order tensor product for the coupled-system modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericsError

DEFAULT_BASIS_SIZE = 60
DEFAULT_N_KEEP = 6


@dataclass(frozen=True)
class FluxoniumSpec:
    """Fluxonium energies in GHz; phi_ext as a fraction of the flux quantum."""

    E_C: float
    E_L: float
    E_J: float
    phi_ext: float = 0.5

    def __post_init__(self) -> None:
        for name in ("E_C", "E_L", "E_J"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"FluxoniumSpec.{name} must be positive")
        if not 0.0 <= self.phi_ext < 1.0:
            raise ValueError("FluxoniumSpec.phi_ext must lie in [0, 1)")


@dataclass(frozen=True)
class DiagonalizedMode:
    """Truncated eigenbasis of a single circuit.

    energies are ascending with the ground state shifted to zero.  The
    charge operator is Hermitian with purely imaginary off-diagonal
    elements in the real eigenbasis used here; ``n_imag`` stores its
    imaginary part (a real antisymmetric matrix) so that
    n = 1j * n_imag.  parity holds +-1 labels when the circuit has a
    well-defined parity (fluxonium at the sweet spot), else None.
    """

    energies: np.ndarray
    n_imag: np.ndarray
    phi_elems: np.ndarray
    n_kept: int
    parity: np.ndarray | None = None

    @property
    def n_elems(self) -> np.ndarray:
        return 1j * self.n_imag

    @property
    def dim(self) -> int:
        return self.n_kept


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0.0:
            out[:, j] = -out[:, j]
    return out


def diagonalize_fluxonium(
    spec: FluxoniumSpec,
    basis_size: int = DEFAULT_BASIS_SIZE,
    n_keep: int = DEFAULT_N_KEEP,
) -> DiagonalizedMode:
    """Diagonalize H = 4 E_C n^2 + E_L (phi - phi_ext)^2 / 2 - E_J cos(phi).

    Shifting to theta = phi - 2 pi phi_ext reduces the quadratic part to
    the bare (E_C, E_L) oscillator; the Josephson term becomes
    -E_J cos(theta + 2 pi phi_ext) and is evaluated exactly through the
    eigendecomposition of theta.
    """
    if n_keep < 4:
        raise ValueError("n_keep must be >= 4")
    if basis_size < 4 * n_keep:
        raise ValueError("basis_size must be >= 4 * n_keep")

    omega0 = math.sqrt(8.0 * spec.E_C * spec.E_L)
    theta_zpf = (8.0 * spec.E_C / spec.E_L) ** 0.25 / math.sqrt(2.0)
    n_zpf = (spec.E_L / (8.0 * spec.E_C)) ** 0.25 / math.sqrt(2.0)

    off = np.sqrt(np.arange(1, basis_size))
    theta = theta_zpf * (np.diag(off, 1) + np.diag(off, -1))
    # i * n_zpf (a^dag - a): store the real antisymmetric imaginary part
    n_imag = n_zpf * (np.diag(off, -1) - np.diag(off, 1))

    lam, w = np.linalg.eigh(theta)
    offset = 2.0 * math.pi * spec.phi_ext
    cos_theta = (w * np.cos(lam + offset)) @ w.T

    h = np.diag(omega0 * (np.arange(basis_size) + 0.5)) - spec.E_J * cos_theta
    herm_defect = np.max(np.abs(h - h.T))
    if herm_defect > 1e-12:
        raise NumericsError(f"fluxonium Hamiltonian asymmetry {herm_defect}")

    evals, evecs = np.linalg.eigh(h)
    evecs = _fix_phases(evecs[:, :n_keep])
    energies = evals[:n_keep] - evals[0]

    n_rot = evecs.T @ n_imag @ evecs
    theta_rot = evecs.T @ theta @ evecs
    phi_elems = theta_rot + offset * np.eye(n_keep)

    parity = None
    if abs(spec.phi_ext - 0.5) < 1e-12:
        # expectation of (-1)^(a^dag a) in each eigenstate; values cluster at +-1
        signs = (-1.0) ** np.arange(basis_size)
        pexp = np.einsum("ij,i,ij->j", evecs, signs, evecs)
        parity = np.where(pexp >= 0.0, 1, -1).astype(int)

    return DiagonalizedMode(
        energies=energies,
        n_imag=n_rot,
        phi_elems=phi_elems,
        n_kept=n_keep,
        parity=parity,
    )


def oscillator_mode(E_C: float, E_L: float, n_fock: int) -> DiagonalizedMode:
    """Linear oscillator in its Fock basis: frequency sqrt(8 E_C E_L)."""
    if E_C <= 0.0 or E_L <= 0.0:
        raise ValueError("oscillator energies must be positive")
    if n_fock < 3:
        raise ValueError("n_fock must be >= 3")
    omega = math.sqrt(8.0 * E_C * E_L)
    phi_zpf = (8.0 * E_C / E_L) ** 0.25 / math.sqrt(2.0)
    n_zpf = (E_L / (8.0 * E_C)) ** 0.25 / math.sqrt(2.0)
    off = np.sqrt(np.arange(1, n_fock))
    return DiagonalizedMode(
        energies=omega * np.arange(n_fock, dtype=float),
        n_imag=n_zpf * (np.diag(off, -1) - np.diag(off, 1)),
        phi_elems=phi_zpf * (np.diag(off, 1) + np.diag(off, -1)),
        n_kept=n_fock,
    )


@dataclass(frozen=True)
class CompositeSpace:
    """Fixed-order tensor product of factor spaces."""

    names: tuple[str, ...]
    dims: tuple[int, ...]
    _eyes: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.names) != len(self.dims):
            raise ValueError("names and dims must have equal length")
        object.__setattr__(
            self, "_eyes", tuple(np.eye(d) for d in self.dims)
        )

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, name: str) -> int:
        return self.names.index(name)

    def lift(self, factor: int | str, op: np.ndarray) -> np.ndarray:
        """Embed a single-factor operator into the product space."""
        if isinstance(factor, str):
            factor = self.index(factor)
        if op.shape != (self.dims[factor], self.dims[factor]):
            raise ValueError(
                f"operator shape {op.shape} does not match factor "
                f"{self.names[factor]} of dimension {self.dims[factor]}"
            )
        out = np.array([[1.0]])
        for i, eye in enumerate(self._eyes):
            out = np.kron(out, op if i == factor else eye)
        return out

    def basis_labels(self) -> list[tuple[int, ...]]:
        """Product-basis occupation labels in row order."""
        return [
            tuple(idx)
            for idx in np.indices(self.dims).reshape(len(self.dims), -1).T
        ]


def compose(
    space: CompositeSpace,
    one_body: list[tuple[int | str, np.ndarray, float]] = (),
    two_body: list[tuple[int | str, int | str, np.ndarray, np.ndarray, float]] = (),
) -> np.ndarray:
    """Sum of lifted one-body and two-body terms; Hermiticity enforced.

    two_body entries are (factor_a, factor_b, op_a, op_b, coefficient)
    contributing coefficient * lift(op_a) @ lift(op_b).
    """
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for factor, op, coef in one_body:
        h += coef * space.lift(factor, op.astype(complex))
    for fa, fb, opa, opb, coef in two_body:
        if (fa if isinstance(fa, int) else space.index(fa)) == (
            fb if isinstance(fb, int) else space.index(fb)
        ):
            raise ValueError("two-body term factors must differ")
        h += coef * (space.lift(fa, opa.astype(complex)) @ space.lift(fb, opb.astype(complex)))
    defect = np.max(np.abs(h - h.conj().T))
    if defect > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise NumericsError(f"composed Hamiltonian non-Hermitian: defect {defect}")
    return (h + h.conj().T) / 2.0
