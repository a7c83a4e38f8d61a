"""Capacitance-network reduction for lattice coupling layouts.

A floating qubit's two pads, its short- and long-range coupler nodes,
and its readout node form a capacitance network.  Rotating the pad pair
into sum and difference modes isolates a free mode (the pad sum, which
carries charge but no inductive energy); inverting the transformed
matrix and dropping the free row yields the charge energy of every
retained mode and the pairwise charge-coupling strengths.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericsError
from .units import E_C_COEF, J_COEF

GROUND = "gnd"

LAYOUT_TAGS = ("1LTC+3TC", "2LTC+2TC", "2LTC+3TC", "2LTC+4TC")

_ROLE_SELF = {"tc": "C_TC", "ltc": "C_LTC", "readout": "C_R"}
_ROLE_COUPLING = {"tc": "C_qt", "ltc": "C_qL", "readout": "C_qr"}

# attachment inference for the tags without a printed matrix: one TC and
# one LTC per pad where counts allow, readout on the second pad
_TAG_PADS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "1LTC+3TC": (("tc", "tc", "tc"), ("ltc", "readout")),
    "2LTC+2TC": (("tc", "ltc"), ("tc", "ltc", "readout")),
    "2LTC+3TC": (("tc", "tc", "ltc"), ("tc", "ltc", "readout")),
    "2LTC+4TC": (("tc", "tc", "ltc"), ("tc", "tc", "ltc", "readout")),
}


@dataclass(frozen=True)
class LayoutCaps:
    """Capacitor values (fF) shared by the built-in layout tags."""

    C_TC: float = 55.0
    C_LTC: float = 480.0
    C_R: float = 200.0
    C_q: float = 5.5
    C_g: float = 8.0
    C_qt: float = 8.0
    C_qr: float = 4.0
    C_qL: float = 14.5

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"LayoutCaps.{name} must be positive")


@dataclass(frozen=True)
class CapNetwork:
    """Named nodes with roles, plus capacitors between nodes or to ground.

    roles: 'pad' for the fluxonium pad pair (exactly two per qubit),
    'tc' / 'ltc' / 'readout' for coupler and readout nodes.  caps holds
    (node_a, node_b, value_fF) triples with 'gnd' as a valid endpoint.
    """

    tag: str
    nodes: tuple[str, ...]
    roles: tuple[str, ...]
    caps: tuple[tuple[str, str, float], ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.roles):
            raise ValueError("nodes and roles must have equal length")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node names")
        known = set(self.nodes) | {GROUND}
        for a, b, value in self.caps:
            if a not in known or b not in known:
                raise ConfigError(f"capacitor endpoint {a!r}/{b!r} is not a node")
            if a == b:
                raise ConfigError(f"capacitor with both ends on {a!r}")
            if value <= 0.0:
                raise ConfigError(f"capacitor {a}-{b} must be positive, got {value}")

    def index(self, name: str) -> int:
        return self.nodes.index(name)

    def pad_indices(self) -> tuple[int, int]:
        pads = [i for i, r in enumerate(self.roles) if r == "pad"]
        if len(pads) != 2:
            raise ConfigError(f"expected exactly 2 pad nodes, found {len(pads)}")
        return pads[0], pads[1]

    def with_cap(self, node_a: str, node_b: str, value: float) -> "CapNetwork":
        """Copy of the network with one capacitor value replaced."""
        out = []
        hit = False
        for a, b, v in self.caps:
            if {a, b} == {node_a, node_b}:
                out.append((a, b, value))
                hit = True
            else:
                out.append((a, b, v))
        if not hit:
            raise ConfigError(f"no capacitor between {node_a!r} and {node_b!r}")
        return replace(self, caps=tuple(out))


@dataclass(frozen=True)
class ReducedEnergies:
    """Charge energies and pairwise couplings of the retained modes (GHz)."""

    labels: tuple[str, ...]
    E_C: np.ndarray
    J: np.ndarray

    def coupling(self, a: str, b: str) -> float:
        return float(self.J[self.labels.index(a), self.labels.index(b)])

    def charge_energy(self, a: str) -> float:
        return float(self.E_C[self.labels.index(a)])


def layout_network(tag: str, caps: LayoutCaps = LayoutCaps()) -> CapNetwork:
    """Built-in network for one of the supported layout tags.

    Pad attachments beyond the printed seven-node matrix are inferred:
    TC/LTC pairs split evenly across the pads, readout on the second
    pad.  Node names carry the pad suffix (a = pad1, b = pad2).
    """
    if tag not in _TAG_PADS:
        raise ConfigError(f"unknown layout tag {tag!r}; supported: {LAYOUT_TAGS}")
    pad1, pad2 = _TAG_PADS[tag]
    nodes = ["pad1", "pad2"]
    roles = ["pad", "pad"]
    cap_list = [
        ("pad1", "pad2", caps.C_q),
        ("pad1", GROUND, caps.C_g),
        ("pad2", GROUND, caps.C_g),
    ]
    counters: dict[str, int] = {}
    for pad_name, attach in (("pad1", pad1), ("pad2", pad2)):
        suffix = "a" if pad_name == "pad1" else "b"
        for role in attach:
            counters[role] = counters.get(role, 0) + 1
            name = f"{role}{counters[role]}_{suffix}"
            nodes.append(name)
            roles.append(role)
            cap_list.append((pad_name, name, getattr(caps, _ROLE_COUPLING[role])))
            cap_list.append((name, GROUND, getattr(caps, _ROLE_SELF[role])))
    return CapNetwork(tag=tag, nodes=tuple(nodes), roles=tuple(roles), caps=tuple(cap_list))


def build_matrix(net: CapNetwork) -> np.ndarray:
    """Node capacitance matrix in fF.

    Diagonal entries sum every capacitance touching the node (ground
    included); off-diagonal entries are minus the direct capacitance.
    """
    n = len(net.nodes)
    C = np.zeros((n, n))
    touched = [False] * n
    for a, b, value in net.caps:
        if a != GROUND:
            i = net.index(a)
            C[i, i] += value
            touched[i] = True
        if b != GROUND:
            j = net.index(b)
            C[j, j] += value
            touched[j] = True
        if a != GROUND and b != GROUND:
            C[i, j] -= value
            C[j, i] -= value
    if not all(touched):
        lonely = [net.nodes[i] for i, t in enumerate(touched) if not t]
        raise ConfigError(f"floating nodes with no capacitor: {lonely}")
    _check_connected(net)
    w = np.linalg.eigvalsh(C)
    if w[0] < -1e-12 * max(1.0, w[-1]):
        raise NumericsError(f"capacitance matrix not positive semidefinite: {w[0]}")
    return C


def _check_connected(net: CapNetwork) -> None:
    """Every node must reach ground through the capacitor graph."""
    adj: dict[str, set[str]] = {name: set() for name in (*net.nodes, GROUND)}
    for a, b, _ in net.caps:
        adj[a].add(b)
        adj[b].add(a)
    seen = {GROUND}
    stack = [GROUND]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    missing = [n for n in net.nodes if n not in seen]
    if missing:
        raise ConfigError(f"island disconnected from ground: {missing}")


def pad_transform(net: CapNetwork) -> tuple[np.ndarray, tuple[int, ...]]:
    """Default mode transform: pad sum and difference, identity elsewhere.

    Returns (S, free_mode_indices); the pad-sum row is the free mode.
    """
    i, j = net.pad_indices()
    n = len(net.nodes)
    S = np.eye(n)
    S[i, i] = S[i, j] = S[j, i] = 1.0
    S[j, j] = -1.0
    return S, (i,)


def reduce(
    net: CapNetwork,
    transform: np.ndarray | None = None,
    free_modes: tuple[int, ...] | None = None,
) -> ReducedEnergies:
    """Charge energies and couplings of the retained modes.

    C -> S^-1 C_r S^-1, invert, drop the free-mode rows and columns,
    then E_C = e^2 [C^-1]_kk / 2 and J_jk = 4 e^2 [C^-1]_jk.
    """
    C_r = build_matrix(net)
    if transform is None:
        transform, free_modes = pad_transform(net)
    elif free_modes is None:
        raise ValueError("free_modes must accompany an explicit transform")
    if abs(np.linalg.det(transform)) < 1e-12:
        raise ValueError("transform must be invertible")
    Si = np.linalg.inv(transform)
    C = Si @ C_r @ Si
    try:
        C_inv = np.linalg.inv(C)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"transformed capacitance matrix singular: {exc}") from None
    keep = [k for k in range(len(net.nodes)) if k not in free_modes]
    C_inv = C_inv[np.ix_(keep, keep)]
    # relative pivot check on the retained block
    w = np.linalg.eigvalsh(C_inv)
    if w[0] <= 1e-12 * w[-1]:
        raise NumericsError("retained capacitance block numerically singular")
    pad_lo, _ = net.pad_indices()
    labels = []
    for k in keep:
        if net.roles[k] == "pad":
            labels.append("q")
        else:
            labels.append(net.nodes[k])
    E_C = E_C_COEF * np.diag(C_inv).copy()
    J = J_COEF * C_inv
    np.fill_diagonal(J, 0.0)
    if np.any(E_C <= 0.0):
        raise NumericsError("nonpositive charge energy in reduction")
    return ReducedEnergies(labels=tuple(labels), E_C=E_C, J=J)


def sweep_capacitor(
    net: CapNetwork,
    node_a: str,
    node_b: str,
    grid: np.ndarray,
) -> list[dict]:
    """One reduction per grid value of the selected capacitor."""
    if len(grid) == 0:
        raise ValueError("capacitor grid must be nonempty")
    rows: list[dict] = []
    for value in grid:
        row: dict = {"cap_fF": float(value)}
        try:
            red = reduce(net.with_cap(node_a, node_b, float(value)))
        except (ConfigError, NumericsError) as exc:
            row["error"] = str(exc)
        else:
            for label, ec in zip(red.labels, red.E_C):
                row[f"E_C_{label}_GHz"] = float(ec)
            qi = red.labels.index("q")
            for k, label in enumerate(red.labels):
                if k != qi:
                    row[f"J_q_{label}_GHz"] = float(red.J[qi, k])
        rows.append(row)
    return rows
