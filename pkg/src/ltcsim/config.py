"""Strict line-oriented configuration files for the scenario CLI.

Format: ``[section]`` headers (dots allowed for nesting), ``key = value``
assignments, ``#`` or ``;`` comments, blank lines.  Scalars are typed by
shape (int, float, bool, bare string); multi-token values become typed
tuples.  A few keys (node, cap, row) may repeat and accumulate in order.
Everything else is strict: unknown sections, unknown keys, duplicated
scalar keys, and type mismatches all fail with a line diagnostic before
any computation starts.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

Scalar = int | float | bool | str
Value = Scalar | tuple[Scalar, ...] | list

_REPEATABLE = {"node", "cap", "row"}

_INT_RE = re.compile(r"[+-]?\d+$")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

# value type codes: i int, f float (int accepted), b bool, s string,
# t tuple of typed tokens
_SCHEMA: dict[str, dict[str, str]] = {
    "meta": {"name": "s", "scenario": "s", "table": "s", "notes": "s"},
    "cpw": {
        "d_cm": "f",
        "L_l_nH_per_cm": "f",
        "C_l_fF_per_cm": "f",
        "L_S_nH": "f",
        "mode_index": "i",
    },
    "resonator": {"E_C_GHz": "f", "E_L_GHz": "f", "eta": "f"},
    "halfwave": {"E_C_GHz": "f", "E_L_GHz": "f"},
    "qubit1": {"E_C_GHz": "f", "E_L_GHz": "f", "E_J_GHz": "f"},
    "qubit2": {"E_C_GHz": "f", "E_L_GHz": "f", "E_J_GHz": "f"},
    "coupler": {"E_Jc_GHz": "f", "C_J_fF": "f", "bias": "f"},
    "couplings": {"J_c1_GHz": "f", "J_c2_GHz": "f", "J_c_GHz": "f"},
    "pulse": {
        "shape": "s",
        "amplitude_GHz": "f",
        "freq_GHz": "f",
        "t_g_ns": "f",
        "t_r_ns": "f",
        "drag_alpha": "f",
        "drag_delta_GHz": "f",
    },
    "numerics": {
        "n_keep": "i",
        "n_fock": "i",
        "basis_size": "i",
        "coarse_factor": "f",
        "budget": "i",
        "restarts": "i",
    },
    "layout": {"tag": "s"},
    "layout.caps": {
        "C_TC_fF": "f",
        "C_LTC_fF": "f",
        "C_R_fF": "f",
        "C_q_fF": "f",
        "C_g_fF": "f",
        "C_qt_fF": "f",
        "C_qr_fF": "f",
        "C_qL_fF": "f",
    },
    "network": {"node": "t", "cap": "t"},
    "rows": {"row": "t"},
    "sweep": {"name": "s", "start": "f", "stop": "f", "step": "f"},
    # check targets: every key maps to (target, tolerance)
    "check": {"*": "t"},
}

FIXTURE_TABLES = {
    "table1_cpw.cfg": "quarter-wave resonator line parameters",
    "table2_fltcf.cfg": "coupled two-fluxonium device, 1 cm coupler",
    "table3_extended.cfg": "coupled two-fluxonium device, 1.5 cm coupler",
    "table4_layout.cfg": "lattice capacitance network",
    "table7_multimode.cfg": "three-mode coupler device",
    "table8_collisions.cfg": "90 MHz plasmon-detuning frequency scan",
    "table9_collisions.cfg": "120 MHz plasmon-detuning frequency scan",
}


@dataclass
class ParsedConfig:
    """Validated config: raw text plus typed sections."""

    origin: str
    text: str
    sections: dict[str, dict[str, Value]] = field(default_factory=dict)

    def section(self, name: str) -> dict[str, Value]:
        return self.sections.get(name, {})

    def has(self, name: str) -> bool:
        return name in self.sections

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigError(
                f"{self.origin}: missing required key {key!r} in [{section}]"
            ) from None

    def content_hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


def _type_scalar(token: str) -> Scalar:
    if _INT_RE.match(token):
        return int(token)
    if _FLOAT_RE.match(token):
        return float(token)
    if token in ("true", "false"):
        return token == "true"
    return token


def _check_type(origin: str, lineno: int, section: str, key: str, value, code: str):
    ok = {
        "i": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "f": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "b": lambda v: isinstance(v, bool),
        "s": lambda v: isinstance(v, str),
        "t": lambda v: isinstance(v, tuple),
    }[code]
    if not ok(value):
        raise ConfigError(
            f"{origin}:{lineno}: [{section}] {key} = {value!r} has the wrong type"
        )


def parse_text(text: str, origin: str = "<string>") -> ParsedConfig:
    """Parse and validate config text against the schema."""
    sections: dict[str, dict[str, Value]] = {}
    lines_of: dict[tuple[str, str], int] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{origin}:{lineno}: malformed section header {line!r}")
            current = line[1:-1].strip()
            if current not in _SCHEMA:
                raise ConfigError(f"{origin}:{lineno}: unknown section [{current}]")
            if current in sections:
                raise ConfigError(f"{origin}:{lineno}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if current is None:
            raise ConfigError(f"{origin}:{lineno}: assignment before any section")
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {line!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.split("#")[0].strip()
        if not key or not rhs:
            raise ConfigError(f"{origin}:{lineno}: empty key or value")
        schema = _SCHEMA[current]
        if key not in schema and "*" not in schema:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r} in [{current}]")
        code = schema.get(key, schema.get("*"))
        tokens = rhs.split()
        value: Value = _type_scalar(tokens[0]) if len(tokens) == 1 else tuple(
            _type_scalar(t) for t in tokens
        )
        if code == "t" and not isinstance(value, tuple):
            value = (value,)
        _check_type(origin, lineno, current, key, value, code)
        if key in _REPEATABLE:
            sections[current].setdefault(key, [])
            sections[current][key].append(value)  # type: ignore[union-attr]
        else:
            if (current, key) in lines_of:
                raise ConfigError(
                    f"{origin}:{lineno}: duplicate key {key!r} in [{current}] "
                    f"(first set on line {lines_of[(current, key)]})"
                )
            sections[current][key] = value
        lines_of[(current, key)] = lineno
    return ParsedConfig(origin=origin, text=text, sections=sections)


def load(path: str | Path) -> ParsedConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_text(text, origin=str(path))


def render(sections: dict[str, dict[str, Value]]) -> str:
    """Serialize sections back into the strict config format."""
    out: list[str] = []
    for name, body in sections.items():
        out.append(f"[{name}]")
        for key, value in body.items():
            entries = value if key in _REPEATABLE else [value]
            for entry in entries:
                if isinstance(entry, tuple):
                    rhs = " ".join(_fmt_scalar(v) for v in entry)
                else:
                    rhs = _fmt_scalar(entry)
                out.append(f"{key} = {rhs}")
        out.append("")
    return "\n".join(out)


def _fmt_scalar(v: Scalar) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


# -- builders: typed sections -> domain objects ------------------------------


def build_cpw(cfg: ParsedConfig):
    from .cpw import CpwSpec

    sec = "cpw"
    return CpwSpec(
        d=float(cfg.require(sec, "d_cm")),
        L_l=float(cfg.require(sec, "L_l_nH_per_cm")),
        C_l=float(cfg.require(sec, "C_l_fF_per_cm")),
        L_S=float(cfg.require(sec, "L_S_nH")),
    )


def build_resonator_mode(cfg: ParsedConfig):
    """One coupler-arm mode: geometry-derived, with tabulated energy override.

    When a [resonator] block quotes E_C and E_L directly, those override
    the geometric values but the profile factor eta still comes from the
    solved line mode (or an explicit eta key).
    """
    from .cpw import fundamental_mode, mode_from_energies

    geo = None
    if cfg.has("cpw"):
        geo = fundamental_mode(build_cpw(cfg))
    if not cfg.has("resonator"):
        if geo is None:
            raise ConfigError(f"{cfg.origin}: need a [cpw] or [resonator] section")
        return geo
    eta = cfg.get("resonator", "eta")
    if eta is None:
        if geo is None:
            raise ConfigError(
                f"{cfg.origin}: [resonator] without [cpw] must set eta explicitly"
            )
        eta = geo.eta
    return mode_from_energies(
        float(cfg.require("resonator", "E_C_GHz")),
        float(cfg.require("resonator", "E_L_GHz")),
        float(eta),
    )


def _fluxonium(cfg: ParsedConfig, sec: str):
    from .circuits import FluxoniumSpec

    return FluxoniumSpec(
        E_C=float(cfg.require(sec, "E_C_GHz")),
        E_L=float(cfg.require(sec, "E_L_GHz")),
        E_J=float(cfg.require(sec, "E_J_GHz")),
    )


def build_ltc(cfg: ParsedConfig):
    from .ltc import LtcSpec

    mode = build_resonator_mode(cfg)
    return LtcSpec(
        mode1=mode,
        mode2=mode,
        E_Jc=float(cfg.require("coupler", "E_Jc_GHz")),
        C_J=float(cfg.require("coupler", "C_J_fF")),
        phi_ext_c=float(cfg.get("coupler", "bias", 0.0)),
    )


def build_system(cfg: ParsedConfig):
    from .coupled import SystemSpec

    kwargs = {}
    num = cfg.section("numerics")
    if "n_keep" in num:
        kwargs["n_keep"] = int(num["n_keep"])
    if "n_fock" in num:
        kwargs["n_fock"] = int(num["n_fock"])
    if "basis_size" in num:
        kwargs["basis_size"] = int(num["basis_size"])
    return SystemSpec(
        q1=_fluxonium(cfg, "qubit1"),
        q2=_fluxonium(cfg, "qubit2"),
        ltc=build_ltc(cfg),
        J_c1=float(cfg.require("couplings", "J_c1_GHz")),
        J_c2=float(cfg.require("couplings", "J_c2_GHz")),
        **kwargs,
    )


def build_multimode(cfg: ParsedConfig):
    from .cpw import mode_from_energies
    from .multimode import MultimodeSpec

    # the half-wave arm has no terminating inductor: open-end profile
    half = mode_from_energies(
        float(cfg.require("halfwave", "E_C_GHz")),
        float(cfg.require("halfwave", "E_L_GHz")),
        1.0,
    )
    kwargs = {}
    num = cfg.section("numerics")
    if "n_keep" in num:
        kwargs["n_keep"] = int(num["n_keep"])
    if "n_fock" in num:
        kwargs["n_fock"] = int(num["n_fock"])
    if "basis_size" in num:
        kwargs["basis_size"] = int(num["basis_size"])
    return MultimodeSpec(
        ltc=build_ltc(cfg),
        half_wave=half,
        J_c=float(cfg.require("couplings", "J_c_GHz")),
        q1=_fluxonium(cfg, "qubit1"),
        q2=_fluxonium(cfg, "qubit2"),
        J_c1=float(cfg.require("couplings", "J_c1_GHz")),
        J_c2=float(cfg.require("couplings", "J_c2_GHz")),
        **kwargs,
    )


def build_layout_caps(cfg: ParsedConfig):
    from .layout import LayoutCaps

    body = cfg.section("layout.caps")
    kwargs = {key[: -len("_fF")]: float(val) for key, val in body.items()}
    return LayoutCaps(**kwargs)


def build_network(cfg: ParsedConfig, tag: str | None = None):
    """Custom [network] when present, otherwise the built-in tag layout."""
    from .layout import CapNetwork, layout_network

    if cfg.has("network"):
        nodes, roles = [], []
        for entry in cfg.get("network", "node", []):
            if len(entry) != 2:
                raise ConfigError(f"{cfg.origin}: node entries need 'name role'")
            nodes.append(str(entry[0]))
            roles.append(str(entry[1]))
        caps = []
        for entry in cfg.get("network", "cap", []):
            if len(entry) != 3:
                raise ConfigError(f"{cfg.origin}: cap entries need 'a b value_fF'")
            caps.append((str(entry[0]), str(entry[1]), float(entry[2])))
        return CapNetwork(
            tag=tag or "custom", nodes=tuple(nodes), roles=tuple(roles),
            caps=tuple(caps),
        )
    tag = tag or str(cfg.get("layout", "tag", "")) or None
    if tag is None:
        raise ConfigError(f"{cfg.origin}: layout scenario needs [layout] tag or [network]")
    caps = build_layout_caps(cfg) if cfg.has("layout.caps") else None
    return layout_network(tag, caps) if caps else layout_network(tag)


def build_pulse(cfg: ParsedConfig, **overrides):
    from .gates import PulseSpec

    body = dict(cfg.section("pulse"))
    shape = str(overrides.pop("shape", body.get("shape", "cosine")))
    drag = None
    if "drag_delta_GHz" in body or "drag_delta" in overrides:
        drag = (
            float(body.get("drag_alpha", 1.0)),
            float(overrides.pop("drag_delta", body.get("drag_delta_GHz", 0.0))),
        )
    return PulseSpec(
        shape=shape,
        amplitude=float(overrides.pop("amplitude", body.get("amplitude_GHz", 0.0))),
        freq=float(overrides.pop("freq", body.get("freq_GHz", 0.0))),
        t_g=float(overrides.pop("t_g", body.get("t_g_ns", 100.0))),
        t_r=float(overrides.pop("t_r", body.get("t_r_ns", 0.0))),
        drag=drag,
        **overrides,
    )


def qubit_rows(cfg: ParsedConfig) -> list[tuple[float, float, float]]:
    """(plasmon frequency, E_J1, E_J2) rows of a frequency-scan fixture."""
    rows = cfg.get("rows", "row", [])
    out = []
    for entry in rows:
        if len(entry) != 3:
            raise ConfigError(f"{cfg.origin}: row entries need 'w_p1 E_J1 E_J2'")
        out.append(tuple(float(v) for v in entry))
    return out


def fixture_dir():
    return resources.files("ltcsim") / "fixtures"


def fixture_path(name: str) -> Path:
    """Filesystem path of a built-in fixture by file name."""
    if name not in FIXTURE_TABLES:
        raise ConfigError(
            f"unknown fixture {name!r}; available: {sorted(FIXTURE_TABLES)}"
        )
    return Path(str(fixture_dir() / name))


def list_fixtures() -> list[dict[str, str]]:
    """Catalog of the built-in fixtures with their descriptions."""
    out = []
    for name, desc in sorted(FIXTURE_TABLES.items()):
        out.append({"file": name, "description": desc})
    return out
