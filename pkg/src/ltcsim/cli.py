"""Scenario-driven command line: config in, CSV/JSON plot data out.

Usage: ``ltcsim CONFIG [--scenario NAME] [flags]``.  The config is the
only positional argument; everything else is a flag.  Each run writes
its artifacts plus a ``manifest.json`` echoing every resolved value and
a content hash of the input; feeding that manifest back as the config
reproduces the same outputs.

Flags may also be set through environment variables prefixed with
``LTCSIM_`` (e.g. ``LTCSIM_OUT``, ``LTCSIM_THREADS``, ``LTCSIM_SEED``,
``LTCSIM_SCENARIO``, ``LTCSIM_STRICT_TOLERANCES=1``); explicit flags
win over the environment.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 tolerance violation in --check mode.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .coupled import CoupledModel
from .cpw import fundamental_mode, sweep_vs_terminator
from .errors import ConfigError, LtcsimError
from .ltc import coupling_sweep, zero_coupling_bias
from .multimode import MultimodeModel, coupler_mode_frequencies

SCENARIOS = (
    "modes",
    "ltc-sweep",
    "spectrum",
    "metrics",
    "gate",
    "gate-sweep",
    "layout",
    "multimode",
)

ENV_PREFIX = "LTCSIM_"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("ltcsim")
    except Exception:
        return "unknown"


def _env_default(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="ltcsim", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    ap.add_argument("config", nargs="?", help="config file (.cfg, or a manifest .json)")
    ap.add_argument("--list-fixtures", action="store_true", help="print the built-in fixture catalog and exit")
    ap.add_argument("--scenario", choices=SCENARIOS, default=_env_default("scenario"))
    ap.add_argument("--sweep", default=_env_default("sweep"), help="name:start:stop:step, overrides the [sweep] section")
    ap.add_argument("--out", default=_env_default("out", "."), help="output directory")
    ap.add_argument("--threads", type=int, default=int(_env_default("threads", 0) or 0), help="worker threads for sweeps (0 = hardware)")
    ap.add_argument("--seed", type=int, default=int(_env_default("seed", 0) or 0), help="seed recorded in the manifest and used for optimizer restarts")
    ap.add_argument("--check", action="store_true", default=bool(_env_default("check")), help="evaluate the [check] block; exit 4 on violation")
    ap.add_argument("--strict-tolerances", action="store_true", default=bool(_env_default("strict_tolerances")), help="halve every [check] tolerance")
    ap.add_argument("--scheme", choices=("cosine", "cosine+drag", "sync", "sync+drag"), default=_env_default("scheme"))
    ap.add_argument("--target", choices=("11-21", "11-12"), default=_env_default("target", "11-21"), help="driven transition for gate scenarios")
    ap.add_argument("--tg", type=float, default=None, help="gate length override (ns)")
    ap.add_argument("--tr", type=float, default=None, help="ramp time override (ns)")
    ap.add_argument("--tag", default=_env_default("tag"), help="layout tag override")
    ap.add_argument("--bias", type=float, default=None, help="coupler bias override (flux fraction)")
    return ap.parse_args(argv)


def _load_config(path: str) -> cfgmod.ParsedConfig:
    p = Path(path)
    if p.suffix == ".json":
        try:
            manifest = json.loads(p.read_text())
            text = manifest["config_text"]
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read manifest {p}: {exc}") from None
        return cfgmod.parse_text(text, origin=str(p))
    return cfgmod.load(p)


def _grid_from_sweep(cfg: cfgmod.ParsedConfig, flag: str | None):
    if flag:
        parts = flag.split(":")
        if len(parts) != 4:
            raise ConfigError(f"--sweep must be name:start:stop:step, got {flag!r}")
        name = parts[0]
        try:
            start, stop, step = (float(v) for v in parts[1:])
        except ValueError:
            raise ConfigError(f"non-numeric sweep bounds in {flag!r}") from None
    elif cfg.has("sweep"):
        name = str(cfg.require("sweep", "name"))
        start = float(cfg.require("sweep", "start"))
        stop = float(cfg.require("sweep", "stop"))
        step = float(cfg.require("sweep", "step"))
    else:
        return None, None
    if step <= 0.0 or stop < start:
        raise ConfigError(f"sweep needs step > 0 and stop >= start, got {start}:{stop}:{step}")
    grid = np.arange(start, stop + step / 2.0, step)
    return name, grid


def _pmap(fn, items, threads: int):
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    cols = list(rows[0].keys())
    for row in rows[1:]:
        for key in row:
            if key not in cols:
                cols.append(key)
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in cols))
    path.write_text("\n".join(lines) + "\n")


def _metrics_row(m) -> dict:
    return {
        "bias": m.bias,
        "dshift_12_i_GHz": m.dshift_12_i,
        "dshift_i_12_GHz": m.dshift_i_12,
        "zz_GHz": m.zz,
        "hyb_12_21": m.hyb_12_21,
        "hyb_03_30": m.hyb_03_30,
        "ambiguous": len(m.ambiguous),
    }


# -- scenarios ---------------------------------------------------------------


def _run_modes(cfg, args):
    spec = cfgmod.build_cpw(cfg)
    name, grid = _grid_from_sweep(cfg, args.sweep)
    if grid is not None and name != "L_S":
        raise ConfigError(f"modes scenario sweeps L_S, got {name!r}")
    rows = sweep_vs_terminator(spec, [float(v) for v in grid] if grid is not None else [spec.L_S])
    base = fundamental_mode(spec)
    summary = {
        "freq_GHz": base.freq,
        "E_C_GHz": base.E_C,
        "E_L_GHz": base.E_L,
        "C_k_fF": base.C_k,
        "eta": base.eta,
    }
    return rows, summary, "modes.csv"


def _run_ltc_sweep(cfg, args):
    ltc = cfgmod.build_ltc(cfg)
    name, grid = _grid_from_sweep(cfg, args.sweep)
    if grid is None:
        grid = np.arange(0.0, 0.5001, 0.002)
    elif name != "bias":
        raise ConfigError(f"ltc-sweep scenario sweeps bias, got {name!r}")
    rows = coupling_sweep(ltc, grid)
    g_ind = np.array([r["g_ind_GHz"] for r in rows])
    phi_off, _ = zero_coupling_bias(ltc)
    summary = {
        "max_abs_g_ind_GHz": float(np.max(np.abs(g_ind))),
        "max_abs_g_cap_GHz": float(max(abs(r["g_cap_GHz"]) for r in rows)),
        "argmin_bias": float(grid[int(np.argmin(np.abs(g_ind)))]),
        "zero_coupling_bias": phi_off,
    }
    return rows, summary, "ltc_sweep.csv"


def _collision_summary(rows_in, results):
    """Interpolated zero crossings of the two-photon detunings in w_p1."""
    wps = [r[0] for r in rows_in]
    summary = {}
    for key, out_key in (("detuning_lo_GHz", "collision_lo_GHz"), ("detuning_hi_GHz", "collision_hi_GHz")):
        vals = [r[key] for r in results]
        for i in range(len(wps) - 1):
            if vals[i] * vals[i + 1] < 0:
                x = wps[i] - vals[i] * (wps[i + 1] - wps[i]) / (vals[i + 1] - vals[i])
                summary[out_key] = x
                break
    return summary


def _run_spectrum(cfg, args):
    bias = args.bias
    if cfg.has("rows"):
        base = cfgmod.build_system(cfg)
        rows_in = cfgmod.qubit_rows(cfg)

        def one(entry):
            wp, ej1, ej2 = entry
            spec = dataclasses.replace(
                base,
                q1=dataclasses.replace(base.q1, E_J=ej1),
                q2=dataclasses.replace(base.q2, E_J=ej2),
            )
            model = CoupledModel(spec, bias)
            e = model.labeled.energy
            lo, hi = model.collision_frequencies()
            wd = e((2, 1, 0)) - e((1, 1, 0))
            return {
                "w_p1_GHz": wp,
                "E_J1_GHz": ej1,
                "E_J2_GHz": ej2,
                "drive_GHz": wd,
                "collision_lo_GHz": lo,
                "collision_hi_GHz": hi,
                "detuning_lo_GHz": wd - lo,
                "detuning_hi_GHz": wd - hi,
            }

        rows = _pmap(one, rows_in, args.threads)
        return rows, _collision_summary(rows_in, rows), "spectrum.csv"

    model = CoupledModel(cfgmod.build_system(cfg), bias)
    rows = []
    for n, (lab, en) in enumerate(zip(model.labeled.labels, model.labeled.energies)):
        rows.append(
            {
                "index": n,
                "q1": lab[0],
                "q2": lab[1],
                "coupler": lab[2],
                "energy_GHz": float(en),
                "overlap": float(model.labeled.overlaps[n]),
            }
        )
    e = model.labeled.energy
    summary = {
        "f_10_20_GHz": e((2, 0, 0)) - e((1, 0, 0)),
        "f_11_21_GHz": e((2, 1, 0)) - e((1, 1, 0)),
        "f_01_02_GHz": e((0, 2, 0)) - e((0, 1, 0)),
        "f_11_12_GHz": e((1, 2, 0)) - e((1, 1, 0)),
    }
    summary["dshift_12_i_GHz"] = summary["f_11_21_GHz"] - summary["f_10_20_GHz"]
    summary["dshift_i_12_GHz"] = summary["f_11_12_GHz"] - summary["f_01_02_GHz"]
    return rows, summary, "spectrum.csv"


def _run_metrics(cfg, args):
    spec = cfgmod.build_system(cfg)
    name, grid = _grid_from_sweep(cfg, args.sweep)
    if grid is None:
        grid = np.arange(0.0, 0.5001, 0.002)
    elif name != "bias":
        raise ConfigError(f"metrics scenario sweeps bias, got {name!r}")

    rows = _pmap(lambda b: _metrics_row(CoupledModel(spec, float(b)).metrics()), list(grid), args.threads)
    shift = np.array([max(abs(r["dshift_12_i_GHz"]), abs(r["dshift_i_12_GHz"])) for r in rows])
    phi_off, _ = zero_coupling_bias(spec.ltc)
    summary = {
        "argmin_bias": float(grid[int(np.argmin(shift))]),
        "max_shift_MHz": float(np.max(shift)) * 1e3,
        "min_shift_MHz": float(np.min(shift)) * 1e3,
        "max_abs_zz_kHz": float(max(abs(r["zz_GHz"]) for r in rows)) * 1e6,
        "zero_coupling_bias": phi_off,
    }
    return rows, summary, "metrics.csv"


def _gate_setup(cfg, args):
    from .gates import DressedSystem

    ds = DressedSystem(CoupledModel(cfgmod.build_system(cfg), args.bias))
    if args.target == "11-21":
        target = ((1, 1, 0), (2, 1, 0))
        spur = ((1, 0, 0), (2, 0, 0))
        drag_ref = ((0, 1, 0), (0, 2, 0)) if args.scheme == "sync+drag" else spur
    else:
        target = ((1, 1, 0), (1, 2, 0))
        spur = ((0, 1, 0), (0, 2, 0))
        drag_ref = spur
    f_t = ds.transition(*target)
    drag_delta = ds.transition(*drag_ref) - f_t
    return ds, target, f_t, drag_delta


def _run_one_gate(cfg, args, ds, target, f_t, drag_delta, t_g, t_r):
    from .gates import optimize_drive

    scheme = args.scheme or ("sync+drag" if str(cfg.get("pulse", "shape", "")) == "flattop_cosine" else "cosine+drag")
    sync = scheme.startswith("sync")
    shape = "flattop_cosine" if sync else "cosine"
    drag = {} if scheme.endswith("drag") else {"drag": None}
    pulse = cfgmod.build_pulse(cfg, shape=shape, t_g=t_g, t_r=t_r, drag_delta=drag_delta, **drag)
    num = cfg.section("numerics")
    out = optimize_drive(
        ds,
        pulse,
        target,
        budget=int(num.get("budget", 60 if not sync else 120)),
        restarts=int(num.get("restarts", 2)),
        synchronized=sync,
        coarse_factor=float(num.get("coarse_factor", 2.0)),
    )
    r = out.result
    return {
        "scheme": scheme,
        "t_g_ns": t_g,
        "t_r_ns": t_r,
        "amplitude_GHz": r.pulse.amplitude,
        "freq_GHz": r.pulse.freq,
        "gate_error": r.error,
        "leakage": r.leakage,
        "conditional_phase_rad": r.conditional_phase,
        "evaluations": len(out.log),
        "converged": out.converged,
    }


def _run_gate(cfg, args):
    from .gates import synchronized_params

    ds, target, f_t, drag_delta = _gate_setup(cfg, args)
    t_g = args.tg if args.tg is not None else float(cfg.get("pulse", "t_g_ns", 100.0))
    t_r = args.tr if args.tr is not None else float(cfg.get("pulse", "t_r_ns", 10.0))
    row = _run_one_gate(cfg, args, ds, target, f_t, drag_delta, t_g, t_r)
    summary = dict(row)
    if row["scheme"].startswith("sync"):
        sp = synchronized_params(ds)
        summary.update(
            t_flat_ns=sp.t_flat,
            sync_amplitude_GHz=sp.amplitude,
            sync_delta_GHz=sp.delta,
            eta=sp.eta,
            element_ratio=sp.r,
        )
    return None, summary, "gate.json"


def _run_gate_sweep(cfg, args):
    ds, target, f_t, drag_delta = _gate_setup(cfg, args)
    name, grid = _grid_from_sweep(cfg, args.sweep)
    if grid is None or name not in ("tg", "tr"):
        raise ConfigError("gate-sweep needs --sweep tg:...:... or tr:...:...")
    t_g = args.tg if args.tg is not None else float(cfg.get("pulse", "t_g_ns", 100.0))
    t_r = args.tr if args.tr is not None else float(cfg.get("pulse", "t_r_ns", 10.0))
    rows = []
    for v in grid:
        v = float(v)
        tg_i, tr_i = (v, t_r) if name == "tg" else (t_g, v)
        rows.append(_run_one_gate(cfg, args, ds, target, f_t, drag_delta, tg_i, tr_i))
    errs = [r["gate_error"] for r in rows]
    best = int(np.argmin(errs))
    summary = {"min_error": errs[best], "best_" + name: float(grid[best])}
    return rows, summary, "gate_sweep.csv"


def _run_layout(cfg, args):
    from .layout import reduce as reduce_network
    from .layout import sweep_capacitor

    tag = args.tag or None
    net = cfgmod.build_network(cfg, tag)
    name, grid = _grid_from_sweep(cfg, args.sweep)
    if grid is not None:
        if name in cfgmod._SCHEMA["layout.caps"]:
            name = name[: -len("_fF")]
        caps = cfgmod.build_layout_caps(cfg) if cfg.has("layout.caps") else None
        if caps is None or not hasattr(caps, name):
            raise ConfigError(f"layout sweep name {name!r} is not a capacitor field")
        from .layout import layout_network

        rows = []
        for v in grid:
            net_v = layout_network(net.tag, dataclasses.replace(caps, **{name: float(v)}))
            red = reduce_network(net_v)
            row = {"cap_fF": float(v)}
            row.update(_layout_row(red))
            rows.append(row)
    else:
        rows = [_layout_row(reduce_network(net))]
    return rows, dict(rows[0]), "layout.csv"


def _layout_row(red) -> dict:
    row = {}
    qi = red.labels.index("q")
    row["E_C_q_GHz"] = float(red.E_C[qi])
    for k, label in enumerate(red.labels):
        if label == "q":
            continue
        row[f"E_C_{label}_GHz"] = float(red.E_C[k])
        row[f"J_q_{label}_GHz"] = float(red.J[qi, k])
    return row


def _run_multimode(cfg, args):
    spec = cfgmod.build_multimode(cfg)
    name, grid = _grid_from_sweep(cfg, args.sweep)
    if grid is None:
        grid = np.arange(0.0, 0.5001, 0.05)
    elif name != "bias":
        raise ConfigError(f"multimode scenario sweeps bias, got {name!r}")

    def one(b):
        b = float(b)
        w = coupler_mode_frequencies(spec, b)
        row = {"bias": b, "n_modes": 3, "mode1_GHz": float(w[0]), "mode2_GHz": float(w[1]), "mode3_GHz": float(w[2])}
        row.update(_metrics_row(MultimodeModel(spec, b).metrics()))
        return row

    rows = _pmap(one, list(grid), args.threads)
    shift = np.array([max(abs(r["dshift_12_i_GHz"]), abs(r["dshift_i_12_GHz"])) for r in rows])
    summary = {
        "max_shift_MHz": float(np.max(shift)) * 1e3,
        "argmin_bias": float(grid[int(np.argmin(shift))]),
        "max_abs_zz_kHz": float(max(abs(r["zz_GHz"]) for r in rows)) * 1e6,
    }
    return rows, summary, "multimode.csv"


_SCENARIO_FN = {
    "modes": _run_modes,
    "ltc-sweep": _run_ltc_sweep,
    "spectrum": _run_spectrum,
    "metrics": _run_metrics,
    "gate": _run_gate,
    "gate-sweep": _run_gate_sweep,
    "layout": _run_layout,
    "multimode": _run_multimode,
}


def _evaluate_checks(cfg, summary: dict, strict: bool) -> list[str]:
    failures = []
    for key, spec in cfg.section("check").items():
        if not isinstance(spec, tuple) or len(spec) != 2:
            raise ConfigError(f"[check] {key} needs 'target tolerance'")
        target, tol = float(spec[0]), float(spec[1])
        if strict:
            tol /= 2.0
        if key not in summary:
            raise ConfigError(
                f"[check] key {key!r} not reported by this scenario; "
                f"available: {sorted(summary)}"
            )
        value = float(summary[key])
        if not math.isfinite(value) or abs(value - target) > tol:
            failures.append(f"{key} = {value:.9g}, wanted {target:.9g} +- {tol:.9g}")
    return failures


def run(argv=None) -> int:
    args = _parse_args(argv)
    if args.list_fixtures:
        for entry in cfgmod.list_fixtures():
            print(f"{entry['file']}: {entry['description']}")
        return EXIT_OK
    if not args.config:
        print("error: a config path is required (or --list-fixtures)", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = _load_config(args.config)
        scenario = args.scenario or str(cfg.get("meta", "scenario", "")) or None
        if scenario not in _SCENARIO_FN:
            raise ConfigError(
                f"no scenario selected (use --scenario or [meta] scenario); got {scenario!r}"
            )
        np.random.seed(args.seed)
        rows, summary, artifact = _SCENARIO_FN[scenario](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LtcsimError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    if artifact.endswith(".json"):
        path = out_dir / artifact
        path.write_text(json.dumps(summary, indent=2, default=float) + "\n")
        outputs.append(str(path))
    if rows is not None:
        path = out_dir / (artifact if artifact.endswith(".csv") else artifact + ".csv")
        _write_csv(path, rows)
        outputs.append(str(path))

    manifest = {
        "package": "ltcsim",
        "version": _version(),
        "scenario": scenario,
        "config_origin": cfg.origin,
        "config_sha256": cfg.content_hash(),
        "flags": {
            "sweep": args.sweep,
            "out": args.out,
            "threads": args.threads,
            "seed": args.seed,
            "scheme": args.scheme,
            "target": args.target,
            "tag": args.tag,
            "strict_tolerances": args.strict_tolerances,
        },
        "summary": {k: (float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v) for k, v in summary.items()},
        "outputs": outputs,
        "config_text": cfgmod.render(cfg.sections),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    for key, value in summary.items():
        print(f"{key} = {_fmt(value)}")

    if args.check:
        failures = _evaluate_checks(cfg, summary, args.strict_tolerances)
        for f in failures:
            print(f"check failed: {f}", file=sys.stderr)
        if failures:
            return EXIT_CHECK
    return EXIT_OK


def main() -> None:
    sys.exit(run())
