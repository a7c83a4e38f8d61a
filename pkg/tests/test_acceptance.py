"""End-to-end acceptance gate: ten numbered criteria, one verdict line each.

Each test prints and records a single pass/fail line before asserting,
so the full scoreboard survives individual failures.  Known open items
are documented in the project decision notes; the corresponding checks
are left failing rather than loosened.
"""

import dataclasses
import math

import numpy as np
import pytest
from scipy.optimize import brentq

import conftest
from ltcsim import cpw, ltc, coupled, gates, layout
from ltcsim import config as cfgmod
from ltcsim.coupled import CoupledModel
from ltcsim.gates import DressedSystem, PulseSpec, optimize_drive
from ltcsim.units import josephson_energy

_state: dict = {"defects": [], "transition_sets": []}


def _report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _std_mode(L_S=0.5):
    return cpw.fundamental_mode(cpw.CpwSpec(d=0.50, L_l=4.37, C_l=1586.42, L_S=L_S))


def _ltc_spec(L_S=0.5, C_J=2.5, bias=0.0):
    mode = _std_mode(L_S)
    return ltc.LtcSpec(mode1=mode, mode2=mode, E_Jc=josephson_energy(200.0),
                       C_J=C_J, phi_ext_c=bias)


def _four_transitions(model: CoupledModel) -> dict[str, float]:
    e = model.labeled.energy
    return {
        "10-20": e((2, 0, 0)) - e((1, 0, 0)),
        "11-21": e((2, 1, 0)) - e((1, 1, 0)),
        "01-02": e((0, 2, 0)) - e((0, 1, 0)),
        "11-12": e((1, 2, 0)) - e((1, 1, 0)),
    }


def _optimize(ds, target, drag_delta, t_g, t_r=0.0, synchronized=False,
              budget=40, restarts=2):
    shape = "flattop_cosine" if synchronized else "cosine"
    pulse = PulseSpec(shape=shape, amplitude=0.0, freq=ds.transition(*target),
                      t_g=t_g, t_r=t_r, drag=(1.0, drag_delta))
    out = optimize_drive(ds, pulse, target, budget=budget, restarts=restarts,
                         synchronized=synchronized)
    _state["defects"].append(out.result.unitarity_defect)
    return out


def test_criterion_01_resonator_mode():
    p = _std_mode()
    checks = [
        abs(p.E_C / 0.0403 - 1.0) < 0.005,
        abs(p.E_L / 74.755 - 1.0) < 0.005,
        abs(p.freq / 4.9 - 1.0) < 0.01,
        abs(p.C_k / 480.0 - 1.0) < 0.03,
    ]
    _report(1, all(checks),
            f"mode E_C={p.E_C:.4f} E_L={p.E_L:.3f} freq={p.freq:.4f} "
            f"C_k={p.C_k:.1f}")


def test_criterion_02_coupler_tunability():
    spec = _ltc_spec()
    grid = np.linspace(0.0, 0.5, 251)
    rows = ltc.coupling_sweep(spec, grid)
    g_ind_max = max(abs(r["g_ind_GHz"]) for r in rows)
    g_cap_max = max(abs(r["g_cap_GHz"]) for r in rows)
    ok = abs(g_ind_max / 0.250 - 1.0) < 0.10 and abs(g_cap_max / 0.001 - 1.0) < 0.50

    worst = 0.0
    for L_S in (0.3, 0.5, 0.7):
        for C_J in (2.5, 10.0):
            s = _ltc_spec(L_S=L_S, C_J=C_J)
            phi_off, _ = ltc.zero_coupling_bias(s)
            root = brentq(
                lambda b: ltc.linearize(s.at_bias(b)).g_ind,
                phi_off - 0.05, phi_off + 0.05, xtol=1e-10,
            )
            worst = max(worst, abs(root - phi_off))
    ok = ok and worst < 0.002
    _report(2, ok,
            f"max|g_ind|={g_ind_max * 1e3:.1f} MHz max|g_cap|={g_cap_max * 1e3:.3f} MHz "
            f"nulling-bias closed form vs numeric worst diff={worst:.2e}")


def test_criterion_03_static_spectroscopy(table2_spec, ds2):
    f = _four_transitions(ds2.model)
    targets = [5.48556, 5.54947, 5.60279, 5.63136]
    diffs = [abs(a - b) for a, b in zip(sorted(f.values()), sorted(targets))]
    ok = max(diffs) < 5e-3

    shift1 = abs(f["11-21"] - f["10-20"])
    shift2 = abs(f["11-12"] - f["01-02"])
    ok = ok and abs(shift1 - 0.06392) < 2e-3 and abs(shift2 - 0.02857) < 2e-3

    coarse = coupled.metrics_sweep(table2_spec, np.arange(0.0, 0.5001, 0.01))
    zz_max = max(abs(m.zz) for m in coarse)
    ok = ok and zz_max < 1e-7

    fine_grid = np.arange(0.270, 0.3001, 0.002)
    fine = coupled.metrics_sweep(table2_spec, fine_grid)
    argmin = fine_grid[int(np.argmin([abs(m.dshift_12_i) for m in fine]))]
    ok = ok and abs(argmin - 0.283) <= 0.003
    _report(3, ok,
            f"transition diffs max={max(diffs) * 1e3:.2f} MHz "
            f"shifts={shift1 * 1e3:.2f}/{shift2 * 1e3:.2f} MHz "
            f"max|zz|={zz_max * 1e6:.4f} kHz argmin={argmin:.3f}")


def test_criterion_04_short_coupler_gates(ds2):
    lengths = [60.0, 70.0, 80.0, 90.0, 100.0]
    f = _four_transitions(ds2.model)

    dd_main = f["10-20"] - f["11-21"]
    errs_main = []
    for t_g in lengths:
        out = _optimize(ds2, ((1, 1, 0), (2, 1, 0)), dd_main, t_g)
        errs_main.append(out.result.error)
        if t_g == 60.0:
            _state["halving_pulse"] = out.result.pulse

    dd_alt = f["01-02"] - f["11-12"]
    errs_alt = [
        _optimize(ds2, ((1, 1, 0), (1, 2, 0)), dd_alt, t_g).result.error
        for t_g in lengths
    ]

    below = min(errs_main) < 1e-4
    mono = all(a > b for a, b in zip(errs_main, errs_main[1:]))
    diffs_alt = np.diff(errs_alt)
    oscillates = bool(np.any(diffs_alt > 0.0) and np.any(diffs_alt < 0.0))
    _report(4, below and mono and oscillates,
            "plasmon-target errors " + "/".join(f"{e:.2e}" for e in errs_main)
            + " monotone=" + str(mono)
            + "; qubit-target errors " + "/".join(f"{e:.2e}" for e in errs_alt)
            + " oscillating=" + str(oscillates))


def test_criterion_05_long_coupler_gates(table3_spec, ds3):
    phi_off, _ = ltc.zero_coupling_bias(table3_spec.ltc)
    ok_bias = abs(phi_off - 0.285) <= 0.002

    sync = gates.synchronized_params(ds3)
    shift_mhz = abs(sync.dshift) * 1e3
    ok_shift = abs(shift_mhz - 11.04) <= 1.0
    ok_tflat = abs(sync.t_flat - 90.6) <= 1.0

    dd = ds3.transition((0, 1, 0), (0, 2, 0)) - ds3.transition((1, 1, 0), (2, 1, 0))
    errs = {}
    for t_r in (8.0, 10.0, 12.0):
        out = _optimize(ds3, ((1, 1, 0), (2, 1, 0)), dd, 100.0, t_r=t_r,
                        synchronized=True, budget=120)
        errs[t_r] = out.result.error
    ok_gate = min(errs.values()) < 1e-5
    _report(5, ok_bias and ok_shift and ok_tflat and ok_gate,
            f"nulling={phi_off:.4f} shift={shift_mhz:.2f} MHz "
            f"t_flat={sync.t_flat:.2f} ns (target 90.6+-1: "
            f"{'ok' if ok_tflat else 'out of window, see decision notes'}) "
            "sync+drag errors "
            + " ".join(f"tr={k:g}:{v:.2e}" for k, v in errs.items()))


def test_criterion_06_collision_structure(table2_spec):
    cfg = cfgmod.load(cfgmod.fixture_path("table8_collisions.cfg"))
    rows = cfgmod.qubit_rows(cfg)
    window = (rows[0][0], rows[-1][0])

    def row_spec(ej1, ej2):
        return dataclasses.replace(
            table2_spec,
            q1=dataclasses.replace(table2_spec.q1, E_J=ej1),
            q2=dataclasses.replace(table2_spec.q2, E_J=ej2),
        )

    # collision condition: two-photon drive point crosses the gate drive
    residuals: list[list[float]] = [[], []]
    for wp1, ej1, ej2 in rows:
        model = CoupledModel(row_spec(ej1, ej2), 0.0)
        f_gate = _four_transitions(model)["11-21"]
        for k, c in enumerate(model.collision_frequencies()):
            residuals[k].append(c - f_gate)
    crossings = []
    for resid in residuals:
        for (w_a, *_), (w_b, *_), r_a, r_b in zip(rows, rows[1:], resid, resid[1:]):
            if r_a * r_b < 0.0:
                crossings.append(w_a - r_a * (w_b - w_a) / (r_b - r_a))
    in_window = len(crossings) == 2 and all(
        window[0] <= c <= window[1] for c in crossings
    )

    # error-vs-length log-slope: flat near the collisions, steep between
    slopes = {}
    for name, (_, ej1, ej2) in (
        ("near-lo", rows[1]), ("mid", rows[3]), ("near-hi", rows[4]),
    ):
        ds = DressedSystem(CoupledModel(row_spec(ej1, ej2), 0.0))
        f = _four_transitions(ds.model)
        dd = f["10-20"] - f["11-21"]
        e60 = _optimize(ds, ((1, 1, 0), (2, 1, 0)), dd, 60.0).result.error
        e100 = _optimize(ds, ((1, 1, 0), (2, 1, 0)), dd, 100.0).result.error
        slopes[name] = (math.log(e100) - math.log(e60)) / 40.0
    flatter = (slopes["mid"] < slopes["near-lo"]
               and slopes["mid"] < slopes["near-hi"])
    _report(6, in_window and flatter,
            "crossings " + "/".join(f"{c:.4f}" for c in crossings)
            + f" in window [{window[0]}, {window[1]}]; log-slopes "
            + " ".join(f"{k}:{v:.4f}" for k, v in slopes.items()))


def test_criterion_07_layout_reduction():
    # printed parameter columns per tag; paired values hold when the two
    # pads carry different attachments (compared as sorted pairs)
    expected = {
        "1LTC+3TC": {"E_C_q": [1.009], "tc": [0.317], "ltc": [0.040],
                     "readout": [0.095], "J_tc": [0.485], "J_ltc": [0.125],
                     "J_readout": [0.083]},
        "2LTC+2TC": {"E_C_q": [1.023], "tc": [0.317], "ltc": [0.040],
                     "readout": [0.095], "J_tc": [0.480, 0.559],
                     "J_ltc": [0.111, 0.129], "J_readout": [0.086]},
        "2LTC+3TC": {"E_C_q": [0.852], "tc": [0.315, 0.316], "ltc": [0.040],
                     "readout": [0.095], "J_tc": [0.452, 0.414],
                     "J_ltc": [0.104, 0.096], "J_readout": [0.070]},
        "2LTC+4TC": {"E_C_q": [0.792], "tc": [0.315, 0.314], "ltc": [0.040],
                     "readout": [0.095], "J_tc": [0.423, 0.382],
                     "J_ltc": [0.098, 0.088], "J_readout": [0.059]},
    }
    failures = []
    for tag, table in expected.items():
        red = layout.reduce(layout.layout_network(tag))
        qi = red.labels.index("q")
        got = {"E_C_q": [red.E_C[qi]], "tc": [], "ltc": [], "readout": [],
               "J_tc": [], "J_ltc": [], "J_readout": []}
        for k, lab in enumerate(red.labels):
            for role in ("tc", "ltc", "readout"):
                if lab.startswith(role):
                    got[role].append(red.E_C[k])
                    got["J_" + role].append(abs(red.J[qi, k]))
        for key, want in table.items():
            have = sorted(set(round(v, 4) for v in got[key]), reverse=True)
            want_s = sorted(want, reverse=True)
            if len(have) < len(want_s):
                have = (have * len(want_s))[: len(want_s)]
            have = have[: len(want_s)]
            for w, h in zip(want_s, have):
                if abs(w - h) >= 1e-3:
                    failures.append(f"{tag}:{key} {h:.4f} vs {w:.3f}")

    red8 = layout.reduce(
        layout.layout_network("1LTC+3TC", layout.LayoutCaps(C_qL=8.0))
    )
    j8 = abs(red8.coupling("q", "ltc1_b"))
    ok8 = abs(j8 * 1e3 - 87.45) <= 0.5
    if not ok8:
        failures.append(f"C_qL=8: J={j8 * 1e3:.2f} MHz vs 87.45")
    _report(7, not failures,
            "all table entries within 1 MHz" if not failures
            else "mismatches (see decision notes): " + "; ".join(failures))


def test_criterion_08_multimode_coupler():
    cfg = cfgmod.load(cfgmod.fixture_path("table7_multimode.cfg"))
    spec = cfgmod.build_multimode(cfg)

    from ltcsim import multimode

    w = multimode.coupler_mode_frequencies(
        dataclasses.replace(spec, J_c=0.0), 0.283
    )
    spread = (np.max(w) - np.min(w)) * 1e3
    ok = spread < 3.0

    m0 = multimode.MultimodeModel(spec, 0.0).metrics()
    shift_mhz = abs(m0.dshift_12_i) * 1e3
    ok = ok and abs(shift_mhz - 11.65) <= 1.0

    m_off = multimode.MultimodeModel(spec, 0.283).metrics()
    ok = ok and abs(m_off.dshift_12_i) * 1e3 < 0.1 and abs(m_off.zz) * 1e6 < 0.1
    _report(8, ok,
            f"degeneracy spread={spread:.2f} MHz shift(0)={shift_mhz:.2f} MHz "
            f"shift(0.283)={abs(m_off.dshift_12_i) * 1e3:.4f} MHz "
            f"zz(0.283)={abs(m_off.zz) * 1e6:.5f} kHz")


def test_criterion_09_closed_form_analytics():
    d = gates.decoherence_error(100.0, 10.0, 20.0)
    ok = d == pytest.approx(0.00175, abs=1e-18)

    second, exact = coupled.effective_coupling_formula(
        0.1, 0.1, 0.049, 4.9, (6.5, 6.6)
    )
    ok = ok and abs(second - exact) / abs(exact) < 1e-3

    fid_id, _ = gates.cz_fidelity(np.eye(4, dtype=complex))
    ok = ok and fid_id == pytest.approx(0.4, abs=1e-12)
    _report(9, ok,
            f"decoherence={d:.5f} coupling-form rel diff="
            f"{abs(second - exact) / abs(exact):.2e} F(identity)={fid_id:.3f}")


def test_criterion_10_numerical_hygiene(table2_spec, table3_spec, ds2, ds3):
    defect = max(_state["defects"]) if _state["defects"] else float("inf")
    ok_unitary = defect < 1e-8

    pulse = _state.get("halving_pulse")
    if pulse is None:
        f = _four_transitions(ds2.model)
        pulse = _optimize(
            ds2, ((1, 1, 0), (2, 1, 0)), f["10-20"] - f["11-21"], 60.0
        ).result.pulse
    coarse = ds2.propagate(pulse).error
    halved = ds2.propagate(pulse, dt=ds2.default_step() / 2.0).error
    rel = abs(coarse - halved) / max(coarse, halved)
    ok_step = rel < 0.10

    worst = 0.0
    for spec in (table2_spec, table3_spec):
        base = _four_transitions(CoupledModel(spec, 0.0))
        dense = _four_transitions(
            CoupledModel(dataclasses.replace(spec, basis_size=120), 0.0)
        )
        worst = max(worst, max(abs(base[k] - dense[k]) for k in base))
    ok_basis = worst < 2e-4
    _report(10, ok_unitary and ok_step and ok_basis,
            f"max unitarity defect={defect:.2e} step-halving rel diff={rel:.3f} "
            f"basis-doubling worst shift={worst * 1e3:.4f} MHz")
