"""Strict config parsing, fixture catalog, and CLI scenario round trips."""

import json

import pytest

from ltcsim import cli
from ltcsim import config as cfgmod
from ltcsim.errors import ConfigError

GOOD = """\
[meta]
name = demo
scenario = modes

[cpw]
d_cm = 0.50
L_l_nH_per_cm = 4.37
C_l_fF_per_cm = 1586.42
L_S_nH = 0.5
"""


def test_parse_and_lookup():
    cfg = cfgmod.parse_text(GOOD, origin="demo.cfg")
    assert cfg.has("cpw")
    assert cfg.require("cpw", "L_S_nH") == 0.5
    assert cfg.get("cpw", "missing", 7) == 7
    with pytest.raises(ConfigError):
        cfg.require("cpw", "missing")
    assert len(cfg.content_hash()) == 64


def test_unknown_section_rejected_with_line():
    with pytest.raises(ConfigError, match=r"demo\.cfg:1"):
        cfgmod.parse_text("[warp]\nspeed = 9\n", origin="demo.cfg")


def test_unknown_key_rejected_with_line():
    bad = GOOD + "\n[qubit1]\nE_C_GHz = 1.0\nbogus_key = 2\n"
    with pytest.raises(ConfigError, match=r"bogus_key"):
        cfgmod.parse_text(bad, origin="demo.cfg")


def test_duplicate_key_rejected():
    bad = GOOD + "L_S_nH = 0.7\n"
    with pytest.raises(ConfigError, match="duplicate"):
        cfgmod.parse_text(bad, origin="demo.cfg")


def test_type_mismatch_rejected():
    bad = GOOD.replace("L_S_nH = 0.5", "L_S_nH = soft")
    with pytest.raises(ConfigError):
        cfgmod.parse_text(bad, origin="demo.cfg")


def test_render_parse_roundtrip():
    cfg = cfgmod.parse_text(GOOD, origin="demo.cfg")
    text = cfgmod.render(cfg.sections)
    again = cfgmod.parse_text(text, origin="rendered")
    assert again.sections == cfg.sections


def test_fixture_catalog_complete():
    fixtures = cfgmod.list_fixtures()
    assert len(fixtures) == 7
    for item in fixtures:
        cfg = cfgmod.load(cfgmod.fixture_path(item["file"]))
        assert cfg.require("meta", "name")
    with pytest.raises(ConfigError):
        cfgmod.fixture_path("nope.cfg")


def test_scan_fixture_rows():
    cfg = cfgmod.load(cfgmod.fixture_path("table8_collisions.cfg"))
    rows = cfgmod.qubit_rows(cfg)
    assert len(rows) == 7
    assert rows[0] == (5.367, 6.55, 6.60)
    assert all(len(r) == 3 for r in rows)


def test_builders_from_fixture(table2_cfg):
    spec = cfgmod.build_system(table2_cfg)
    assert spec.q1.E_J == 6.55
    assert spec.ltc.C_J == 2.5
    mode = cfgmod.build_resonator_mode(table2_cfg)
    # tabulated energies override geometry, profile factor stays geometric
    assert mode.E_C == 0.0403
    assert mode.eta == pytest.approx(0.28207, abs=1e-5)


def test_build_pulse_overrides(table3_cfg):
    p = cfgmod.build_pulse(table3_cfg, amplitude=0.016, freq=4.0785,
                           drag_delta=0.087)
    assert p.shape == "flattop_cosine"
    assert p.t_g == 100.0 and p.t_r == 10.0
    assert p.drag == (1.0, 0.087)


def test_cli_modes_scenario(tmp_path):
    rc = cli.run([
        str(cfgmod.fixture_path("table1_cpw.cfg")), "--scenario", "modes",
        "--out", str(tmp_path),
    ])
    assert rc == cli.EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["summary"]["freq_GHz"] == pytest.approx(4.9119, abs=2e-4)
    assert (tmp_path / "modes.csv").exists()


def test_cli_manifest_roundtrip(tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    assert cli.run([
        str(cfgmod.fixture_path("table1_cpw.cfg")), "--scenario", "modes",
        "--out", str(first),
    ]) == cli.EXIT_OK
    assert cli.run([
        str(first / "manifest.json"), "--scenario", "modes", "--out", str(second),
    ]) == cli.EXIT_OK
    assert (first / "modes.csv").read_text() == (second / "modes.csv").read_text()


def test_cli_layout_scenario(tmp_path):
    rc = cli.run([
        str(cfgmod.fixture_path("table4_layout.cfg")), "--scenario", "layout",
        "--out", str(tmp_path),
    ])
    assert rc == cli.EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["summary"]["E_C_q_GHz"] == pytest.approx(1.009, abs=1e-3)


def test_cli_rejects_bad_config(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(GOOD + "\n[qubit1]\nbogus_key = 1\n")
    rc = cli.run([str(bad), "--scenario", "modes", "--out", str(tmp_path)])
    assert rc == cli.EXIT_CONFIG


def test_cli_rejects_missing_file(tmp_path):
    rc = cli.run([str(tmp_path / "absent.cfg"), "--scenario", "modes"])
    assert rc == cli.EXIT_CONFIG


def test_cli_check_violation_exits_four(tmp_path):
    cfg = tmp_path / "checked.cfg"
    cfg.write_text(GOOD + "\n[check]\nfreq_GHz = 9.9 0.001\n")
    rc = cli.run([str(cfg), "--scenario", "modes", "--out", str(tmp_path),
                  "--check"])
    assert rc == cli.EXIT_CHECK


def test_cli_list_fixtures(capsys):
    assert cli.run(["--list-fixtures"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "table2_fltcf.cfg" in out
