"""Shared fixtures: parsed built-in configs and diagonalized systems.

The heavy dressed-system builds are session scoped so the module tests
and the acceptance suite share one diagonalization per device.
"""

import pytest

from ltcsim import config as cfgmod
from ltcsim.coupled import CoupledModel
from ltcsim.gates import DressedSystem

# one line per acceptance criterion, echoed after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def table2_cfg():
    return cfgmod.load(cfgmod.fixture_path("table2_fltcf.cfg"))


@pytest.fixture(scope="session")
def table3_cfg():
    return cfgmod.load(cfgmod.fixture_path("table3_extended.cfg"))


@pytest.fixture(scope="session")
def table2_spec(table2_cfg):
    return cfgmod.build_system(table2_cfg)


@pytest.fixture(scope="session")
def table3_spec(table3_cfg):
    return cfgmod.build_system(table3_cfg)


@pytest.fixture(scope="session")
def ds2(table2_spec):
    return DressedSystem(CoupledModel(table2_spec, 0.0))


@pytest.fixture(scope="session")
def ds3(table3_spec):
    return DressedSystem(CoupledModel(table3_spec, 0.0))
