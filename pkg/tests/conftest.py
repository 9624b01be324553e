import pytest

from bethetrap.units import (ATOM_MASSES, REFERENCE_OMEGA_PERP, PhysicalTrapConfig,
                             nk_to_joules, reference_scattering_length)


def sodium_config(depth_nk=25.0, length=5e-6):
    return PhysicalTrapConfig(
        atom_mass=ATOM_MASSES["Na23"],
        scattering_length=reference_scattering_length("Na23"),
        omega_perp=REFERENCE_OMEGA_PERP,
        trap_length=length,
        trap_depth=nk_to_joules(depth_nk),
    )


@pytest.fixture
def sodium():
    return sodium_config()


# One line per acceptance criterion, collected by test_acceptance.py.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
