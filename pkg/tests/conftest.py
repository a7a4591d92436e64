import pytest

from omp2sim.chem import freeze_active_space, parse_fcidump
from omp2sim.oracle import ReferenceValues, fixture_path

# one status line per acceptance criterion, echoed after the test summary
acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def refs():
    return ReferenceValues.load()


def load_point(refs, molecule: str, distance: float):
    """Active-space integrals plus the reference record for one grid point."""
    mol = refs.molecules[molecule]
    pt = mol.point_at(distance)
    mi = parse_fcidump(fixture_path(pt.fcidump))
    spec = mol.active_space
    if spec.frozen_occupied or spec.deleted_virtual:
        mi = freeze_active_space(mi, spec)
    return mi, pt
