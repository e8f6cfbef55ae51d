import numpy as np
import pytest
from hypothesis import settings

from mimo_doa.doa import build_dictionary, default_grid
from mimo_doa.geometry import (BOTTOM_ROW, HORIZONTAL_SPARSE, VERTICAL_MRA, load_layout,
                               select_subarray, synthesize_virtual_array)

settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")

MRA_POSITIONS = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 4.0], [0.0, 6.0]])


@pytest.fixture(scope="session")
def layout():
    return load_layout()


@pytest.fixture(scope="session")
def va(layout):
    return synthesize_virtual_array(layout)


@pytest.fixture(scope="session")
def mra(va):
    return select_subarray(va, VERTICAL_MRA)


@pytest.fixture(scope="session")
def bottom_row(va):
    return select_subarray(va, BOTTOM_ROW)


@pytest.fixture(scope="session")
def sparse_row(va):
    return select_subarray(va, HORIZONTAL_SPARSE)


@pytest.fixture(scope="session")
def mra_dict():
    """Elevation dictionary of the MRA {0,1,4,6} (half-wavelength units)."""
    return build_dictionary(default_grid(), MRA_POSITIONS, 2.0)


@pytest.fixture(scope="session")
def ula86_dict():
    pos = np.column_stack([np.arange(86.0), np.zeros(86)])
    return build_dictionary(default_grid(), pos, 2.0, axis="azimuth")


ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, shown in the run summary."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
