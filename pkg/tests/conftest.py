import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fvlim.mesh import BoundaryCondition, CellField, Grid, pad

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f" | {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def field_1d(values, ghost=3, bc=None, bounds=((0.0, 1.0),)):
    values = np.asarray(values, dtype=float)
    bc = bc or BoundaryCondition.periodic()
    grid = Grid(1, len(values), bounds, ghost)
    return CellField(grid, pad(values, ghost, bc), 0.0, bc)


def field_2d(values, ghost=4, bc=None):
    values = np.asarray(values, dtype=float)
    bc = bc or BoundaryCondition.periodic()
    grid = Grid(2, values.shape[0], ((0.0, 1.0), (0.0, 1.0)), ghost)
    return CellField(grid, pad(values, ghost, bc), 0.0, bc)
