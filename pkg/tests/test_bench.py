import math

import numpy as np
import pytest

from fvlim.bench import (
    PROBLEMS,
    ExperimentPlan,
    cfl_schedule,
    composite_profile,
    convergence_integrator,
    get_problem,
    initialize,
    integrators_for,
    run_convergence_table,
    run_timing,
    run_violation_table,
    slotted_disk,
)
from fvlim.mesh import Grid, mass


def test_square_indicator_on_coarse_grid():
    u = initialize("square_2d", 4).interior
    assert u[1, 1] == 1.0 and u[2, 2] == 1.0
    assert u[0, 0] == 0.0 and u[3, 1] == 0.0


def test_square_half_covered_cell():
    # N=6 puts a cell centre exactly on the x=1/4 edge of the square
    u = initialize("square_2d", 6).interior
    assert u[1, 3] == pytest.approx(0.5, abs=1e-15)


def test_sine_has_zero_mass_and_unit_amplitude():
    f = initialize("sine_2d", 32)
    assert abs(mass(f.interior, 1 / 32)) < 1e-15
    assert 0.95 < f.interior.max() <= 1.0


def test_composite_profile_bounds_and_averages():
    x = np.linspace(0, 1, 2001)
    v = composite_profile(x)
    assert v.min() >= 0.0 and v.max() <= 1.0
    u = initialize("composite_1d", 256).interior
    assert u.min() >= 0.0 and u.max() <= 1.0


def test_slotted_cylinder_geometry():
    assert slotted_disk(np.array(0.2), np.array(0.5)) == 1.0
    assert slotted_disk(np.array(0.0), np.array(0.5)) == 0.0  # inside the slot
    assert slotted_disk(np.array(0.0), np.array(0.75)) == 1.0  # above the slot
    assert slotted_disk(np.array(0.9), np.array(0.9)) == 0.0
    u = initialize("slotted_cylinder", 32).interior
    assert 0.0 <= u.min() and u.max() <= 1.0


def test_problem_lookup():
    assert set(PROBLEMS) == {"composite_1d", "sine_2d", "square_2d", "slotted_cylinder"}
    with pytest.raises(ValueError):
        get_problem("nope")
    with pytest.raises(ValueError):
        initialize("square_2d", Grid(1, 8))


def test_cfl_schedule():
    assert cfl_schedule(6, 32, "RK6") == pytest.approx(0.8 * (1 / 32) ** (1 / 6))
    assert cfl_schedule(6, 32, "RK6") == pytest.approx(0.45, abs=0.01)
    assert cfl_schedule(6, 64, "RK6") == pytest.approx(0.40, abs=0.01)
    assert cfl_schedule(3, 64, "RK4") == 0.8
    assert cfl_schedule(2, 64, "SSPRK2") == pytest.approx(0.8 / 8)


def test_integrator_pairings():
    assert integrators_for(0) == ["Euler"]
    assert integrators_for(1) == ["SSPRK2"]
    assert integrators_for(2) == ["SSPRK3"]
    assert integrators_for(5) == ["SSPRK3", "RK4"]
    assert [convergence_integrator(p) for p in range(6)] == ["Euler", "SSPRK2", "SSPRK3", "RK4", "RK6", "RK6"]


def test_plan_normalises_sequences():
    plan = ExperimentPlan("composite_1d", ["aPrioriMPP"], [1, 2], None, [16], 1)
    assert plan.schemes == ("aPrioriMPP",) and plan.ps == (1, 2) and plan.t_end == 1.0
    assert list(plan.tuples()) == [("aPrioriMPP", 1, "SSPRK2", 16), ("aPrioriMPP", 2, "SSPRK3", 16)]


def test_first_order_convergence_rate():
    plan = ExperimentPlan("sine_2d", ps=(0,), Ns=(32, 64))
    recs = run_convergence_table(plan)
    assert recs[0].E1 == pytest.approx(1.97e-1, rel=0.02)
    assert recs[1].EOC == pytest.approx(0.873, abs=0.05)


def test_violation_rows():
    rows = run_violation_table(ExperimentPlan("composite_1d", ("aPrioriMPP", "aPosteriori"), (2,), Ns=(64,)))
    assert [r["scheme"] for r in rows] == ["aPrioriMPP", "aPosteriori"]
    assert rows[0]["approximately_mpp"] and rows[0]["delta"] > -1e-10
    assert rows[1]["delta"] < 0


def test_timing_rows():
    rows = run_timing(ExperimentPlan("square_2d", ("aPrioriMPP",), (2,), Ns=(16,)), steps=10)
    assert rows[0]["cells_per_stage_per_second"] > 0
    assert rows[0]["integrator"] == "SSPRK3" and math.isfinite(rows[0]["cells_per_stage_per_second"])
