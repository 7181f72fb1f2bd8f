import math
import warnings

import numpy as np
import pytest

from fvlim import (
    BoundaryCondition,
    FluxFunction,
    Grid,
    SchemeConfig,
    advance,
    assemble,
    get_problem,
    initialize,
)
from fvlim.solver import muscl_hancock_step, required_ghosts

PERIODIC = BoundaryCondition.periodic()


def sine_1d(n):
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    k = 2 * math.pi
    return np.sin(k * x) * math.sin(k * h / 2) / (k * h / 2)


@pytest.mark.parametrize(
    "name,dims,p,expected",
    [
        ("aPrioriMPP", 1, 3, dict(integrator="SSPRK3", adaptive_dt=True, fallback_limiter=None, blending=False)),
        ("aPrioriT", 2, 3, dict(flux_reconstruction="transverse", adaptive_dt=False)),
        ("aPosteriori", 1, 3, dict(fallback_limiter="moncen", blending=False, adaptive_dt=False)),
        ("aPosterioriB", 1, 3, dict(fallback_limiter="moncen", blending=True)),
        ("aPosteriori", 2, 3, dict(fallback_limiter="pp", flux_reconstruction="transverse")),
        ("aPosterioriB", 2, 5, dict(fallback_limiter="pp", blending=True, flux_reconstruction="transverse")),
        ("MUSCL-Hancock", 2, 1, dict(integrator="Hancock", fallback_limiter="pp")),
        ("unlimited", 1, 0, dict(integrator="Euler", fallback_limiter=None)),
        ("unlimited", 1, 1, dict(integrator="SSPRK2")),
    ],
)
def test_named_defaults(name, dims, p, expected):
    cfg = SchemeConfig(name, p, dims)
    for key, val in expected.items():
        assert getattr(cfg, key) == val, key
    assert cfg.sed and cfg.C == 0.8


def test_explicit_integrator_overrides_default():
    assert SchemeConfig("aPosterioriB", 3, 1, integrator="RK4").integrator == "RK4"


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(name="bogus", p=1),
        dict(name="aPrioriMPP", p=8),
        dict(name="aPrioriMPP", p=1, dims=3),
        dict(name="aPrioriMPP", p=1, integrator="RK5"),
        dict(name="aPosteriori", p=2, dims=1, fallback_limiter="pp"),
        dict(name="aPrioriMPP", p=2, dims=2, theta_node_set="gauss_lobatto", flux_reconstruction="transverse"),
        dict(name="aPosteriori", p=2, adaptive_dt=True),
        dict(name="aPrioriMPP", p=2, C=-0.1),
        dict(name="aPrioriMPP", p=2, integrator="Hancock"),
        dict(name="MUSCL-Hancock", p=1, integrator="SSPRK3"),
        dict(name="aPrioriMPP", p=2, flux_reconstruction="simpson"),
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        SchemeConfig(**kwargs)


def test_ssprk2_with_high_degree_warns():
    with pytest.warns(RuntimeWarning):
        assemble(SchemeConfig("aPrioriMPP", 3, 1, integrator="SSPRK2"), Grid(1, 16), PERIODIC, FluxFunction(1.0))


def test_ghost_width_covers_reconstruction():
    assert required_ghosts(SchemeConfig("aPrioriMPP", 7, 1)) >= 4
    assert required_ghosts(SchemeConfig("aPrioriT", 7, 2)) > required_ghosts(SchemeConfig("aPrioriMPP", 7, 2))


def test_p0_apriori_reduces_to_upwind():
    n = 16
    rng = np.random.default_rng(3)
    u0 = rng.random(n)
    s = assemble(SchemeConfig("aPrioriMPP", 0, 1, adaptive_dt=False), Grid(1, n), PERIODIC, FluxFunction(1.0))
    dt = s.nominal_dt()
    lam = dt * n
    expected = u0 - lam * (u0 - np.roll(u0, 1))
    assert np.allclose(s.step(u0, dt), expected, rtol=0, atol=1e-15)


def test_unlimited_matches_sed_released_apriori_bitwise():
    n = 64
    u0 = sine_1d(n)
    grid = Grid(1, n)
    kw = dict(adaptive_dt=False, sed_bounds_check=False)
    a = assemble(SchemeConfig("aPrioriMPP", 2, 1, integrator="SSPRK3", **kw), grid, PERIODIC, FluxFunction(1.0),
                 bounds=(-1.0, 1.0))
    b = assemble(SchemeConfig("unlimited", 2, 1, integrator="SSPRK3"), grid, PERIODIC, FluxFunction(1.0),
                 bounds=(-1.0, 1.0))
    dt = a.nominal_dt()
    assert np.array_equal(a.step(u0, dt), b.step(u0, dt))


def test_zero_velocity_leaves_state_unchanged():
    u0 = sine_1d(32)
    s = assemble(SchemeConfig("aPosterioriB", 3, 1), Grid(1, 32), PERIODIC, FluxFunction(0.0))
    final, report, _ = advance(s, u0, 2.5)
    assert np.array_equal(final.interior, u0)
    assert report.steps == 1


def test_full_period_error_against_initial_state_shrinks():
    errs = []
    for n in (32, 64):
        u0 = sine_1d(n)
        s = assemble(SchemeConfig("aPrioriMPP", 3, 1), Grid(1, n), PERIODIC, FluxFunction(1.0))
        final, report, _ = advance(s, u0, 1.0, reference=u0)
        assert final.time == 1.0
        errs.append(report.e1)
    assert errs[0] / errs[1] > 4.0


def test_snapshots_at_requested_times():
    u0 = sine_1d(32)
    s = assemble(SchemeConfig("aPrioriMPP", 2, 1), Grid(1, 32), PERIODIC, FluxFunction(1.0))
    final, report, snaps = advance(s, u0, 0.5, snapshot_times=[0.0, 0.25])
    assert [sn.time for sn in snaps] == [0.0, 0.25]
    assert np.array_equal(snaps[0].field.interior, u0)
    assert snaps[1].step < report.steps
    assert final.time == 0.5


def test_advance_rejects_nonpositive_end_time():
    s = assemble(SchemeConfig("aPrioriMPP", 1, 1), Grid(1, 8), PERIODIC, FluxFunction(1.0))
    with pytest.raises(ValueError):
        advance(s, np.zeros(8), 0.0)


def test_composite_apriori_p3_is_mpp():
    pr = get_problem("composite_1d")
    ic = initialize(pr, 256)
    s = assemble(SchemeConfig("aPrioriMPP", 3, 1, integrator="SSPRK3"), pr.grid(256), pr.bc, pr.flux())
    _, report, _ = advance(s, ic, 1.0)
    assert report.delta > -1e-10


def test_composite_aposteriori_p2_violation_magnitude():
    pr = get_problem("composite_1d")
    ic = initialize(pr, 256)
    s = assemble(SchemeConfig("aPosteriori", 2, 1, integrator="SSPRK3"), pr.grid(256), pr.bc, pr.flux())
    _, report, _ = advance(s, ic, 1.0)
    assert -1e-1 < report.delta < -1e-4


def test_muscl_hancock_constant_field_unchanged():
    n = 8
    grid = Grid(2, n)
    U = np.full((n + 4, n + 4), 0.3)
    out = muscl_hancock_step(U, 2, grid, FluxFunction((2.0, 1.0)), 0.01, "pp")
    assert np.allclose(out, 0.3, rtol=0, atol=1e-16)


def test_muscl_hancock_second_order():
    errs = []
    ns = (128, 256, 512)
    for n in ns:
        u0 = sine_1d(n)
        s = assemble(SchemeConfig("MUSCL-Hancock", 1, 1), Grid(1, n), PERIODIC, FluxFunction(1.0))
        errs.append(advance(s, u0, 1.0, reference=u0)[1].e1)
    slope = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_muscl_hancock_strictly_mpp_on_square():
    pr = get_problem("square_2d")
    ic = initialize(pr, 32)
    s = assemble(SchemeConfig("MUSCL-Hancock", 1, 2), pr.grid(32), pr.bc, pr.flux())
    _, report, _ = advance(s, ic, 100.0)
    assert report.delta > -1e-13


def test_mass_conserved_by_every_scheme_in_2d():
    pr = get_problem("square_2d")
    ic = initialize(pr, 16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name in ("aPrioriMPP", "aPrioriT", "aPosteriori", "aPosterioriB", "MUSCL-Hancock", "unlimited"):
            s = assemble(SchemeConfig(name, 1 if name == "MUSCL-Hancock" else 3, 2), pr.grid(16), pr.bc, pr.flux())
            _, r, _ = advance(s, ic, 0.1)
            assert abs(r.mass_final - r.mass_initial) <= 1e-13 * abs(r.mass_initial), name
