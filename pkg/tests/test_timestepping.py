import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fvlim.timestepping import (
    TABLEAUS,
    adaptive_mpp_step,
    get_tableau,
    max_amplification,
    modified_wavenumber,
    rk_step,
    stability_function,
)


@pytest.mark.parametrize("name", sorted(TABLEAUS))
def test_tableaus_are_explicit_and_consistent(name):
    t = get_tableau(name)
    assert t.check()
    assert np.allclose(np.triu(t.A), 0.0)
    assert sum(t.b) == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(t.c, t.A.sum(axis=1), atol=1e-15)


@pytest.mark.parametrize("name,order", [("Euler", 1), ("SSPRK2", 2), ("SSPRK3", 3), ("RK4", 4), ("RK6", 6)])
def test_order_conditions_via_stability_polynomial(name, order):
    # R(z) must agree with exp(z) through z^order
    t = get_tableau(name)
    z = np.array([0.05, 0.1])
    err = np.abs(stability_function(t, z) - np.exp(z))
    observed = np.log2(err[1] / err[0])
    assert observed == pytest.approx(order + 1, abs=0.15)


def test_rk6_order_conditions_on_nonlinear_problem():
    # y' = y^2, y(0)=1 -> y = 1/(1-t); check 6th-order convergence at t=0.5
    t = get_tableau("RK6")
    errs = []
    for n in (10, 20):
        y = np.array([1.0])
        dt = 0.5 / n
        for _ in range(n):
            y = rk_step(y, dt, t, lambda v: v * v)
        errs.append(abs(y[0] - 2.0))
    assert np.log2(errs[0] / errs[1]) > 5.7


def test_unknown_integrator():
    with pytest.raises(ValueError):
        get_tableau("RK5")


def test_euler_step_is_forward_difference():
    u = np.array([1.0, 2.0])
    out = rk_step(u, 0.1, get_tableau("Euler"), lambda v: -v)
    assert out.tolist() == (u + 0.1 * -u).tolist()


@given(lam=st.floats(-3, 0.5), dt=st.floats(0.01, 1.0))
def test_ssprk2_on_linear_ode(lam, dt):
    z = lam * dt
    out = rk_step(np.array([1.0]), dt, get_tableau("SSPRK2"), lambda v: lam * v)
    assert out[0] == pytest.approx(1 + z + z * z / 2, rel=1e-12, abs=1e-14)


def test_upwind_euler_hand_oracle():
    # a=1, h=1/4, dt=C h with C=1/2
    u = np.array([1.0, 0.0, 0.0, 0.0])
    h, dt = 0.25, 0.125

    def upwind(v):
        return -(v - np.roll(v, 1)) / h

    assert rk_step(u, dt, get_tableau("Euler"), upwind).tolist() == [0.5, 0.5, 0.0, 0.0]


def test_stability_function_examples():
    assert stability_function(get_tableau("Euler"), -2.0) == pytest.approx(-1.0)
    assert stability_function(get_tableau("RK4"), -2.0) == pytest.approx(1 / 3, abs=1e-15)
    for t in TABLEAUS.values():
        assert stability_function(t, 0.0) == 1.0


def test_modified_wavenumber_examples():
    assert modified_wavenumber(0, np.pi, 1.0) == pytest.approx(-2.0)
    for p in range(8):
        assert modified_wavenumber(p, 0.0, 1.0) == 0


def test_modified_wavenumber_matches_assembled_matrix_eigenvalues():
    # circulant operator from the stencils; its eigenvalues are the symbol samples
    n, p = 32, 3
    from fvlim.stencil import node_stencil_pair

    _, right = node_stencil_pair(p)
    L = np.zeros((n, n))
    for i in range(n):
        for c, o in zip(right.weights, right.offsets):
            L[i, (i + o) % n] -= c
            L[i, (i - 1 + o) % n] += c
    eig = np.linalg.eigvals(L)
    k = 2 * np.pi * np.arange(n) / n
    track = modified_wavenumber(p, k, 1.0)
    for z in track:
        assert np.min(np.abs(eig - z)) < 1e-10


def test_ssprk2_exceeds_one_for_second_degree():
    assert max_amplification(get_tableau("SSPRK2"), 2, 1.0) > 1.0


def test_stable_pairs_sample():
    for name in ("SSPRK3", "RK4"):
        for p in range(8):
            assert max_amplification(get_tableau(name), p, 1.0) <= 1 + 1e-12


def _bounded_step(u, dt):
    # overshoots unless dt <= 0.25
    return u + (dt > 0.25) * 0.5


def test_adaptive_step_halves_until_bounds_hold():
    out, dt, retries = adaptive_mpp_step(np.array([0.2, 0.8]), _bounded_step, 1.0, 0.1, 0.0, 1.0)
    assert dt == 0.25 and retries == 2
    assert out.tolist() == [0.2, 0.8]


def test_adaptive_step_no_retry_when_already_at_floor():
    out, dt, retries = adaptive_mpp_step(np.array([0.9]), _bounded_step, 0.5, 0.5, 0.0, 1.0)
    assert retries == 0 and dt == 0.5


def test_adaptive_step_no_retry_for_smooth_data():
    u = np.array([0.3, 0.5, 0.7])
    out, dt, retries = adaptive_mpp_step(u, lambda v, d: v, 0.8, 0.1, 0.0, 1.0)
    assert retries == 0 and dt == 0.8


def test_negative_dt_rejected():
    with pytest.raises(ValueError):
        rk_step(np.zeros(2), -1.0, get_tableau("Euler"), lambda v: v)
