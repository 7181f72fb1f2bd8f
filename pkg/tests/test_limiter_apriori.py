from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fvlim.flux import Reconstructor
from fvlim.limiter_apriori import compute_theta, limit_nodes, node_points
from fvlim.mesh import BoundaryCondition, pad

PERIODIC = BoundaryCondition.periodic()


def theta_1d(values, p, g=4):
    U = pad(np.asarray(values, dtype=float), g, PERIODIC)
    return compute_theta(Reconstructor(U, g, p, 0), "centroid")


def test_linear_data_is_untouched():
    th = theta_1d([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 2)
    assert np.all(th.theta[1:-1] == 1.0)


def test_isolated_spike_hand_oracle():
    th = theta_1d([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 2)
    assert th.node_max[3] == pytest.approx(13 / 12, abs=1e-15)
    assert th.node_min[3] == pytest.approx(5 / 6, abs=1e-15)
    assert th.local_max[3] == 1.0 and th.local_min[3] == 0.0
    assert th.theta[3] == 0.0


def test_constant_field_degenerate_convention():
    for p in range(8):
        assert np.all(theta_1d(np.full(12, 0.3), p).theta == 1.0)


def test_limit_nodes_examples():
    nodes = np.array([4.0])
    mean = np.array([2.0])
    assert limit_nodes(nodes, np.array([1.0]), mean).tolist() == [4.0]
    assert limit_nodes(nodes, np.array([0.0]), mean).tolist() == [2.0]
    assert limit_nodes(nodes, np.array([0.5]), mean).tolist() == [3.0]
    assert [v.tolist() for v in limit_nodes([nodes, nodes], np.array([0.5]), mean)] == [[3.0], [3.0]]


def test_node_sets():
    assert len(node_points(1, 3, "centroid")) == 3
    assert len(node_points(1, 6, "gauss_lobatto")) == 5
    assert len(node_points(2, 4, "centroid", "transverse")) == 5
    assert len(node_points(2, 4, "centroid", "gauss_legendre")) == 1 + 4 * 3
    assert (Fraction(0), Fraction(0)) in node_points(2, 2, "centroid")
    with pytest.raises(ValueError):
        node_points(2, 3, "gauss_lobatto", "transverse")
    with pytest.raises(ValueError):
        node_points(1, 3, "bogus")


values = arrays(np.float64, 12, elements=st.floats(-5, 5))


@given(values, st.integers(1, 7), st.sampled_from(["centroid", "gauss_lobatto"]))
def test_theta_in_unit_interval_and_nodes_bounded(u, p, node_set):
    g = 5
    U = pad(u, g, PERIODIC)
    R = Reconstructor(U, g, p, 0)
    th = compute_theta(R, node_set)
    assert np.all((th.theta >= 0) & (th.theta <= 1))
    mean = R.mean
    tol = 1e-9 * (1 + np.abs(u).max())
    for pt in node_points(1, p, node_set):
        lim = limit_nodes(R.point(*pt), th.theta, mean)
        assert np.all(lim <= th.local_max + tol)
        assert np.all(lim >= th.local_min - tol)


@given(values, st.integers(1, 7))
def test_theta_is_one_when_nodes_inside_local_range(u, p):
    g = 5
    th = compute_theta(Reconstructor(pad(u, g, PERIODIC), g, p, 0))
    inside = (th.node_max <= th.local_max) & (th.node_min >= th.local_min)
    assert np.all(th.theta[inside] == 1.0)


@given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)), st.integers(1, 5),
       st.sampled_from(["gauss_legendre", "transverse"]))
def test_theta_2d_in_unit_interval(u, p, method):
    g = 6
    ext = 1 if method == "gauss_legendre" else 2
    th = compute_theta(Reconstructor(pad(u, g, PERIODIC), g, p, ext), "centroid", method)
    assert np.all((th.theta >= 0) & (th.theta <= 1))


@given(st.floats(-3, 3), st.floats(0, 1), st.floats(0, 1))
def test_limiting_is_a_convex_blend(v, mean, theta):
    out = limit_nodes(np.array([v]), np.array([theta]), np.array([mean]))[0]
    lo, hi = min(v, mean), max(v, mean)
    assert lo - 1e-12 <= out <= hi + 1e-12
