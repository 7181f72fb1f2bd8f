"""Smooth extrema detection.

A cell counts as smooth along an axis when the second-difference indicator
equals one in the cell and both of its neighbours on that axis. Arrays are
full padded blocks; the outer three layers along each axis carry no valid
indicator and are reported as non-smooth.
"""
from __future__ import annotations

import numpy as np

EPS_M = 1e-10


def _along(axis, ndim, sl):
    idx = [slice(None)] * ndim
    idx[axis] = sl
    return tuple(idx)


def _side_alpha(S, SC):
    out = np.ones_like(SC)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        neg = np.minimum(1.0, np.minimum(2 * S, 0.0) / SC)
        pos = np.minimum(1.0, np.maximum(2 * S, 0.0) / SC)
    out = np.where(SC < 0, neg, out)
    out = np.where(SC > 0, pos, out)
    return out


def smoothness_alpha(U: np.ndarray, axis: int = 0) -> np.ndarray:
    """Indicator alpha along ``axis``; zero where the stencil leaves the array."""
    nd = U.ndim
    n = U.shape[axis]
    if n < 5:
        raise ValueError("need at least five cells along the axis")
    # first differences, valid at 1..n-2
    d = U[_along(axis, nd, slice(2, None))] - U[_along(axis, nd, slice(None, -2))]
    # second differences at 2..n-3, expressed in d-indices 1..n-4
    dm = d[_along(axis, nd, slice(None, -2))]
    d0 = d[_along(axis, nd, slice(1, -1))]
    dp = d[_along(axis, nd, slice(2, None))]
    SC = (dp - dm) / 2
    SL = d0 - dm
    SR = dp - d0
    alpha = np.minimum(_side_alpha(SL, SC), _side_alpha(SR, SC))
    out = np.zeros(U.shape)
    out[_along(axis, nd, slice(2, n - 2))] = alpha
    return out


def smooth_window(alpha: np.ndarray, axis: int = 0) -> np.ndarray:
    """True where alpha equals one in the 3-cell window along ``axis``."""
    nd = alpha.ndim
    n = alpha.shape[axis]
    w = np.minimum(
        np.minimum(alpha[_along(axis, nd, slice(None, -2))], alpha[_along(axis, nd, slice(1, -1))]),
        alpha[_along(axis, nd, slice(2, None))],
    )
    out = np.zeros(alpha.shape, dtype=bool)
    out[_along(axis, nd, slice(1, n - 1))] = w == 1.0
    return out


def smooth_cells(U: np.ndarray) -> np.ndarray:
    """Smooth-extremum flag per cell of a padded array; every axis must pass."""
    flag = np.ones(U.shape, dtype=bool)
    for axis in range(U.ndim):
        flag &= smooth_window(smoothness_alpha(U, axis), axis)
    return flag


def sed_override_apriori(theta, smooth, node_max, node_min, m, M, eps_m=EPS_M, bounds_check=True):
    """Lift theta to one in smooth cells whose nodes respect the global bounds."""
    release = smooth.copy()
    if bounds_check:
        release &= ~((node_max > M + eps_m) | (node_min < m - eps_m))
    return np.where(release, 1.0, theta)
