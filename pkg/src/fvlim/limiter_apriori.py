"""Zhang-Shu maximum-principle-preserving scaling of reconstructed node values.

Each cell's reconstruction is squeezed towards its average by a factor
``theta`` so that every node used by the flux lies inside the range of the
neighbouring averages.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .flux import HALF, Reconstructor, crop
from .stencil import gauss_legendre_rule, gauss_lobatto_rule

NODE_SETS = ("centroid", "gauss_lobatto")
DEGENERATE = 1e-14


@dataclass
class ThetaField:
    """Per-cell limiter state over a reconstruction block."""

    theta: np.ndarray
    node_max: np.ndarray
    node_min: np.ndarray
    local_max: np.ndarray
    local_min: np.ndarray


def node_points(dims: int, p: int, node_set: str = "centroid", flux_method: str = "gauss_legendre"):
    """Reference-cell evaluation points whose extrema feed theta."""
    if node_set not in NODE_SETS:
        raise ValueError(f"unknown node set {node_set!r}")
    zero = Fraction(0)
    if dims == 1:
        if node_set == "centroid":
            return [(-HALF,), (zero,), (HALF,)]
        rule, _ = gauss_lobatto_rule(p)
        return [(s,) for s in rule.mp_points]
    if flux_method == "transverse":
        if node_set == "gauss_lobatto":
            raise ValueError("the gauss_lobatto node set requires Gauss-Legendre face fluxes")
        return [(-HALF, zero), (HALF, zero), (zero, -HALF), (zero, HALF), (zero, zero)]
    traces = gauss_legendre_rule(p).mp_points
    if node_set == "centroid":
        pts = [(zero, zero)]
        for t in traces:
            pts += [(-HALF, t), (HALF, t), (t, -HALF), (t, HALF)]
        return pts
    lob, _ = gauss_lobatto_rule(p)
    pts = []
    for t in traces:
        for s in lob.mp_points:
            pts += [(s, t), (t, s)]
    return pts


def neighbourhood_extrema(U: np.ndarray, pad: int, ext: int):
    """Max/min of the cell and its face neighbours, over a block of extension ``ext``."""
    V = crop(U, pad, ext + 1)
    core = (slice(1, -1),) * U.ndim
    hi = V[core].copy()
    lo = V[core].copy()
    for axis in range(U.ndim):
        for lo_sl, in_sl in ((slice(0, -2), slice(1, -1)), (slice(2, None), slice(1, -1))):
            idx = [in_sl] * U.ndim
            idx[axis] = lo_sl
            nb = V[tuple(idx)]
            np.maximum(hi, nb, out=hi)
            np.minimum(lo, nb, out=lo)
    return hi, lo


def theta_from_extrema(mean, node_max, node_min, local_max, local_min):
    up = node_max - mean
    dn = node_min - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        r_up = np.where(np.abs(up) < DEGENERATE, 1.0, np.abs((local_max - mean) / up))
        r_dn = np.where(np.abs(dn) < DEGENERATE, 1.0, np.abs((local_min - mean) / dn))
    return np.minimum(np.minimum(r_up, r_dn), 1.0)


def compute_theta(R: Reconstructor, node_set: str = "centroid",
                  flux_method: str = "gauss_legendre") -> ThetaField:
    mean = R.mean
    pts = node_points(R.dims, R.p, node_set, flux_method)
    node_max = np.full_like(mean, -np.inf)
    node_min = np.full_like(mean, np.inf)
    for pt in pts:
        v = R.point(*pt)
        np.maximum(node_max, v, out=node_max)
        np.minimum(node_min, v, out=node_min)
    local_max, local_min = neighbourhood_extrema(R.U, R.pad, R.ext)
    if R.p == 0:
        theta = np.ones_like(mean)
    else:
        theta = theta_from_extrema(mean, node_max, node_min, local_max, local_min)
    return ThetaField(theta, node_max, node_min, local_max, local_min)


def limit_nodes(nodes, theta, mean):
    """Shift node values about the cell average: v -> theta (v - mean) + mean."""
    theta = np.asarray(theta)

    def one(v):
        return np.where(theta == 1.0, v, theta * (v - mean) + mean)

    if isinstance(nodes, (list, tuple)):
        return type(nodes)(one(v) for v in nodes)
    return one(nodes)
