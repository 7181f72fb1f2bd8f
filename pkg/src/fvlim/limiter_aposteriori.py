"""Troubled-cell detection, MUSCL fallback fluxes and convex flux blending."""
from __future__ import annotations

import numpy as np

from .flux import FaceFluxField, FluxFunction, _normal_velocity, crop, face_velocity_1d
from .limiter_apriori import neighbourhood_extrema
from .mesh import BoundaryCondition, Grid, pad_mask

NAD_EPS = 1e-5
EPS_M = 1e-10
EPS_PP = 1e-20
FALLBACK_LIMITERS = ("minmod", "moncen", "pp")


def detect_troubled(candidate: np.ndarray, parent: np.ndarray, pad: int, m: float, M: float,
                    eps: float = NAD_EPS, smooth: np.ndarray | None = None,
                    eps_m: float = EPS_M) -> np.ndarray:
    """Interior mask of cells whose candidate average fails the admissibility test.

    ``parent`` is the padded state the candidate was built from and supplies
    the local bounds. ``smooth`` (interior-shaped) releases flagged cells that
    sit in a smooth window unless they leave the global range.
    """
    local_max, local_min = neighbourhood_extrema(parent, pad, 0)
    slack = eps * (M - m)
    troubled = (candidate < local_min - slack) | (candidate > local_max + slack)
    if smooth is None:
        return troubled
    outside = (candidate > M + eps_m) | (candidate < m - eps_m)
    return np.where(outside, True, np.where(smooth, False, troubled))


# ---------------------------------------------------------------------------
# MUSCL slopes


def _diffs(U, axis):
    """Left, right and central differences along ``axis`` on the inner region."""
    nd = U.ndim
    def sl(a, b):
        idx = [slice(1, -1)] * nd
        idx[axis] = slice(a, b)
        return U[tuple(idx)]
    um, u0, up = sl(None, -2), sl(1, -1), sl(2, None)
    left, right = u0 - um, up - u0
    return left, right, 0.5 * (left + right)


def minmod_slope(left, right):
    return np.where(left * right > 0, np.sign(left) * np.minimum(np.abs(left), np.abs(right)), 0.0)


def moncen_slope(left, right):
    central = 0.5 * (left + right)
    mag = np.minimum(np.minimum(2 * np.abs(left), np.abs(central)), 2 * np.abs(right))
    return np.where(left * right > 0, np.sign(central) * mag, 0.0)


def pp_scale(U: np.ndarray, eps_pp: float = EPS_PP) -> np.ndarray:
    """min(1, V) of the 2D positivity-preserving limiter on the inner region."""
    if U.ndim != 2:
        raise ValueError("the pp limiter is defined in 2D only")
    c = U[1:-1, 1:-1]
    vmin = np.full_like(c, -eps_pp)
    vmax = np.full_like(c, eps_pp)
    n0, n1 = U.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            d = U[1 + di:n0 - 1 + di, 1 + dj:n1 - 1 + dj] - c
            np.minimum(vmin, d, out=vmin)
            np.maximum(vmax, d, out=vmax)
    denom = np.abs(U[2:, 1:-1] - U[:-2, 1:-1]) + np.abs(U[1:-1, 2:] - U[1:-1, :-2])
    with np.errstate(divide="ignore", invalid="ignore"):
        V = 4 * np.minimum(np.abs(vmin), np.abs(vmax)) / denom
    return np.where(denom > 0, np.minimum(1.0, V), 1.0)


def limited_slopes(U: np.ndarray, limiter: str):
    """Per-axis limited slopes (times h) on the inner region of ``U`` (one layer lost)."""
    if limiter not in FALLBACK_LIMITERS:
        raise ValueError(f"unknown fallback limiter {limiter!r}")
    if limiter == "pp":
        scale = pp_scale(U)
        return [scale * _diffs(U, a)[2] for a in range(U.ndim)]
    fn = minmod_slope if limiter == "minmod" else moncen_slope
    out = []
    for a in range(U.ndim):
        left, right, _ = _diffs(U, a)
        out.append(fn(left, right))
    return out


def muscl_interface_values(U: np.ndarray, limiter: str):
    """[(minus, plus)] face values per axis on the inner region of ``U``."""
    mean = U[(slice(1, -1),) * U.ndim]
    return [(mean - 0.5 * s, mean + 0.5 * s) for s in limited_slopes(U, limiter)]


def interface_fluxes(vals, grid: Grid, flux: FluxFunction) -> FaceFluxField:
    """Midpoint Riemann fluxes from per-axis (minus, plus) values on cells -1..n."""
    n = grid.n
    if grid.dims == 1:
        um, up = vals[0]
        return FaceFluxField(flux.riemann(up[:-1], um[1:], face_velocity_1d(flux, grid), 0, grid))
    (xm, xp), (ym, yp) = vals
    inner = slice(1, n + 1)
    vx = _normal_velocity(flux, grid, 0, grid.centers(1))
    fx = flux.riemann(xp[:-1, inner], xm[1:, inner], vx, 0, grid)
    vy = _normal_velocity(flux, grid, 1, grid.centers(0))
    fy = flux.riemann(yp[inner, :-1], ym[inner, 1:], vy, 1, grid)
    return FaceFluxField(fx, fy)


def fallback_fluxes(U: np.ndarray, pad: int, grid: Grid, flux: FluxFunction, limiter: str) -> FaceFluxField:
    """Second-order MUSCL face fluxes for every face of the interior."""
    if pad < 2:
        raise ValueError("fallback fluxes need two ghost layers")
    return interface_fluxes(muscl_interface_values(crop(U, pad, 2), limiter), grid, flux)


# ---------------------------------------------------------------------------
# blending


_WEIGHTS_1D = {1: 0.75, 2: 0.25}
_WEIGHTS_2D = {(1, 0): 0.75, (1, 1): 0.5, (2, 0): 0.25}


def _offsets_2d():
    for (a, b), w in _WEIGHTS_2D.items():
        seen = set()
        for sa in (1, -1):
            for sb in (1, -1):
                for di, dj in ((sa * a, sb * b), (sb * b, sa * a)):
                    if (di, dj) not in seen:
                        seen.add((di, dj))
                        yield di, dj, w


def _shift(A, offsets):
    """A shifted so that out[x] = A[x - offset]; vacated entries are zero."""
    out = np.zeros_like(A)
    src, dst = [], []
    for o, n in zip(offsets, A.shape):
        if o >= 0:
            src.append(slice(0, n - o))
            dst.append(slice(o, n))
        else:
            src.append(slice(-o, n))
            dst.append(slice(0, n + o))
    out[tuple(dst)] = A[tuple(src)]
    return out


def blend_coefficients(mask: np.ndarray, blending: bool = True,
                       bc: BoundaryCondition | None = None, ghost: int = 1) -> np.ndarray:
    """Per-cell weights phi, returned with ``ghost`` extra layers for face lookups."""
    bc = bc or BoundaryCondition.periodic()
    width = ghost + 2
    T = pad_mask(mask.astype(float), width, bc)
    if not blending:
        phi = T
    elif mask.ndim == 1:
        phi = T.copy()
        for d, w in _WEIGHTS_1D.items():
            phi = np.maximum(phi, w * np.maximum(_shift(T, (d,)), _shift(T, (-d,))))
    else:
        phi = T.copy()
        for di, dj, w in _offsets_2d():
            phi = np.maximum(phi, w * _shift(T, (di, dj)))
    return crop(phi, width, ghost)


def face_weights(phi: np.ndarray, dims: int):
    """max of the two abutting cell weights per face; ``phi`` carries one ghost layer."""
    if dims == 1:
        return [np.maximum(phi[:-1], phi[1:])]
    return [
        np.maximum(phi[:-1, 1:-1], phi[1:, 1:-1]),
        np.maximum(phi[1:-1, :-1], phi[1:-1, 1:]),
    ]


def revise_face_fluxes(high: FaceFluxField, fallback: FaceFluxField, phi: np.ndarray) -> FaceFluxField:
    dims = 1 if high.fy is None else 2
    out = [
        w * (lo - hi) + hi
        for w, hi, lo in zip(face_weights(phi, dims), high, fallback)
    ]
    return FaceFluxField(*out)
