"""Numerical flux, face reconstruction and the semi-discrete operator L_p.

Arrays are indexed ``u[i]`` in 1D and ``u[i, j]`` in 2D with ``i`` along x
(axis 0) and ``j`` along y (axis 1). Padded arrays carry ``pad`` ghost layers
on every axis; a "block" of extension ``ext`` covers cells ``-ext..n-1+ext``.

Face fluxes are stored as face *averages* (integral divided by h), so both
dimensions share the single 1/h factor of the residual.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .mesh import CellField, Grid
from .stencil import (
    Stencil,
    conservative_node_stencil,
    gauss_legendre_rule,
    node_stencil_pair,
    transverse_integral_stencil,
)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# velocity / flux function


@dataclass(frozen=True)
class FluxFunction:
    """Linear advection f(u) = v u with constant or space-dependent velocity.

    ``velocity`` is a float (1D), a pair (2D), or a callable ``v(x, y) ->
    (vx, vy)`` evaluated at face nodes. ``alpha`` selects the dissipation of
    the Lax-Friedrichs flux: "local" uses |v| at the node (exact upwinding),
    "global" uses the maximum speed per axis.
    """

    velocity: object = 1.0
    alpha: str = "local"
    alpha_max: Optional[tuple] = None

    @property
    def varying(self) -> bool:
        return callable(self.velocity)

    def component(self, axis: int, x=0.0, y=None):
        v = self.velocity
        if callable(v):
            vals = v(x, y) if y is not None else v(x)
            return vals[axis] if isinstance(vals, tuple) else vals
        if np.ndim(v) == 0:
            return float(v)
        return float(v[axis])

    def max_speed(self, axis: int, grid: Grid | None = None) -> float:
        if self.alpha_max is not None:
            return float(self.alpha_max[axis])
        if not self.varying:
            return abs(self.component(axis, 0.0, 0.0))
        xs = grid.faces(0)
        if grid.dims == 1:
            return float(np.max(np.abs(self.component(axis, xs))))
        X, Y = np.meshgrid(xs, grid.faces(1), indexing="ij")
        return float(np.max(np.abs(self.component(axis, X, Y))))

    def speed_sum(self, grid: Grid) -> float:
        """max over faces of |vx| + |vy| (|a| in 1D), the time-step denominator."""
        if grid.dims == 1:
            return self.max_speed(0, grid)
        if not self.varying:
            return sum(abs(self.component(a, 0.0, 0.0)) for a in (0, 1))
        X, Y = np.meshgrid(grid.faces(0), grid.faces(1), indexing="ij")
        vx, vy = self.velocity(X, Y)
        return float(np.max(np.abs(vx) + np.abs(vy)))

    def riemann(self, uL, uR, v, axis: int = 0, grid: Grid | None = None):
        """Point flux for face-normal velocity ``v``."""
        if self.alpha == "global":
            a = self.max_speed(axis, grid)
            return 0.5 * (v * (uL + uR) - a * (uR - uL))
        # 0.5 [v(uL+uR) - |v|(uR-uL)] written as an exact upwind selection
        return np.maximum(v, 0.0) * uL + np.minimum(v, 0.0) * uR


def numerical_flux(uL, uR, flux: FluxFunction, axis: int = 0, v=None):
    """Monotone Lax-Friedrichs flux of a single face node.

    ``v`` is the face-normal velocity; defaults to the constant velocity.
    """
    if v is None:
        v = flux.component(axis, 0.0, 0.0)
    if flux.alpha == "global":
        a = flux.alpha_max[axis] if flux.alpha_max is not None else abs(v)
        return 0.5 * (v * uL + v * uR - a * (uR - uL))
    return flux.riemann(uL, uR, v, axis)


# ---------------------------------------------------------------------------
# shifted-slice stencil machinery


def shifted(U: np.ndarray, axis: int, pad: int, ext: int, offset: int) -> np.ndarray:
    n = U.shape[axis] - 2 * pad
    start = pad - ext + offset
    if start < 0 or start + n + 2 * ext > U.shape[axis]:
        raise ValueError(
            f"insufficient ghost cells: pad={pad}, ext={ext}, offset={offset}"
        )
    idx = [slice(None)] * U.ndim
    idx[axis] = slice(start, start + n + 2 * ext)
    return U[tuple(idx)]


def crop(U: np.ndarray, pad: int, ext: int, axes=None) -> np.ndarray:
    axes = range(U.ndim) if axes is None else axes
    idx = [slice(None)] * U.ndim
    for a in axes:
        n = U.shape[a] - 2 * pad
        idx[a] = slice(pad - ext, pad + n + ext)
    return U[tuple(idx)]


def apply_stencil(U: np.ndarray, st: Stencil, axis: int, pad: int, ext: int) -> np.ndarray:
    out = None
    for c, k in zip(st.weights, st.offsets):
        src = shifted(U, axis, pad, ext, k)
        if out is None:
            out = c * src
        else:
            out += c * src
    return out


def reconstruction_reach(p: int) -> int:
    return node_stencil_pair(p)[0].reach


class Reconstructor:
    """Point values of the conservative reconstruction in every cell of a block.

    In 2D the tensor evaluation runs two 1D passes: x-stencil to line averages,
    then y-stencil to the point. Line averages are cached per x position.
    """

    def __init__(self, U: np.ndarray, pad: int, p: int, ext: int):
        self.U, self.pad, self.p, self.ext = U, pad, p, ext
        self.dims = U.ndim
        self._lines: dict = {}
        self._points: dict = {}

    def _stencil(self, x):
        return conservative_node_stencil(self.p, x)

    def line(self, x):
        key = x
        if key not in self._lines:
            self._lines[key] = apply_stencil(self.U, self._stencil(x), 0, self.pad, self.ext)
        return self._lines[key]

    def point(self, x, y=None) -> np.ndarray:
        key = (x, y)
        if key not in self._points:
            line = self.line(x)
            if self.dims == 1:
                val = line
            else:
                val = apply_stencil(line, self._stencil(y), 1, self.pad, self.ext)
            self._points[key] = val
        return self._points[key]

    @property
    def mean(self) -> np.ndarray:
        return crop(self.U, self.pad, self.ext)


@dataclass
class FaceFluxField:
    """Face-averaged fluxes: ``fx`` on x-faces, ``fy`` on y-faces (2D only)."""

    fx: np.ndarray
    fy: Optional[np.ndarray] = None

    def __iter__(self):
        yield self.fx
        if self.fy is not None:
            yield self.fy


def limited(vals, theta, mean):
    # theta == 1 passes values through untouched so released cells stay bit-exact
    if theta is None:
        return vals
    return np.where(theta == 1.0, vals, theta * (vals - mean) + mean)


# ---------------------------------------------------------------------------
# 1D


def face_velocity_1d(flux: FluxFunction, grid: Grid):
    if flux.varying:
        return flux.component(0, grid.faces(0))
    return flux.component(0)


def faces_1d(R: Reconstructor, flux: FluxFunction, grid: Grid, theta=None, nodes=None) -> FaceFluxField:
    """N+1 face fluxes from a block with ext >= 1.

    ``nodes`` optionally overrides the (minus, plus) node values per cell.
    """
    e = R.ext
    n = grid.n
    if nodes is None:
        um = limited(R.point(-HALF), theta, R.mean)
        up = limited(R.point(HALF), theta, R.mean)
    else:
        um, up = nodes
    uL = up[e - 1:e + n]
    uR = um[e:e + n + 1]
    return FaceFluxField(flux.riemann(uL, uR, face_velocity_1d(flux, grid), 0, grid))


def divergence(faces: FaceFluxField, h: float) -> np.ndarray:
    fx = faces.fx
    if faces.fy is None:
        return -(fx[1:] - fx[:-1]) / h
    fy = faces.fy
    return -((fx[1:, :] - fx[:-1, :]) + (fy[:, 1:] - fy[:, :-1])) / h


def residual_1d(field: CellField, p: int, flux: FluxFunction, nodes=None) -> np.ndarray:
    """L_p of a 1D field with filled ghosts; returns interior residual."""
    g = field.grid.ghost_width
    if g < reconstruction_reach(p) + 1:
        raise ValueError(f"ghost width {g} too small for p={p}")
    R = Reconstructor(field.values, g, p, 1)
    return divergence(faces_1d(R, flux, field.grid, nodes=nodes), field.grid.h)


# ---------------------------------------------------------------------------
# 2D


def _face_coords(grid: Grid, axis: int, normal_idx, tangential_pts):
    """Physical coordinates of nodes on faces normal to ``axis``.

    ``normal_idx`` are face indices 0..n along the normal; ``tangential_pts``
    are cell-centre coordinates (+ node offsets) along the face.
    """
    f = grid.faces(axis)[normal_idx]
    if axis == 0:
        return np.meshgrid(f, tangential_pts, indexing="ij")
    return np.meshgrid(tangential_pts, f, indexing="ij")


def _normal_velocity(flux: FluxFunction, grid: Grid, axis: int, tangential_pts):
    if not flux.varying:
        return flux.component(axis)
    X, Y = _face_coords(grid, axis, np.arange(grid.n + 1), tangential_pts)
    return flux.component(axis, X, Y)


def gl_face_nodes(R: Reconstructor, p: int):
    """Traces at the Gauss-Legendre nodes: lists over beta of (xm, xp, ym, yp)."""
    rule = gauss_legendre_rule(p)
    xm, xp, ym, yp = [], [], [], []
    for t in rule.mp_points:
        xm.append(R.point(-HALF, t))
        xp.append(R.point(HALF, t))
        ym.append(R.point(t, -HALF))
        yp.append(R.point(t, HALF))
    return xm, xp, ym, yp


def face_integrals_gauss_legendre(R: Reconstructor, flux: FluxFunction, grid: Grid, theta=None) -> FaceFluxField:
    p, e, n, h = R.p, R.ext, grid.n, grid.h
    rule = gauss_legendre_rule(p)
    mean = R.mean
    xm, xp, ym, yp = gl_face_nodes(R, p)
    fx = fy = 0.0
    for b, w in enumerate(rule.weights):
        shift = rule.points[b] * h
        uL = limited(xp[b], theta, mean)[e - 1:e + n, e:e + n]
        uR = limited(xm[b], theta, mean)[e:e + n + 1, e:e + n]
        vx = _normal_velocity(flux, grid, 0, grid.centers(1) + shift)
        fx = fx + w * flux.riemann(uL, uR, vx, 0, grid)
        uL = limited(yp[b], theta, mean)[e:e + n, e - 1:e + n]
        uR = limited(ym[b], theta, mean)[e:e + n, e:e + n + 1]
        vy = _normal_velocity(flux, grid, 1, grid.centers(0) + shift)
        fy = fy + w * flux.riemann(uL, uR, vy, 1, grid)
    return FaceFluxField(fx, fy)


def transverse_reach(p: int) -> int:
    return transverse_integral_stencil(p).reach


def midpoint_face_nodes(R: Reconstructor):
    return (
        R.point(-HALF, Fraction(0)),
        R.point(HALF, Fraction(0)),
        R.point(Fraction(0), -HALF),
        R.point(Fraction(0), HALF),
    )


def _midpoint_fluxes(flux, grid, vals, e, t):
    """Point fluxes at face midpoints, extended by ``t`` cells transversely."""
    xm, xp, ym, yp = vals
    n, h = grid.n, grid.h
    tang = grid.bounds[1][0] + (np.arange(-t, n + t) + 0.5) * h
    uL = xp[e - 1:e + n, e - t:e + n + t]
    uR = xm[e:e + n + 1, e - t:e + n + t]
    px = flux.riemann(uL, uR, _normal_velocity(flux, grid, 0, tang), 0, grid)
    tang_y = grid.bounds[0][0] + (np.arange(-t, n + t) + 0.5) * h
    uL = yp[e - t:e + n + t, e - 1:e + n]
    uR = ym[e - t:e + n + t, e:e + n + 1]
    py = flux.riemann(uL, uR, _normal_velocity(flux, grid, 1, tang_y), 1, grid)
    return px, py


def face_integrals_transverse(R: Reconstructor, flux: FluxFunction, grid: Grid, theta=None) -> FaceFluxField:
    p, e = R.p, R.ext
    st = transverse_integral_stencil(p)
    t = st.reach
    if e < max(1, t):
        raise ValueError("block extension too small for the transverse stencil")
    mean = R.mean
    vals = [limited(v, theta, mean) for v in midpoint_face_nodes(R)]
    px, py = _midpoint_fluxes(flux, grid, vals, e, t)
    fx = apply_stencil(px, st, 1, t, 0)
    fy = apply_stencil(py, st, 0, t, 0)
    return FaceFluxField(fx, fy)


def block_extension(p: int, method: str) -> int:
    if method == "transverse":
        return max(1, transverse_reach(p))
    return 1


def _reconstructor_2d(field: CellField, p: int, method: str) -> Reconstructor:
    g = field.grid.ghost_width
    e = block_extension(p, method)
    if g < e + reconstruction_reach(p):
        raise ValueError(f"ghost width {g} too small for p={p} ({method})")
    return Reconstructor(field.values, g, p, e)


def face_integrals_gauss_legendre_2d(field: CellField, p: int, flux: FluxFunction) -> FaceFluxField:
    R = _reconstructor_2d(field, p, "gauss_legendre")
    return face_integrals_gauss_legendre(R, flux, field.grid)


def face_integrals_transverse_2d(field: CellField, p: int, flux: FluxFunction) -> FaceFluxField:
    R = _reconstructor_2d(field, p, "transverse")
    return face_integrals_transverse(R, flux, field.grid)


def residual_2d(faces: FaceFluxField, h: float) -> np.ndarray:
    return divergence(faces, h)
