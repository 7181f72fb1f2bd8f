"""Named limited schemes and the time-marching driver."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np

from . import limiter_aposteriori as post
from .diagnostics import RunReport, ViolationTracker, l1_error
from .flux import (
    FluxFunction,
    Reconstructor,
    block_extension,
    crop,
    divergence,
    face_integrals_gauss_legendre,
    face_integrals_transverse,
    faces_1d,
    reconstruction_reach,
)
from .limiter_apriori import NODE_SETS, compute_theta
from .mesh import BoundaryCondition, CellField, Grid, mass, pad
from .sed import EPS_M, sed_override_apriori, smooth_cells
from .stencil import gauss_lobatto_rule
from .timestepping import adaptive_mpp_step, get_tableau, rk_step

SCHEMES = ("aPrioriMPP", "aPrioriT", "aPosteriori", "aPosterioriB", "MUSCL-Hancock", "unlimited")
PARADIGM = {
    "aPrioriMPP": "a_priori",
    "aPrioriT": "a_priori",
    "aPosteriori": "a_posteriori",
    "aPosterioriB": "a_posteriori",
    "MUSCL-Hancock": "muscl_hancock",
    "unlimited": "none",
}
FLUX_METHODS = ("gauss_legendre", "transverse")
HANCOCK = "Hancock"


def default_integrator(p: int) -> str:
    return {0: "Euler", 1: "SSPRK2"}.get(p, "SSPRK3")


def _named_defaults(name: str, dims: int, p: int) -> dict:
    fallback = "pp" if dims == 2 else "moncen"
    base = dict(
        integrator=HANCOCK if name == "MUSCL-Hancock" else default_integrator(p),
        flux_reconstruction="gauss_legendre",
        adaptive_dt=False,
        fallback_limiter=None,
        blending=False,
    )
    if name == "aPrioriMPP":
        base.update(adaptive_dt=True)
    elif name == "aPrioriT":
        base.update(flux_reconstruction="transverse")
    elif name in ("aPosteriori", "aPosterioriB"):
        base.update(
            flux_reconstruction="transverse" if dims == 2 else "gauss_legendre",
            fallback_limiter=fallback,
            blending=name == "aPosterioriB",
        )
    elif name == "MUSCL-Hancock":
        base.update(fallback_limiter=fallback)
    return base


@dataclass
class SchemeConfig:
    """Every knob of a limited scheme; ``None`` fields take the named defaults."""

    name: str
    p: int
    dims: int = 1
    integrator: Optional[str] = None
    flux_reconstruction: Optional[str] = None
    theta_node_set: str = "centroid"
    C: float = 0.8
    adaptive_dt: Optional[bool] = None
    fallback_limiter: Optional[str] = None
    blending: Optional[bool] = None
    sed: bool = True
    sed_bounds_check: bool = True
    nad_eps: float = post.NAD_EPS
    eps_m: float = EPS_M
    alpha_mode: str = "local"
    stage_candidate: str = "full"

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}; choose from {SCHEMES}")
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if not (isinstance(self.p, (int, np.integer)) and 0 <= self.p <= 7):
            raise ValueError("p must be an integer in 0..7")
        for key, val in _named_defaults(self.name, self.dims, self.p).items():
            if getattr(self, key) is None:
                setattr(self, key, val)
        self.validate()

    @property
    def paradigm(self) -> str:
        return PARADIGM[self.name]

    def validate(self):
        if self.flux_reconstruction not in FLUX_METHODS:
            raise ValueError(f"unknown flux reconstruction {self.flux_reconstruction!r}")
        if self.theta_node_set not in NODE_SETS:
            raise ValueError(f"unknown theta node set {self.theta_node_set!r}")
        if self.dims == 2 and self.theta_node_set == "gauss_lobatto" and self.flux_reconstruction == "transverse":
            raise ValueError("the gauss_lobatto node set is incompatible with transverse fluxes")
        if self.fallback_limiter is not None:
            if self.fallback_limiter not in post.FALLBACK_LIMITERS:
                raise ValueError(f"unknown fallback limiter {self.fallback_limiter!r}")
            if self.fallback_limiter == "pp" and self.dims == 1:
                raise ValueError("the pp fallback limiter is only defined in 2D")
        if self.paradigm in ("a_posteriori", "muscl_hancock") and self.fallback_limiter is None:
            raise ValueError(f"{self.name} needs a fallback limiter")
        if self.integrator != HANCOCK:
            get_tableau(self.integrator)
        elif self.paradigm != "muscl_hancock":
            raise ValueError("the Hancock predictor-corrector is only used by MUSCL-Hancock")
        if self.paradigm == "muscl_hancock" and self.integrator != HANCOCK:
            raise ValueError("MUSCL-Hancock carries its own time integration")
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ValueError("C must be positive")
        if self.alpha_mode not in ("local", "global"):
            raise ValueError("alpha_mode must be local or global")
        if self.stage_candidate not in ("ci", "full"):
            raise ValueError("stage_candidate must be ci or full")
        if self.nad_eps < 0 or self.eps_m < 0:
            raise ValueError("tolerances must be non-negative")
        if self.adaptive_dt and self.paradigm != "a_priori":
            raise ValueError("adaptive time stepping is only defined for a priori schemes")

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "SchemeConfig":
        return replace(self, **changes)


CONFIG_FIELDS = tuple(f.name for f in fields(SchemeConfig))


def required_ghosts(config: SchemeConfig) -> int:
    method = config.flux_reconstruction if config.dims == 2 else "gauss_legendre"
    e = block_extension(config.p, method)
    return e + max(reconstruction_reach(config.p), 3)


@dataclass
class Snapshot:
    time: float
    field: CellField
    scheme: str
    step: int


class Scheme:
    """A configured scheme bound to a grid, boundary condition and velocity."""

    def __init__(self, config: SchemeConfig, grid: Grid, bc: BoundaryCondition | None = None,
                 flux: FluxFunction | None = None, bounds: tuple | None = None):
        self.config = config
        if grid.dims != config.dims:
            raise ValueError("grid and scheme disagree on dimension")
        g = max(grid.ghost_width, required_ghosts(config))
        self.grid = grid.with_ghosts(g)
        self.bc = bc or BoundaryCondition.periodic()
        flux = flux or FluxFunction(1.0 if config.dims == 1 else (1.0, 1.0))
        if flux.alpha != config.alpha_mode:
            flux = replace(flux, alpha=config.alpha_mode)
        self.flux = flux
        self.bounds = bounds
        self.tableau = None if config.integrator == HANCOCK else get_tableau(config.integrator)
        self.method = config.flux_reconstruction if config.dims == 2 else "gauss_legendre"
        self.ext = block_extension(config.p, self.method) if config.dims == 2 else 1
        self.speed = self.flux.speed_sum(self.grid)
        self.c_mpp = float(gauss_lobatto_rule(config.p)[1])

    # -- helpers ---------------------------------------------------------
    @property
    def G(self) -> int:
        return self.grid.ghost_width

    @property
    def stages(self) -> int:
        return 1 if self.tableau is None else self.tableau.stages

    def padded(self, u: np.ndarray) -> np.ndarray:
        return pad(u, self.G, self.bc)

    def nominal_dt(self) -> float:
        if self.speed == 0:
            return math.inf
        return self.config.C * self.grid.h / self.speed

    def dt_floor(self) -> float:
        if self.speed == 0:
            return math.inf
        return self.c_mpp * self.grid.h / self.speed

    def wiring(self) -> dict:
        c = self.config
        return dict(
            scheme=c.name,
            paradigm=c.paradigm,
            dims=c.dims,
            p=c.p,
            integrator=c.integrator,
            flux_reconstruction=self.method if c.dims == 2 else None,
            theta_node_set=c.theta_node_set if c.paradigm == "a_priori" else None,
            C=c.C,
            adaptive_dt=bool(c.adaptive_dt),
            fallback_limiter=c.fallback_limiter,
            blending=bool(c.blending),
            sed=c.sed,
            ghost_width=self.G,
        )

    def _require_bounds(self):
        if self.bounds is None:
            raise RuntimeError("global bounds (m, M) are not set")
        return self.bounds

    # -- spatial operators -----------------------------------------------
    def high_order_faces(self, U: np.ndarray, theta=None, R: Reconstructor | None = None):
        R = R or Reconstructor(U, self.G, self.config.p, self.ext)
        if self.config.dims == 1:
            return faces_1d(R, self.flux, self.grid, theta)
        if self.method == "transverse":
            return face_integrals_transverse(R, self.flux, self.grid, theta)
        return face_integrals_gauss_legendre(R, self.flux, self.grid, theta)

    def theta(self, U: np.ndarray, R: Reconstructor | None = None):
        """Limiter field for the padded state ``U`` (after smooth-extremum release)."""
        c = self.config
        R = R or Reconstructor(U, self.G, c.p, self.ext)
        th = compute_theta(R, c.theta_node_set, self.method)
        if c.sed and c.p > 0:
            m, M = self._require_bounds()
            smooth = crop(smooth_cells(U), self.G, self.ext)
            th.theta = sed_override_apriori(
                th.theta, smooth, th.node_max, th.node_min, m, M, c.eps_m, c.sed_bounds_check
            )
        return th

    def residual(self, u: np.ndarray) -> np.ndarray:
        """Semi-discrete operator on interior values (a priori limited if configured)."""
        U = self.padded(u)
        R = Reconstructor(U, self.G, self.config.p, self.ext)
        theta = None
        if self.config.paradigm == "a_priori" and self.config.p > 0:
            theta = self.theta(U, R).theta
        return divergence(self.high_order_faces(U, theta, R), self.grid.h)

    def troubled_cells(self, candidate: np.ndarray, parent_padded: np.ndarray) -> np.ndarray:
        c = self.config
        m, M = self._require_bounds()
        smooth = None
        if c.sed:
            smooth = crop(smooth_cells(self.padded(candidate)), self.G, 0)
        return post.detect_troubled(candidate, parent_padded, self.G, m, M, c.nad_eps, smooth, c.eps_m)

    def revised_residual(self, u: np.ndarray, step: float) -> np.ndarray:
        """Residual with fallback revision of faces around troubled candidate cells."""
        U = self.padded(u)
        high = self.high_order_faces(U)
        k = divergence(high, self.grid.h)
        if step == 0.0:
            return k
        candidate = u + step * k
        troubled = self.troubled_cells(candidate, U)
        if not troubled.any():
            return k
        fb = post.fallback_fluxes(U, self.G, self.grid, self.flux, self.config.fallback_limiter)
        phi = post.blend_coefficients(troubled, bool(self.config.blending), self.bc)
        return divergence(post.revise_face_fluxes(high, fb, phi), self.grid.h)

    def stage_policy(self, i: int, c_i: float, dt: float, u_i: np.ndarray) -> np.ndarray:
        step = c_i * dt if self.config.stage_candidate == "ci" else dt
        return self.revised_residual(u_i, step)

    # -- time stepping ---------------------------------------------------
    def step(self, u: np.ndarray, dt: float) -> np.ndarray:
        paradigm = self.config.paradigm
        if paradigm == "muscl_hancock":
            return muscl_hancock_step(
                self.padded(u), self.G, self.grid, self.flux, dt, self.config.fallback_limiter
            )
        if paradigm == "a_posteriori":
            return rk_step(u, dt, self.tableau, stage_policy=self.stage_policy)
        return rk_step(u, dt, self.tableau, self.residual)


def assemble(config: SchemeConfig, grid: Grid, bc: BoundaryCondition | None = None,
             flux: FluxFunction | None = None, bounds: tuple | None = None) -> Scheme:
    if config.integrator == "SSPRK2" and config.p >= 2:
        warnings.warn(
            f"SSPRK2 is linearly unstable with p={config.p} reconstructions at C=1",
            RuntimeWarning,
            stacklevel=2,
        )
    return Scheme(config, grid, bc, flux, bounds)


def _cell_face_speeds(flux: FluxFunction, grid: Grid, axis: int, ext: int):
    """Normal velocity at the lower and upper face of every cell in a block."""
    if not flux.varying:
        v = flux.component(axis)
        return v, v
    h = grid.h
    idx = np.arange(-ext, grid.n + ext)
    centres = [grid.bounds[a][0] + (idx + 0.5) * h for a in range(grid.dims)]
    lower = [c.copy() for c in centres]
    upper = [c.copy() for c in centres]
    lower[axis] = centres[axis] - 0.5 * h
    upper[axis] = centres[axis] + 0.5 * h
    if grid.dims == 1:
        return flux.component(0, lower[0]), flux.component(0, upper[0])
    XL, YL = np.meshgrid(*lower, indexing="ij")
    XU, YU = np.meshgrid(*upper, indexing="ij")
    return flux.component(axis, XL, YL), flux.component(axis, XU, YU)


def muscl_hancock_step(U: np.ndarray, pad_width: int, grid: Grid, flux: FluxFunction,
                       dt: float, limiter: str) -> np.ndarray:
    """Second-order predictor-corrector update of the interior of padded ``U``."""
    block = crop(U, pad_width, 2)
    vals = post.muscl_interface_values(block, limiter)
    change = 0.0
    for axis, (lo, hi) in enumerate(vals):
        v_lo, v_hi = _cell_face_speeds(flux, grid, axis, 1)
        change = change + (v_hi * hi - v_lo * lo)
    change = -0.5 * dt / grid.h * change
    predicted = [(lo + change, hi + change) for lo, hi in vals]
    faces = post.interface_fluxes(predicted, grid, flux)
    return crop(U, pad_width, 0) + dt * divergence(faces, grid.h)


def _as_field(scheme: Scheme, ic) -> CellField:
    if isinstance(ic, CellField):
        return CellField.from_interior(scheme.grid, ic.interior, ic.time, scheme.bc)
    return CellField.from_interior(scheme.grid, np.asarray(ic, dtype=float), 0.0, scheme.bc)


def advance(scheme: Scheme, ic, t_end: float, snapshot_times: Sequence[float] = (),
            reference=None):
    """March ``ic`` to ``t_end``; returns (final field, RunReport, snapshots)."""
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    field0 = _as_field(scheme, ic)
    u = field0.interior.copy()
    if scheme.bounds is None:
        scheme.bounds = (float(u.min()), float(u.max()))
    m, M = scheme.bounds
    tracker = ViolationTracker(m, M).update(u)
    targets = sorted({float(s) for s in snapshot_times if 0 <= s <= t_end} | {float(t_end)})
    snapshots = []
    if targets and targets[0] == 0.0:
        snapshots.append(Snapshot(0.0, field0.copy(), scheme.config.name, 0))
        targets = targets[1:]
    t, steps, retries = 0.0, 0, 0
    dt_nom = scheme.nominal_dt()
    adaptive = bool(scheme.config.adaptive_dt)
    tol = 1e-12 * t_end
    for target in targets:
        while target - t > tol:
            dt = min(dt_nom, target - t)
            if adaptive:
                u, dt, n_retry = adaptive_mpp_step(
                    u, scheme.step, dt, min(scheme.dt_floor(), dt), m, M
                )
                retries += n_retry
            else:
                if math.isinf(dt):
                    dt = target - t
                u = scheme.step(u, dt)
            steps += 1
            if not np.all(np.isfinite(u)):
                raise FloatingPointError(f"non-finite state after step {steps}")
            t = target if target - (t + dt) <= tol else t + dt
            tracker.update(u)
        if target != t_end or target in snapshot_times:
            snapshots.append(
                Snapshot(t, CellField.from_interior(scheme.grid, u.copy(), t, scheme.bc),
                         scheme.config.name, steps)
            )
    final = CellField.from_interior(scheme.grid, u, t, scheme.bc)
    h = scheme.grid.h
    e1 = None if reference is None else l1_error(final, reference, h, scheme.grid.dims)
    report = RunReport(
        scheme=scheme.config.name,
        p=scheme.config.p,
        N=scheme.grid.n,
        integrator=scheme.config.integrator,
        t_end=float(t_end),
        delta_minus=tracker.delta_minus,
        delta_plus=tracker.delta_plus,
        delta=tracker.delta,
        e1=e1,
        mass_initial=mass(field0.interior, h),
        mass_final=mass(u, h),
        steps=steps,
        retries=retries,
        dims=scheme.grid.dims,
        flux_reconstruction=scheme.method if scheme.grid.dims == 2 else None,
    )
    return final, report, snapshots
