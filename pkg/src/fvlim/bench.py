"""Benchmark problems and experiment runners."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .diagnostics import MPP_THRESHOLD, ErrorRecord, attach_eoc, throughput
from .flux import FluxFunction
from .mesh import BoundaryCondition, CellField, Grid
from .solver import SchemeConfig, advance, assemble
from .timestepping import get_tableau


# ---------------------------------------------------------------------------
# initial conditions


def _gauss_points(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * x, 0.5 * w


def composite_profile(x):
    """Four-feature profile (Gaussian, square, triangle, half-ellipse) on [0, 1]."""
    s = 2.0 * np.asarray(x, dtype=float) - 1.0
    a, z, d, alpha = 0.5, -0.7, 0.005, 10.0
    beta = math.log(2.0) / (36 * d * d)

    def bump(c):
        return np.exp(-beta * (s - c) ** 2)

    def ellipse(c):
        return np.sqrt(np.maximum(1 - alpha ** 2 * (s - c) ** 2, 0.0))

    out = np.zeros_like(s)
    band = (s >= -0.8) & (s <= -0.6)
    out = np.where(band, (bump(z - d) + bump(z + d) + 4 * bump(z)) / 6, out)
    out = np.where((s >= -0.4) & (s <= -0.2), 1.0, out)
    out = np.where((s >= 0.0) & (s <= 0.2), 1 - np.abs(10 * (s - 0.1)), out)
    band = (s >= 0.4) & (s <= 0.6)
    out = np.where(band, (ellipse(a - d) + ellipse(a + d) + 4 * ellipse(a)) / 6, out)
    return out


def _composite_average(grid: Grid, sub: int = 4, pts: int = 5) -> np.ndarray:
    xg, wg = _gauss_points(pts)
    h = grid.h
    lo = grid.faces(0)[:-1]
    total = np.zeros(grid.n)
    for k in range(sub):
        for x, w in zip(xg, wg):
            total += w * composite_profile(lo + (k + 0.5 + x) * h / sub)
    return total / sub


def _sine_average(grid: Grid) -> np.ndarray:
    k = 2 * np.pi
    h = grid.h
    X, Y = np.meshgrid(grid.centers(0), grid.centers(1), indexing="ij")
    factor = (math.sin(k * h / 2) / (k * h / 2)) ** 2
    return np.sin(k * (X + Y)) * factor


def _overlap_fraction(grid: Grid, axis: int, lo: float, hi: float) -> np.ndarray:
    f = grid.faces(axis)
    return np.clip(np.minimum(f[1:], hi) - np.maximum(f[:-1], lo), 0.0, None) / grid.h


def _square_average(grid: Grid) -> np.ndarray:
    return np.outer(_overlap_fraction(grid, 0, 0.25, 0.75), _overlap_fraction(grid, 1, 0.25, 0.75))


def slotted_disk(x, y):
    inside = x ** 2 + (y - 0.5) ** 2 < 0.3 ** 2
    return (inside & ((np.abs(x) > 0.025) | (y > 0.7))).astype(float)


def _slotted_average(grid: Grid, sub: int = 5, pts: int = 5) -> np.ndarray:
    xg, wg = _gauss_points(pts)
    h = grid.h
    offs = np.array([(k + 0.5 + x) / sub for k in range(sub) for x in xg])
    wts = np.array([w / sub for _ in range(sub) for w in wg])
    lo0 = grid.faces(0)[:-1]
    lo1 = grid.faces(1)[:-1]
    total = np.zeros(grid.shape)
    for ox, wx in zip(offs, wts):
        xs = lo0 + ox * h
        for oy, wy in zip(offs, wts):
            ys = lo1 + oy * h
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            total += wx * wy * slotted_disk(X, Y)
    return total


def rotation_velocity(x, y=None):
    return (-y, x)


@dataclass(frozen=True)
class Problem:
    name: str
    dims: int
    bounds: tuple
    bc: BoundaryCondition
    velocity: object
    period: float
    averager: Callable = field(repr=False, compare=False)
    exact_after_period: bool = True

    def grid(self, n: int) -> Grid:
        return Grid(self.dims, n, self.bounds)

    def flux(self) -> FluxFunction:
        return FluxFunction(self.velocity)


PROBLEMS = {
    "composite_1d": Problem(
        "composite_1d", 1, ((0.0, 1.0),), BoundaryCondition.periodic(), 1.0, 1.0, _composite_average
    ),
    "sine_2d": Problem(
        "sine_2d", 2, ((0.0, 1.0), (0.0, 1.0)), BoundaryCondition.periodic(), (2.0, 1.0), 1.0, _sine_average
    ),
    "square_2d": Problem(
        "square_2d", 2, ((0.0, 1.0), (0.0, 1.0)), BoundaryCondition.periodic(), (2.0, 1.0), 1.0, _square_average
    ),
    "slotted_cylinder": Problem(
        "slotted_cylinder", 2, ((-1.0, 1.0), (-1.0, 1.0)), BoundaryCondition.dirichlet(0.0),
        rotation_velocity, 2 * math.pi, _slotted_average,
    ),
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None


def initialize(problem: Problem | str, grid: Grid | int) -> CellField:
    """Cell averages of the problem's initial condition."""
    if isinstance(problem, str):
        problem = get_problem(problem)
    if isinstance(grid, (int, np.integer)):
        grid = problem.grid(int(grid))
    if grid.dims != problem.dims:
        raise ValueError("grid dimension does not match the problem")
    for (lo, hi), (plo, phi) in zip(grid.bounds, problem.bounds):
        if not (math.isclose(lo, plo) and math.isclose(hi, phi)):
            raise ValueError("grid domain does not match the problem")
    return CellField.from_interior(grid, problem.averager(grid), 0.0, problem.bc)


# ---------------------------------------------------------------------------
# experiment plans


def integrators_for(p: int) -> list[str]:
    """Integrator pairings used for the violation tables."""
    if p == 0:
        return ["Euler"]
    if p == 1:
        return ["SSPRK2"]
    if p == 2:
        return ["SSPRK3"]
    return ["SSPRK3", "RK4"]


def convergence_integrator(p: int) -> str:
    return {0: "Euler", 1: "SSPRK2", 2: "SSPRK3", 3: "RK4"}.get(p, "RK6")


def cfl_schedule(p: int, n: int, integrator: str, base: float = 0.8) -> float:
    """Reduced CFL factor that lets a lower-order integrator keep pace with order p+1."""
    q = get_tableau(integrator).order - 1
    if p <= q:
        return base
    return base * (1.0 / n) ** ((p - q) / (q + 1))


@dataclass
class ExperimentPlan:
    problem: str
    schemes: Sequence[str] = ("aPrioriMPP",)
    ps: Sequence[int] = (1,)
    integrators: Optional[Sequence[str]] = None
    Ns: Sequence[int] = (64,)
    t_end: float = 1.0
    repetitions: int = 1
    flux_reconstructions: Sequence[str] = ("gauss_legendre",)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.schemes = tuple(self.schemes)
        self.ps = tuple(int(p) for p in self.ps)
        self.Ns = tuple(int(n) for n in self.Ns)
        self.flux_reconstructions = tuple(self.flux_reconstructions)
        if self.integrators is not None:
            self.integrators = tuple(self.integrators)
        self.t_end = float(self.t_end)
        self.overrides = dict(self.overrides)

    def tuples(self):
        for p in self.ps:
            ints = self.integrators or integrators_for(p)
            for integ in ints:
                for scheme in self.schemes:
                    for n in self.Ns:
                        yield scheme, p, integ, n


def _run_one(problem: Problem, config: SchemeConfig, n: int, t_end: float, reference=True):
    grid = problem.grid(n)
    ic = initialize(problem, grid)
    scheme = assemble(config, grid, problem.bc, problem.flux())
    periods = t_end / problem.period
    ref = ic if reference and problem.exact_after_period and abs(periods - round(periods)) < 1e-12 else None
    return advance(scheme, ic, t_end, reference=ref)


def run_violation_table(plan: ExperimentPlan) -> list[dict]:
    problem = get_problem(plan.problem)
    rows = []
    for scheme, p, integ, n in plan.tuples():
        cfg = SchemeConfig(scheme, p, problem.dims, integrator=integ, **plan.overrides)
        _, report, _ = _run_one(problem, cfg, n, plan.t_end)
        rows.append(dict(
            scheme=scheme, p=p, integrator=integ, N=n, delta=report.delta,
            delta_minus=report.delta_minus, delta_plus=report.delta_plus,
            approximately_mpp=report.delta > MPP_THRESHOLD, steps=report.steps,
            retries=report.retries, e1=report.e1,
        ))
    return rows


def run_convergence_table(plan: ExperimentPlan) -> list[ErrorRecord]:
    """L1 errors and orders on the sine problem with limiting released by SED."""
    problem = get_problem(plan.problem)
    records = []
    for method in plan.flux_reconstructions:
        scheme_name = "aPrioriT" if method == "transverse" else "aPrioriMPP"
        for p in plan.ps:
            integ = (plan.integrators[0] if plan.integrators else convergence_integrator(p))
            for n in plan.Ns:
                C = cfl_schedule(p, n, integ)
                cfg = SchemeConfig(
                    scheme_name, p, problem.dims, integrator=integ, flux_reconstruction=method,
                    C=C, adaptive_dt=False, sed_bounds_check=False, **plan.overrides,
                )
                _, report, _ = _run_one(problem, cfg, n, plan.t_end)
                records.append(ErrorRecord(n, p, C, integ, report.e1, None, method))
    return attach_eoc(records)


def run_timing(plan: ExperimentPlan, steps: int = 10) -> list[dict]:
    """Cells per stage per second, one warm-up step then ``steps`` timed steps."""
    problem = get_problem(plan.problem)
    rows = []
    for scheme_name in plan.schemes:
        for p in plan.ps:
            integ = plan.integrators[0] if plan.integrators else ("RK6" if p > 3 else "SSPRK3")
            for n in plan.Ns:
                grid = problem.grid(n)
                ic = initialize(problem, grid)
                cfg = SchemeConfig(scheme_name, p, problem.dims, integrator=integ,
                                   adaptive_dt=False, **plan.overrides)
                scheme = assemble(cfg, grid, problem.bc, problem.flux())
                scheme.bounds = (float(ic.interior.min()), float(ic.interior.max()))
                best = 0.0
                for _ in range(max(1, plan.repetitions)):
                    u = ic.interior.copy()
                    dt = scheme.nominal_dt()
                    times = []
                    for _ in range(steps + 1):
                        t0 = time.perf_counter()
                        u = scheme.step(u, dt)
                        times.append(time.perf_counter() - t0)
                    best = max(best, throughput(n ** problem.dims, scheme.stages, times))
                rows.append(dict(
                    scheme=scheme_name, p=p, N=n, integrator=integ,
                    flux_reconstruction=scheme.method, cells_per_stage_per_second=best,
                ))
    return rows
