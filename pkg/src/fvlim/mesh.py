"""Uniform 1D/2D grids, cell-average fields with ghost layers, boundary conditions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "periodic"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("periodic", "dirichlet"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if not math.isfinite(self.value):
            raise ValueError("dirichlet value must be finite")

    @classmethod
    def periodic(cls):
        return cls("periodic")

    @classmethod
    def dirichlet(cls, value=0.0):
        return cls("dirichlet", float(value))


@dataclass(frozen=True)
class Grid:
    dims: int
    n: int
    bounds: tuple = ((0.0, 1.0),)
    ghost_width: int = 0

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.n <= 0:
            raise ValueError("number of cells must be positive")
        if self.ghost_width < 0:
            raise ValueError("ghost width must be non-negative")
        bounds = tuple(tuple(map(float, b)) for b in self.bounds)
        if len(bounds) == 1 and self.dims == 2:
            bounds = bounds * 2
        if len(bounds) != self.dims:
            raise ValueError("one (lo, hi) interval per axis required")
        widths = [hi - lo for lo, hi in bounds]
        if any(w <= 0 for w in widths):
            raise ValueError("empty domain")
        if not all(math.isclose(w, widths[0], rel_tol=1e-14) for w in widths):
            raise ValueError("cells must be square: equal domain lengths on every axis")
        object.__setattr__(self, "bounds", bounds)

    @property
    def length(self) -> float:
        lo, hi = self.bounds[0]
        return hi - lo

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dims

    @property
    def padded_shape(self) -> tuple:
        return (self.n + 2 * self.ghost_width,) * self.dims

    def centers(self, axis: int = 0) -> np.ndarray:
        lo, _ = self.bounds[axis]
        return lo + (np.arange(self.n) + 0.5) * self.h

    def faces(self, axis: int = 0) -> np.ndarray:
        lo, _ = self.bounds[axis]
        return lo + np.arange(self.n + 1) * self.h

    def with_ghosts(self, g: int) -> "Grid":
        return replace(self, ghost_width=g)


def pad(u: np.ndarray, width: int, bc: BoundaryCondition) -> np.ndarray:
    """Surround ``u`` with ``width`` ghost layers on every axis."""
    if width == 0:
        return u
    if bc.kind == "periodic":
        if width > u.shape[0]:
            reps = -(-width // u.shape[0])
            big = np.tile(u, (2 * reps + 1,) * u.ndim)
            start = reps * u.shape[0] - width
            sl = slice(start, start + u.shape[0] + 2 * width)
            return big[(sl,) * u.ndim].copy()
        return np.pad(u, width, mode="wrap")
    return np.pad(u, width, mode="constant", constant_values=bc.value)


def pad_mask(mask: np.ndarray, width: int, bc: BoundaryCondition) -> np.ndarray:
    """Ghost layers for per-cell flags/weights: wrap if periodic, zero otherwise."""
    if bc.kind == "periodic":
        return pad(mask, width, bc)
    return np.pad(mask, width, mode="constant", constant_values=0)


@dataclass
class CellField:
    """Cell averages on ``grid`` stored with ``grid.ghost_width`` ghost layers."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.periodic)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape == self.grid.shape and self.grid.ghost_width:
            self.values = pad(self.values, self.grid.ghost_width, self.bc)
        if self.values.shape != self.grid.padded_shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.padded_shape}"
            )

    @classmethod
    def from_interior(cls, grid, interior, time=0.0, bc=None):
        bc = bc or BoundaryCondition.periodic()
        return cls(grid, pad(np.asarray(interior, dtype=np.float64), grid.ghost_width, bc), time, bc)

    @property
    def interior(self) -> np.ndarray:
        g = self.grid.ghost_width
        if g == 0:
            return self.values
        return self.values[(slice(g, -g),) * self.grid.dims]

    def copy(self) -> "CellField":
        return CellField(self.grid, self.values.copy(), self.time, self.bc)


def fill_ghosts(f: CellField, bc: BoundaryCondition | None = None) -> CellField:
    """Return a new field whose ghost layers satisfy ``bc``."""
    bc = bc or f.bc
    if f.grid.ghost_width < 1:
        raise ValueError("fill_ghosts needs at least one ghost layer")
    return CellField(f.grid, pad(f.interior.copy(), f.grid.ghost_width, bc), f.time, bc)


def total_mass(f) -> float:
    """h^d times the sum of interior cell averages."""
    if isinstance(f, CellField):
        return f.grid.h ** f.grid.dims * float(np.sum(f.interior))
    raise TypeError("total_mass expects a CellField")


def mass(u: np.ndarray, h: float) -> float:
    return h ** u.ndim * float(np.sum(u))
