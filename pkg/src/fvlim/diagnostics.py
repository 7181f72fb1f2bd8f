"""Violation tracking, error norms, convergence orders and throughput."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

MPP_THRESHOLD = -1e-10


@dataclass
class ViolationTracker:
    """Running minima of (u - m) and (M - u) over every recorded state."""

    m: float
    M: float
    delta_minus: float = math.inf
    delta_plus: float = math.inf

    def update(self, u: np.ndarray) -> "ViolationTracker":
        self.delta_minus = min(self.delta_minus, float(np.min(u)) - self.m)
        self.delta_plus = min(self.delta_plus, self.M - float(np.max(u)))
        return self

    @property
    def delta(self) -> float:
        return min(self.delta_minus, self.delta_plus)

    @property
    def approximately_mpp(self) -> bool:
        return self.delta > MPP_THRESHOLD

    def merge(self, other: "ViolationTracker") -> "ViolationTracker":
        return ViolationTracker(
            self.m, self.M,
            min(self.delta_minus, other.delta_minus),
            min(self.delta_plus, other.delta_plus),
        )


def update_violation(tracker: ViolationTracker, u) -> ViolationTracker:
    return tracker.update(getattr(u, "interior", u))


def l1_error(final, reference, h: float | None = None, dims: int | None = None) -> float:
    """h^d sum |final - reference| over interior cells."""
    a = getattr(final, "interior", final)
    b = getattr(reference, "interior", reference)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    if h is None:
        h = final.grid.h
    dims = a.ndim if dims is None else dims
    return h ** dims * float(np.sum(np.abs(a - b)))


def eoc(e_coarse: float, e_fine: float) -> float:
    if e_coarse <= 0 or e_fine <= 0:
        raise ValueError("errors must be positive")
    return math.log2(e_coarse / e_fine)


def throughput(n_cells: int, stages: int, step_seconds) -> float:
    """Cells updated per RK stage per second over the timed window.

    ``step_seconds`` holds wall times per step starting with a warm-up step,
    which is discarded; at least ten timed steps must remain.
    """
    timed = list(step_seconds)[1:]
    if len(timed) < 10:
        raise ValueError("need at least ten timed steps after warm-up")
    timed = timed[:10]
    return n_cells * stages * len(timed) / sum(timed)


@dataclass
class ErrorRecord:
    N: int
    p: int
    C: float
    integrator: str
    E1: float
    EOC: Optional[float] = None
    flux_reconstruction: str = "gauss_legendre"


def attach_eoc(records: list[ErrorRecord]) -> list[ErrorRecord]:
    """Fill EOC from the preceding record of the same (p, method) with N halved."""
    prev = {}
    for r in records:
        key = (r.p, r.flux_reconstruction, r.integrator)
        before = prev.get(key)
        if before is not None and before.N * 2 == r.N:
            r.EOC = eoc(before.E1, r.E1)
        prev[key] = r
    return records


@dataclass
class RunReport:
    scheme: str
    p: int
    N: int
    integrator: str
    t_end: float
    delta_minus: float
    delta_plus: float
    delta: float
    e1: Optional[float]
    mass_initial: float
    mass_final: float
    steps: int
    retries: int
    cells_per_stage_per_second: Optional[float] = None
    dims: int = 1
    flux_reconstruction: Optional[str] = None
    snapshots: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)
