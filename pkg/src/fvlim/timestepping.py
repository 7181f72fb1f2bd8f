"""Explicit Runge-Kutta integration and linear stability analysis."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .stencil import node_stencil_pair


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    ssp: bool = False

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.shape != (len(self.b), len(self.b)) or np.any(np.triu(A) != 0):
            raise ValueError(f"{self.name}: A must be strictly lower triangular")

    @property
    def stages(self) -> int:
        return len(self.b)

    def check(self, tol=1e-14) -> bool:
        return (
            abs(self.b.sum() - 1.0) < tol
            and np.allclose(self.A.sum(axis=1), self.c, atol=tol, rtol=0)
        )


def _tableau(name, A, b, order, ssp=False):
    A = np.array(A, dtype=float)
    return ButcherTableau(name, A, np.array(b, dtype=float), A.sum(axis=1), order, ssp)


def _rk6() -> ButcherTableau:
    r = np.sqrt(21.0)
    A = np.zeros((7, 7))
    A[1, 0] = 1.0
    A[2, :2] = [3 / 8, 1 / 8]
    A[3, :3] = [8 / 27, 2 / 27, 8 / 27]
    A[4, :4] = [3 * (3 * r - 7) / 392, (r - 7) / 49, 6 * (7 - r) / 49, -3 * (21 - r) / 392]
    A[5, :5] = [
        (-231 - 51 * r) / 392,
        (-7 - r) / 49,
        -8 * r / 49,
        3 * (21 + 121 * r) / 1960,
        49 * (6 + r) / 245,
    ]
    A[6, :6] = [
        (22 + 7 * r) / 12,
        2 / 3,
        2 * (7 * r - 5) / 9,
        -63 * (3 * r - 2) / 180,
        -7 * (49 + 9 * r) / 90,
        7 * (7 - r) / 18,
    ]
    b = [1 / 20, 0, 16 / 45, 0, 49 / 180, 49 / 180, 1 / 20]
    c = np.array([0, 1, 1 / 2, 2 / 3, (7 - r) / 14, (7 + r) / 14, 1])
    return ButcherTableau("RK6", A, np.array(b), c, 6)


TABLEAUS = {
    "Euler": _tableau("Euler", [[0]], [1], 1, ssp=True),
    "SSPRK2": _tableau("SSPRK2", [[0, 0], [1, 0]], [1 / 2, 1 / 2], 2, ssp=True),
    "SSPRK3": _tableau(
        "SSPRK3", [[0, 0, 0], [1, 0, 0], [1 / 4, 1 / 4, 0]], [1 / 6, 1 / 6, 2 / 3], 3, ssp=True
    ),
    "RK4": _tableau(
        "RK4",
        [[0, 0, 0, 0], [1 / 2, 0, 0, 0], [0, 1 / 2, 0, 0], [0, 0, 1, 0]],
        [1 / 6, 1 / 3, 1 / 3, 1 / 6],
        4,
    ),
    "RK6": _rk6(),
}


def get_tableau(name: str) -> ButcherTableau:
    try:
        return TABLEAUS[name]
    except KeyError:
        raise ValueError(f"unknown integrator {name!r}; choose from {sorted(TABLEAUS)}") from None


# a stage policy maps (stage index, c_i, dt, stage state) -> stage derivative
StagePolicy = Callable[[int, float, float, np.ndarray], np.ndarray]


def rk_step(u: np.ndarray, dt: float, tableau: ButcherTableau, residual_fn=None,
            stage_policy: Optional[StagePolicy] = None) -> np.ndarray:
    """One explicit RK step of du/dt = residual_fn(u).

    With ``stage_policy`` the derivative of every stage is delegated to it,
    which is how flux revision enters the loop.
    """
    if dt <= 0:
        raise ValueError("time step must be positive")
    ks = []
    for i in range(tableau.stages):
        ui = u
        for j in range(i):
            if tableau.A[i, j] != 0.0:
                ui = ui + dt * tableau.A[i, j] * ks[j]
        if stage_policy is not None:
            k = stage_policy(i, tableau.c[i], dt, ui)
        else:
            k = residual_fn(ui)
        ks.append(k)
    out = u
    for bi, k in zip(tableau.b, ks):
        if bi != 0.0:
            out = out + dt * bi * k
    return out


MPP_SLACK = 1e-13


def adaptive_mpp_step(u: np.ndarray, step_fn: Callable[[np.ndarray, float], np.ndarray],
                      dt_init: float, dt_floor: float, m: float, M: float,
                      slack: float = MPP_SLACK):
    """Retry ``step_fn`` with halved dt until the result lies in [m, M].

    Once dt has dropped to ``dt_floor`` (the reduced-CFL step) the result is
    accepted regardless. Returns ``(u_new, dt_used, n_retries)``.
    """
    dt = dt_init
    retries = 0
    while True:
        out = step_fn(u, dt)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite state in adaptive step")
        if dt <= dt_floor:
            return out, dt, retries
        if out.min() >= m - slack and out.max() <= M + slack:
            return out, dt, retries
        dt = max(dt / 2, dt_floor)
        retries += 1


def stability_function(tableau: ButcherTableau, z):
    """R(z) = 1 + z b^T (I - zA)^{-1} 1, evaluated by stage recursion."""
    z = np.asarray(z, dtype=complex)
    ks = []
    for i in range(tableau.stages):
        yi = np.ones_like(z)
        for j in range(i):
            yi = yi + tableau.A[i, j] * ks[j]
        ks.append(z * yi)
    out = np.ones_like(z)
    for bi, k in zip(tableau.b, ks):
        out = out + bi * k
    return out


def modified_wavenumber(p: int, k, C: float = 1.0):
    """z = Omega dt for the harmonic mode exp(i k x/h) under upwind L_p, a = 1."""
    k = np.asarray(k, dtype=float)
    _, right = node_stencil_pair(p)
    symbol = sum(c * np.exp(1j * k * o) for c, o in zip(right.weights, right.offsets))
    return -C * symbol * (1 - np.exp(-1j * k))


def eigenvalue_track(p: int, C: float = 1.0, samples: int = 2001):
    k = np.linspace(0.0, np.pi, samples)
    return k, modified_wavenumber(p, k, C)


def max_amplification(tableau: ButcherTableau, p: int, C: float = 1.0, samples: int = 4001) -> float:
    """max over k in [-pi, pi] of |R(z(k))|."""
    k = np.linspace(-np.pi, np.pi, samples)
    return float(np.max(np.abs(stability_function(tableau, modified_wavenumber(p, k, C)))))
