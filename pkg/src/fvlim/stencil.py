"""Conservative reconstruction stencils and quadrature rules on the reference cell.

All stencils are generated rather than tabulated. Rational evaluation points
give exact ``Fraction`` coefficients; irrational points (Gauss nodes) are
handled with 40-digit ``mpmath`` arithmetic and rounded to float64 once.

Reference-cell coordinates run over [-1/2, 1/2] with unit cell width, so a
stencil offset ``k`` refers to the cell centred at ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import mpmath
import numpy as np

MP_DPS = 40

Number = Union[Fraction, int, "mpmath.mpf"]


@dataclass(frozen=True)
class Stencil:
    """Linear combination ``sum_k coefficients[k] * q[start + k]``."""

    coefficients: tuple
    start: int
    target: str = ""
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "weights", np.array([float(c) for c in self.coefficients])
        )

    @property
    def offsets(self) -> range:
        return range(self.start, self.start + len(self.coefficients))

    @property
    def reach(self) -> int:
        return max(abs(self.start), abs(self.start + len(self.coefficients) - 1))

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (Fraction, int)) for c in self.coefficients)

    def reversed(self) -> "Stencil":
        """Mirror image about offset 0 (left node stencil -> right node stencil)."""
        n = len(self.coefficients)
        target = self.target
        if target.startswith("P(") and target.endswith(")"):
            arg = target[2:-1]
            target = f"P({arg[1:]})" if arg.startswith("-") else f"P(-{arg})"
        return Stencil(tuple(reversed(self.coefficients)), -(self.start + n - 1), target)

    def apply(self, values: Sequence[float]) -> float:
        """Apply to a sequence indexed so that offset 0 is the middle entry."""
        values = list(values)
        mid = len(values) // 2
        return sum(c * values[mid + k] for c, k in zip(self.coefficients, self.offsets))

    def __str__(self) -> str:
        terms = [f"{c}*q[{k:+d}]" for c, k in zip(self.coefficients, self.offsets)]
        return " + ".join(terms)


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    kind: str
    mp_points: tuple = field(default=(), repr=False, compare=False)
    mp_weights: tuple = field(default=(), repr=False, compare=False)

    def __len__(self):
        return len(self.points)


def _trim(coeffs: list, start: int):
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        start += 1
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs, start


def _to_field(x):
    """Coerce the evaluation point into Fraction (exact) or mpf (irrational)."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x), Fraction
    if isinstance(x, mpmath.mpf):
        if mpmath.isint(x * 2**10):
            return Fraction(int(x * 2**10), 2**10), Fraction
        return x, mpmath.mpf
    if isinstance(x, str):
        return Fraction(x), Fraction
    if isinstance(x, float):
        frac = Fraction(x)
        if frac.denominator <= 2**10:
            return frac, Fraction
        with mpmath.workdps(MP_DPS):
            return mpmath.mpf(x), mpmath.mpf
    raise TypeError(f"unsupported evaluation point {x!r}")


def _lagrange_derivative(nodes: list, k: int, x):
    """d/dx of the k-th Lagrange basis polynomial over ``nodes`` at ``x``.

    Product form, so it stays valid when ``x`` coincides with a node.
    """
    xk = nodes[k]
    total = 0
    for m, xm in enumerate(nodes):
        if m == k:
            continue
        term = 1 / (xk - xm)
        for l, xl in enumerate(nodes):
            if l != k and l != m:
                term = term * (x - xl) / (xk - xl)
        total = total + term
    return total


def _biased_node_stencil(first: int, last: int, x, num) -> dict:
    """Conservative reconstruction over cells ``first..last`` evaluated at ``x``.

    The primitive V(xi) = integral of u is interpolated at the p+2 cell edges;
    the reconstruction is V'. The weight of cell j collects the derivatives of
    every basis polynomial attached to an edge to the right of cell j.
    """
    half = num(1) / 2
    edges = [num(first + e) - half for e in range(last - first + 2)]
    dl = [_lagrange_derivative(edges, k, x) for k in range(len(edges))]
    out = {}
    for j in range(last - first + 1):
        out[first + j] = sum(dl[j + 1:], num(0))
    return out


def _kernels(p: int):
    if p % 2 == 0:
        return [(-p // 2, p // 2)]
    r = (p + 1) // 2
    return [(-r, r - 1), (-(r - 1), r)]


def _average_kernels(builder, p):
    acc: dict = {}
    kernels = _kernels(p)
    for first, last in kernels:
        for k, c in builder(first, last).items():
            acc[k] = acc.get(k, 0) + c
    lo, hi = min(acc), max(acc)
    coeffs = [acc.get(k, 0) / len(kernels) for k in range(lo, hi + 1)]
    return _trim(coeffs, lo)


def conservative_node_stencil(p: int, x_eval=Fraction(-1, 2)) -> Stencil:
    """Weights giving P_i(x_eval) from the cell averages around cell i.

    Even ``p`` uses the centred (p+1)-cell kernel; odd ``p`` averages the
    left- and right-biased kernels of p+1 cells each.
    """
    if p < 0:
        raise ValueError("degree must be non-negative")
    with mpmath.workdps(MP_DPS):
        x, num = _to_field(x_eval)
    # 0, Fraction(0) and mpf(0) hash alike, so the number kind is part of the key
    return _cached_node_stencil(int(p), x, num is Fraction, str(x_eval))


@lru_cache(maxsize=None)
def _cached_node_stencil(p: int, x, exact: bool, label: str) -> Stencil:
    num = Fraction if exact else mpmath.mpf
    with mpmath.workdps(MP_DPS):
        if not (-num(1) / 2 <= x <= num(1) / 2):
            raise ValueError(f"evaluation point {label} outside the reference cell")
        coeffs, start = _average_kernels(
            lambda a, b: _biased_node_stencil(a, b, x, num), p
        )
        if num is mpmath.mpf:
            coeffs = [+c for c in coeffs]
    return Stencil(tuple(coeffs), start, target=f"P({label})")


def midpoint_stencil(p: int) -> Stencil:
    """Cell-centre value of the conservative reconstruction."""
    return conservative_node_stencil(p, Fraction(0))


def _integrate_lagrange(nodes: list, k: int) -> Fraction:
    """Integral over [-1/2, 1/2] of the k-th Lagrange basis polynomial."""
    poly = [Fraction(1)]  # coefficients, lowest degree first
    denom = Fraction(1)
    for m, xm in enumerate(nodes):
        if m == k:
            continue
        poly = [Fraction(0)] + poly
        for d in range(len(poly) - 1):
            poly[d] -= xm * poly[d + 1]
        denom *= nodes[k] - xm
    half = Fraction(1, 2)
    total = sum(c * (half ** (d + 1) - (-half) ** (d + 1)) / (d + 1) for d, c in enumerate(poly))
    return total / denom


@lru_cache(maxsize=None)
def transverse_integral_stencil(p: int) -> Stencil:
    """Face average from point values at transversely neighbouring face midpoints."""
    if p < 0:
        raise ValueError("degree must be non-negative")

    def builder(first, last):
        nodes = [Fraction(k) for k in range(first, last + 1)]
        return {first + k: _integrate_lagrange(nodes, k) for k in range(len(nodes))}

    # point interpolation on p+1 nodes, same kernel layout as the reconstruction
    kernels = _kernels(p)
    acc: dict = {}
    for first, last in kernels:
        for k, c in builder(first, last).items():
            acc[k] = acc.get(k, 0) + c
    lo, hi = min(acc), max(acc)
    coeffs, start = _trim([acc.get(k, 0) / len(kernels) for k in range(lo, hi + 1)], lo)
    return Stencil(tuple(coeffs), start, target="face-integral")


def _legendre_nodes(n: int):
    """Roots of P_n on [-1, 1], refined to MP_DPS digits from numpy seeds."""
    seeds, _ = np.polynomial.legendre.leggauss(n)
    roots = []
    for s in seeds:
        r = mpmath.findroot(lambda t: mpmath.legendre(n, t), mpmath.mpf(float(s)))
        roots.append(r)
    return roots


def _lobatto_interior(L: int):
    """Roots of P'_{L-1} on (-1, 1)."""
    n = L - 1
    if n < 2:
        return []
    seeds = np.polynomial.legendre.Legendre.basis(n).deriv().roots()
    return [
        mpmath.findroot(lambda t: mpmath.diff(lambda s: mpmath.legendre(n, s), t), mpmath.mpf(float(s)))
        for s in np.sort(seeds.real)
    ]


def legendre_points(p: int) -> int:
    """Smallest K with 2K - 1 >= p."""
    return max(1, (p + 2) // 2)


def lobatto_points(p: int) -> int:
    """Smallest L >= 2 with 2L - 3 >= p."""
    return max(2, (p + 4) // 2)


@lru_cache(maxsize=None)
def gauss_legendre_rule(p: int) -> QuadratureRule:
    """K-point Gauss-Legendre rule on [-1/2, 1/2], weights normalised to sum 1."""
    K = legendre_points(p)
    with mpmath.workdps(MP_DPS):
        nodes = _legendre_nodes(K)
        pts, wts = [], []
        for t in nodes:
            dp = mpmath.diff(lambda s: mpmath.legendre(K, s), t)
            w = 2 / ((1 - t**2) * dp**2)
            pts.append(t / 2)
            wts.append(w / 2)
        order = sorted(range(K), key=lambda i: pts[i])
        pts = [pts[i] for i in order]
        wts = [wts[i] for i in order]
        # symmetrise so that mirrored nodes are bit-identical
        pts = [(pts[i] - pts[K - 1 - i]) / 2 for i in range(K)]
        wts = [(wts[i] + wts[K - 1 - i]) / 2 for i in range(K)]
    return QuadratureRule(
        np.array([float(x) for x in pts]),
        np.array([float(w) for w in wts]),
        "gauss_legendre",
        tuple(pts),
        tuple(wts),
    )


@lru_cache(maxsize=None)
def gauss_lobatto_rule(p: int) -> tuple[QuadratureRule, Fraction]:
    """L-point Gauss-Lobatto rule on [-1/2, 1/2] and the reduced CFL factor.

    The endpoint weight 1/(L(L-1)) is the smallest Lobatto weight, so the
    reduced CFL factor is returned as that exact fraction.
    """
    L = lobatto_points(p)
    n = L - 1
    with mpmath.workdps(MP_DPS):
        nodes = [mpmath.mpf(-1)] + _lobatto_interior(L) + [mpmath.mpf(1)]
        pts, wts = [], []
        for t in nodes:
            w = mpmath.mpf(2) / (n * (n + 1) * mpmath.legendre(n, t) ** 2)
            pts.append(t / 2)
            wts.append(w / 2)
        pts = [(pts[i] - pts[L - 1 - i]) / 2 for i in range(L)]
        wts = [(wts[i] + wts[L - 1 - i]) / 2 for i in range(L)]
        exact_pts = tuple(_exact_if_rational(x) for x in pts)
    rule = QuadratureRule(
        np.array([float(x) for x in pts]),
        np.array([float(w) for w in wts]),
        "gauss_lobatto",
        exact_pts,
        tuple(wts),
    )
    return rule, Fraction(1, L * (L - 1))


def _exact_if_rational(x):
    frac = Fraction(float(x)).limit_denominator(64)
    with mpmath.workdps(MP_DPS):
        if abs(mpmath.mpf(frac.numerator) / frac.denominator - x) < mpmath.mpf(10) ** (-MP_DPS + 5):
            return frac
    return x


def node_stencil_pair(p: int) -> tuple[Stencil, Stencil]:
    """(left-face, right-face) reconstruction stencils."""
    left = conservative_node_stencil(p, Fraction(-1, 2))
    return left, left.reversed()


def dump_stencils(p_max: int = 7) -> str:
    """Human-readable listing of every generated stencil as exact fractions."""
    lines = []
    for p in range(p_max + 1):
        lines.append(f"p={p}")
        left, right = node_stencil_pair(p)
        lines.append(f"  left node : {left}")
        lines.append(f"  right node: {right}")
        lines.append(f"  midpoint  : {midpoint_stencil(p)}")
        lines.append(f"  transverse: {transverse_integral_stencil(p)}")
        gl = gauss_legendre_rule(p)
        lines.append(f"  gauss-legendre points {gl.points.tolist()} weights {gl.weights.tolist()}")
        lob, cmpp = gauss_lobatto_rule(p)
        lines.append(f"  gauss-lobatto points {lob.points.tolist()} C_MPP={cmpp}")
    return "\n".join(lines)
