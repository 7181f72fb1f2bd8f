"""High-order finite-volume advection with a priori and a posteriori limiting."""

__version__ = "0.1.0"

from .bench import PROBLEMS, ExperimentPlan, get_problem, initialize
from .diagnostics import RunReport, ViolationTracker, l1_error
from .flux import FluxFunction
from .mesh import BoundaryCondition, CellField, Grid
from .solver import Scheme, SchemeConfig, advance, assemble
from .stencil import conservative_node_stencil, gauss_legendre_rule, gauss_lobatto_rule

__all__ = [
    "PROBLEMS",
    "BoundaryCondition",
    "CellField",
    "ExperimentPlan",
    "FluxFunction",
    "Grid",
    "RunReport",
    "Scheme",
    "SchemeConfig",
    "ViolationTracker",
    "advance",
    "assemble",
    "conservative_node_stencil",
    "gauss_legendre_rule",
    "gauss_lobatto_rule",
    "get_problem",
    "initialize",
    "l1_error",
]
