"""Finite difference-quadrature solver for the porous medium equation with
nonlocal pressure, via its integrated (cumulative) form in one dimension."""

from fpme.oplib import (
    AmReport,
    WeightTable,
    apply_lap,
    apply_lap_grid,
    build_weights,
    check_Ac,
    check_Am,
)
from fpme.scheme import (
    CFL1,
    CFL2,
    CflViolationError,
    GridSpec,
    ProblemSpec,
    TimeSpec,
    Trajectory,
    VField,
    cfl_tau,
    evolve,
    make_time_grid,
    quasilinear_op,
    step,
    upwind_gradient,
)
from fpme.density import UField, cumulative, differentiate, mass, sup_norm, tail_mass

__version__ = "0.1.0"

__all__ = [
    "AmReport",
    "CFL1",
    "CFL2",
    "CflViolationError",
    "GridSpec",
    "ProblemSpec",
    "TimeSpec",
    "Trajectory",
    "UField",
    "VField",
    "WeightTable",
    "apply_lap",
    "apply_lap_grid",
    "build_weights",
    "cfl_tau",
    "check_Ac",
    "check_Am",
    "cumulative",
    "differentiate",
    "evolve",
    "make_time_grid",
    "mass",
    "quasilinear_op",
    "step",
    "sup_norm",
    "tail_mass",
    "upwind_gradient",
    "__version__",
]
