"""Desk-scale numerical laboratory for a scalar 1D parabolic equation with
nonlocal nonlinear diffusion and delayed feedback: direct and time-rescaled
solvers, comparison envelopes, dissipativity constants and finite-bundle
attractor diagnostics."""

from ._kernels import NUMBA_ENABLED
from .grid import Grid, GridFunction
from .integrator import (
    Trajectory,
    pushforward,
    solve_quasilinear,
    solve_semilinear,
)
from .model import (
    DiffusionLaw,
    Forcing,
    InitialFunction,
    Nonlinearity,
    ProblemSpec,
)

__version__ = "0.1.0"
__all__ = [
    "NUMBA_ENABLED",
    "Grid",
    "GridFunction",
    "Trajectory",
    "pushforward",
    "solve_quasilinear",
    "solve_semilinear",
    "DiffusionLaw",
    "Forcing",
    "InitialFunction",
    "Nonlinearity",
    "ProblemSpec",
    "__version__",
]
