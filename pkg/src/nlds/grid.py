"""Uniform spatial discretization of (0,1) with homogeneous Dirichlet
conditions: grid states, discrete norms, the 3-point Laplacian and its
implicit solve, and the first eigenvalue of the (shifted) operator.

Boundary values are never stored; every operation treats them as exact zeros.
All operations are pure on immutable inputs, so they are safe to call from
concurrent trajectory workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n_interior nodes strictly inside (0,1); dx = 1/(n+1)."""

    n_interior: int

    def __post_init__(self):
        if self.n_interior < 2:
            raise ValueError("n_interior must be >= 2")

    @property
    def dx(self) -> float:
        return 1.0 / (self.n_interior + 1)

    @property
    def x(self) -> np.ndarray:
        """Interior node coordinates (i+1)*dx, i = 0..n_interior-1."""
        return np.arange(1, self.n_interior + 1) * self.dx

    @classmethod
    def from_dx(cls, dx: float) -> "Grid":
        n = round(1.0 / dx) - 1
        if abs((n + 1) * dx - 1.0) > 1e-9:
            raise ValueError(f"dx = {dx} does not evenly divide (0,1)")
        return cls(n)


@dataclass(frozen=True)
class GridFunction:
    """Interior values of a state on a Grid; boundary values are implicit zeros."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_interior,):
            raise ValueError(
                f"values length {v.shape} != n_interior {self.grid.n_interior}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_interior))

    @classmethod
    def from_callable(cls, grid: Grid, func) -> "GridFunction":
        return cls(grid, np.asarray(func(grid.x), dtype=float))


def laplacian_apply(u: GridFunction) -> GridFunction:
    """Second central difference (u_{i-1} - 2 u_i + u_{i+1})/dx^2 with zero
    boundary values."""
    v = u.values
    dx = u.grid.dx
    out = np.empty_like(v)
    out[:] = -2.0 * v
    out[1:] += v[:-1]
    out[:-1] += v[1:]
    out /= dx * dx
    return GridFunction(u.grid, out)


def implicit_diffusion_step(u: GridFunction, coeff: float, dt: float) -> GridFunction:
    """Solve (I - dt*coeff*D_h) v = u by direct tridiagonal elimination.

    The matrix is strictly diagonally dominant for any coeff, dt > 0, so the
    solve is exact (no iterative tolerance) and v is unique.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if coeff <= 0.0:
        raise ValueError("coeff must be positive")
    n = u.grid.n_interior
    out = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    r = dt * coeff / (u.grid.dx ** 2)
    _kernels.implicit_heat_solve(u.values, r, out, cp, dp)
    return GridFunction(u.grid, out)


def norms(u: GridFunction) -> tuple[float, float, float]:
    """(l2, h10, linf) with the boundary zeros included in the h10 sum."""
    v = u.values
    dx = u.grid.dx
    l2 = float(np.sqrt(np.sum(v * v) * dx))
    d = np.diff(v, prepend=0.0, append=0.0)
    h10 = float(np.sqrt(np.sum(d * d) / dx))
    linf = float(np.max(np.abs(v))) if v.size else 0.0
    return l2, h10, linf


def discrete_first_eigenvalue(grid: Grid, shift: float = 0.0) -> float:
    """First eigenvalue of -D_h + shift*I: (4/dx^2) sin^2(pi dx / 2) + shift."""
    dx = grid.dx
    return float(4.0 / dx ** 2 * np.sin(np.pi * dx / 2.0) ** 2 + shift)


def continuum_first_eigenvalue(shift: float = 0.0) -> float:
    """Continuum counterpart pi^2 + shift (Dirichlet Laplacian on (0,1))."""
    return float(np.pi ** 2 + shift)


def tridiag_shifted_solve(grid: Grid, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (-D_h + shift*I) theta = rhs, zero boundary values, shift >= 0."""
    if shift < 0.0:
        raise ValueError("shift must be nonnegative")
    n = grid.n_interior
    dx2 = grid.dx ** 2
    out = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    _kernels.tridiag_const_solve(
        -1.0 / dx2, 2.0 / dx2 + shift, np.asarray(rhs, dtype=float), out, cp, dp
    )
    return out
