"""Dissipativity machinery: the sign condition on u*f(u), the smallness
condition linking decay rate, delay and coupling, the absorbing radius, the
steady pointwise envelope theta, and checks of trajectories against them.

Conventions: the decay rate is omega = pi^2 + C0 (continuum first eigenvalue
of -d^2/dx^2 + C0, with the discrete counterpart reported alongside). Both
variants of the smallness condition are computed,

  stated:        exp(-omega rho / m) + gamma/(omega m) < 1
  conservative:  exp(-omega rho / M) + gamma/(omega m) < 1,

and the absorbing machinery keys off the conservative one: the rescaled delay
step can be as short as rho/M, so exp(-omega rho/M) is the per-step
contraction the estimate actually delivers. The constant C1* is computed in
both flavors (gamma K/M + C1 and gamma K/m + C1); theta uses the conservative
one (divide by m)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Grid,
    GridFunction,
    continuum_first_eigenvalue,
    discrete_first_eigenvalue,
    tridiag_shifted_solve,
)
from .integrator import Trajectory
from .model import ProblemSpec


class AbsorbingRadiusUnavailable(ValueError):
    """The conservative smallness condition fails; no finite radius from this
    estimate."""


@dataclass
class DissipativityReport:
    omega: float
    omega_discrete: float
    c0: float
    c1: float
    s_holds: bool
    s_margin: float
    s_witness: float
    d_lhs: float
    d_lhs_conservative: float
    d_holds: bool
    d_holds_conservative: bool
    k_abs: float | None = None
    c1_star_pair: tuple[float, float] | None = None
    theta: GridFunction | None = field(default=None, repr=False)
    s_margin_absorbing_range: float | None = None
    diagnostics: list[str] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        doc = {
            "omega": self.omega,
            "omega_discrete": self.omega_discrete,
            "c0": self.c0,
            "c1": self.c1,
            "s_holds": self.s_holds,
            "s_margin": self.s_margin,
            "s_witness": self.s_witness,
            "d_lhs": self.d_lhs,
            "d_lhs_conservative": self.d_lhs_conservative,
            "d_holds": self.d_holds,
            "d_holds_conservative": self.d_holds_conservative,
            "k_abs": self.k_abs,
            "c1_star_pair": list(self.c1_star_pair) if self.c1_star_pair else None,
            "s_margin_absorbing_range": self.s_margin_absorbing_range,
            "diagnostics": self.diagnostics,
        }
        if self.theta is not None:
            doc["theta_max"] = float(np.max(self.theta.values))
        return doc


def check_S(
    spec: ProblemSpec,
    c0: float,
    c1: float,
    scan: tuple[float, float, int] = (-1e3, 1e3, 2_000_001),
) -> tuple[bool, float, float]:
    """Dense scan of u f(u) + nu C0 u^2 - C1 |u| over both nu = m/lam, M/lam.

    Returns (holds, worst_margin, witness): holds iff the scan max is <= 0;
    witness is the maximizing u.
    """
    lo, hi, num = scan
    u = np.linspace(lo, hi, num)
    fu = spec.f(u)
    worst = -np.inf
    witness = 0.0
    for nu in (spec.m / spec.lam, spec.big_m / spec.lam):
        vals = u * fu + nu * c0 * u ** 2 - c1 * np.abs(u)
        i = int(np.argmax(vals))
        if vals[i] > worst:
            worst = float(vals[i])
            witness = float(u[i])
    return worst <= 0.0, worst, witness


def check_D(spec: ProblemSpec, c0: float, c1: float | None = None,
            grid: Grid | None = None) -> DissipativityReport:
    """Evaluate both variants of the smallness condition for the given C0."""
    omega = continuum_first_eigenvalue(c0)
    g = grid if grid is not None else spec.phi.grid
    omega_h = discrete_first_eigenvalue(g, c0)
    diags: list[str] = []
    if omega <= 0.0:
        diags.append(
            f"omega = pi^2 + C0 = {omega:.6g} <= 0: no exponential decay"
        )
        return DissipativityReport(
            omega, omega_h, c0, c1 if c1 is not None else float("nan"),
            False, float("inf"), 0.0,
            float("inf"), float("inf"), False, False, diagnostics=diags,
        )
    if c1 is None:
        from .model import StructuralConstants

        c1 = StructuralConstants.for_spec(spec, c0).c1
    holds, margin, witness = check_S(spec, c0, c1)
    lhs_stated = float(np.exp(-omega * spec.rho / spec.m) + spec.gamma / (omega * spec.m))
    lhs_conservative = float(
        np.exp(-omega * spec.rho / spec.big_m) + spec.gamma / (omega * spec.m)
    )
    return DissipativityReport(
        omega, omega_h, c0, float(c1), holds, margin, witness,
        lhs_stated, lhs_conservative, lhs_stated < 1.0, lhs_conservative < 1.0,
        diagnostics=diags,
    )


def compute_K_abs(
    c1: float, omega: float, rho: float, gamma: float, m: float, big_m: float,
    margin: float = 0.01,
) -> float:
    """Absorbing radius: smallest K (plus 1% slack) with
    exp(-omega rho/M) K + (gamma K/m + C1)/omega < K, using the worst-case
    C1* = gamma K/m + C1."""
    if omega <= 0.0:
        raise AbsorbingRadiusUnavailable("omega must be positive")
    denom = 1.0 - float(np.exp(-omega * rho / big_m)) - gamma / (m * omega)
    if denom <= 0.0:
        raise AbsorbingRadiusUnavailable(
            "conservative smallness condition fails: "
            f"exp(-omega rho/M) + gamma/(m omega) = {1.0 - denom:.6g} >= 1"
        )
    return float((c1 / omega) / denom * (1.0 + margin))


def c1_star_pair(c1: float, gamma: float, k: float, m: float, big_m: float
                 ) -> tuple[float, float]:
    """(gamma K/M + C1, gamma K/m + C1): both flavors, conservative second."""
    return (gamma * k / big_m + c1, gamma * k / m + c1)


def solve_theta(c0: float, c1_star: float, grid: Grid) -> GridFunction:
    """Discrete steady envelope: (-D_h + C0) theta = C1*, zero boundary.

    The closed form (closed_form_theta) is the test oracle; the discrete
    solution is returned. theta >= 0 because the system matrix is an
    M-matrix with a nonnegative right-hand side.
    """
    if c0 < 0.0:
        raise ValueError("C0 must be nonnegative")
    rhs = np.full(grid.n_interior, float(c1_star))
    vals = tridiag_shifted_solve(grid, c0, rhs)
    # guard against sign bugs; exact nonnegativity is structural
    if c1_star >= 0.0 and np.min(vals) < -1e-12 * max(1.0, abs(c1_star)):
        raise AssertionError("theta solve produced negative values")
    return GridFunction(grid, vals)


def closed_form_theta(c0: float, c1_star: float, x: np.ndarray) -> np.ndarray:
    """Exact steady envelope on (0,1): for C0 > 0
    (C1*/C0) (1 - cosh(sqrt(C0)(x - 1/2)) / cosh(sqrt(C0)/2)), and the
    parabola C1* x (1-x)/2 for C0 = 0."""
    x = np.asarray(x, dtype=float)
    if c0 == 0.0:
        return c1_star * x * (1.0 - x) / 2.0
    r = np.sqrt(c0)
    return (c1_star / c0) * (1.0 - np.cosh(r * (x - 0.5)) / np.cosh(r / 2.0))


def check_theta_bound(
    traj: Trajectory, theta: GridFunction, phi_inside: bool,
    tail_fraction: float = 0.2,
) -> tuple[float, float | None]:
    """Max of |u| - theta over all stamps (phi_inside) or over the trailing
    tail_fraction of stamps (the finite limsup surrogate). Returns
    (max_violation, first stamp where a positive violation occurs or None).
    """
    th = theta.values
    if phi_inside:
        sl = slice(None)
        stamps = traj.stamps
    else:
        k0 = int(np.floor(traj.n_stamps * (1.0 - tail_fraction)))
        sl = slice(k0, None)
        stamps = traj.stamps[sl]
    excess = np.abs(traj.states[sl]) - th[None, :]
    per_stamp = np.max(excess, axis=1)
    max_v = float(np.max(per_stamp, initial=-np.inf))
    first = None
    pos = np.flatnonzero(per_stamp > 0.0)
    if pos.size:
        first = float(stamps[pos[0]])
    return max_v, first


def absorbing_norm_bounds(
    traj: Trajectory, report
) -> dict:
    """First stamps after which linf <= k_abs (and h10 <= its post-entry sup)
    hold for all remaining stamps; reports non-entry instead of crashing.
    report may be a DissipativityReport or a bare radius."""
    k_abs = float(report.k_abs if isinstance(report, DissipativityReport)
                  else report)
    n = traj.norms()
    linf = n["linf"]
    h10 = n["h10"]
    inside = linf <= k_abs
    # last index from which the tail is entirely inside
    entry_idx = None
    run_ok = True
    for i in range(traj.n_stamps - 1, -1, -1):
        run_ok = run_ok and bool(inside[i])
        if not run_ok:
            break
        entry_idx = i
    if entry_idx is None:
        return {"entered": False, "t_entry_linf": None, "t_entry_h10": None,
                "k_h10": None}
    k_h10 = float(np.max(h10[entry_idx:]))
    h_ok = h10 <= k_h10 + 1e-15
    h_entry = entry_idx
    while h_entry > 0 and h_ok[h_entry - 1]:
        h_entry -= 1
    return {
        "entered": True,
        "t_entry_linf": float(traj.stamps[entry_idx]),
        "t_entry_h10": float(traj.stamps[h_entry]),
        "k_h10": k_h10,
    }


def full_report(
    spec: ProblemSpec, c0: float, c1: float | None = None,
    grid: Grid | None = None,
) -> DissipativityReport:
    """Conditions plus absorbing radius and steady envelope when available."""
    rep = check_D(spec, c0, c1, grid)
    g = grid if grid is not None else spec.phi.grid
    if rep.omega > 0.0 and rep.d_holds_conservative:
        k = compute_K_abs(rep.c1, rep.omega, spec.rho, spec.gamma, spec.m,
                          spec.big_m)
        pair = c1_star_pair(rep.c1, spec.gamma, k, spec.m, spec.big_m)
        rep.k_abs = k
        rep.c1_star_pair = pair
        rep.theta = solve_theta(c0, pair[1], g)
        if k > 0.0:
            # once the absorbing radius is known, the sign condition is also
            # re-scanned on the range the dynamics actually inhabit
            _, rep.s_margin_absorbing_range, _ = check_S(
                spec, c0, rep.c1, (-10.0 * k, 10.0 * k, 200_001)
            )
    else:
        rep.diagnostics.append(
            "conservative smallness condition fails; no absorbing radius/theta"
        )
    return rep
