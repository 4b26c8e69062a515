"""The two delay-PDE solvers and their shared history machinery.

solve_quasilinear marches the tau-time problem
    w_tau = a(l(w)) w_xx + lam f(w) + gamma w(tau - rho) + h(tau)
with one linearly implicit step per dtau: diffusion with the frozen nonlocal
coefficient a(l(w^n)) is implicit (one tridiagonal solve), reaction, delay and
forcing explicit. History is recorded every step, so the step boundaries
n*rho of the classical iterative construction need no special handling.

solve_semilinear marches the same dynamics on the rescaled clock
tau = alpha(t), alpha' = a(l(u)), as
    u_t = a^2 u_xx + a (lam f(u) + gamma u_hist(alpha(t) - rho) + h(alpha(t)))
recording history in tau-stamps so the delayed lookup is uniform across step
intervals. pushforward(u, alpha) then reproduces the tau-time solution.

One trajectory = one worker; nothing here shares mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import Grid, GridFunction
from .model import InitialFunction, ProblemSpec, eval_diffusion, validate_spec
from .timechange import TimeChange, TimeRangeError, invert_alpha

BLOWUP_LIMIT = 1e6


class BlowUpError(RuntimeError):
    """Solution escaped the guard threshold; carries location and size."""

    def __init__(self, stamp: float, linf: float):
        super().__init__(f"blow-up at stamp {stamp:.6g}: linf = {linf:.3g}")
        self.stamp = stamp
        self.linf = linf


class SpecInvalidError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class HistoryBuffer:
    """tau-stamped record of past states supporting interpolated lookup.

    Strictly increasing stamps; covers [stamps[0], stamps[-1]] with no gap
    larger than the recording step. Entries older than the delay window can
    be evicted once no lookup can reach them.
    """

    grid: Grid
    stamps: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.stamps = np.asarray(self.stamps, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if np.any(np.diff(self.stamps) <= 0.0):
            raise ValueError("history stamps must be strictly increasing")
        if self.states.shape != (self.stamps.size, self.grid.n_interior):
            raise ValueError("states shape mismatch")

    @classmethod
    def from_initial(cls, phi: InitialFunction) -> "HistoryBuffer":
        return cls(phi.grid, phi.sigma.copy(), phi.samples.copy())

    def append(self, stamp: float, state: GridFunction) -> None:
        if stamp <= self.stamps[-1]:
            raise ValueError("appended stamp must increase")
        self.stamps = np.append(self.stamps, stamp)
        self.states = np.vstack([self.states, state.values])

    def evict_before(self, tau: float) -> None:
        """Drop entries strictly older than tau, keeping the bracketing one."""
        keep = int(np.searchsorted(self.stamps, tau, side="right"))
        keep = max(keep - 1, 0)
        self.stamps = self.stamps[keep:]
        self.states = self.states[keep:]

    def eval(self, tau: float) -> GridFunction:
        if tau < self.stamps[0] - 1e-12 or tau > self.stamps[-1] + 1e-12:
            raise TimeRangeError(
                f"history query {tau} outside covered "
                f"[{self.stamps[0]}, {self.stamps[-1]}]"
            )
        out = np.empty(self.grid.n_interior)
        _kernels.interp_nonuniform(
            tau, self.stamps, self.states, self.stamps.size - 1, out
        )
        return GridFunction(self.grid, out)


def history_eval(buf: HistoryBuffer, tau: float) -> GridFunction:
    """Linear interpolation between bracketing entries; exact at stamps."""
    return buf.eval(tau)


@dataclass
class Trajectory:
    """Stamps, states and per-stamp diagnostics of one solver run."""

    grid: Grid
    stamps: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)  # (n_stamps, n_interior)
    coeffs: np.ndarray = field(repr=False)  # diffusion coefficient used
    time_label: str = "tau"

    def __post_init__(self):
        if np.any(np.diff(self.stamps) <= 0.0):
            raise ValueError("trajectory stamps must be strictly increasing")

    @property
    def n_stamps(self) -> int:
        return self.stamps.size

    def state(self, k: int) -> GridFunction:
        return GridFunction(self.grid, self.states[k].copy())

    def final(self) -> GridFunction:
        return self.state(self.n_stamps - 1)

    def norms(self) -> dict[str, np.ndarray]:
        dx = self.grid.dx
        l2 = np.sqrt(np.sum(self.states ** 2, axis=1) * dx)
        d = np.diff(self.states, axis=1)
        h10 = np.sqrt(
            (self.states[:, 0] ** 2 + np.sum(d ** 2, axis=1) + self.states[:, -1] ** 2)
            / dx
        )
        linf = np.max(np.abs(self.states), axis=1)
        return {"l2": l2, "h10": h10, "linf": linf}

    def interp_state(self, stamp: float) -> np.ndarray:
        out = np.empty(self.grid.n_interior)
        _kernels.interp_nonuniform(
            stamp, self.stamps, self.states, self.stamps.size - 1, out
        )
        return out

    def thin(self, every: int) -> "Trajectory":
        idx = np.arange(0, self.n_stamps, every)
        if idx[-1] != self.n_stamps - 1:
            idx = np.append(idx, self.n_stamps - 1)
        return Trajectory(
            self.grid, self.stamps[idx].copy(), self.states[idx].copy(),
            self.coeffs[idx].copy(), self.time_label,
        )

    def summary_jsonable(self) -> dict:
        n = self.norms()
        return {
            "time_label": self.time_label,
            "stamps": [float(s) for s in self.stamps],
            "l2": [float(v) for v in n["l2"]],
            "h10": [float(v) for v in n["h10"]],
            "linf": [float(v) for v in n["linf"]],
            "coeff": [float(c) for c in self.coeffs],
        }


def _spec_kernel_args(spec: ProblemSpec) -> tuple:
    p0, p1 = spec.a.params
    return (
        spec.f.code, spec.f.param, spec.a.code, p0, p1,
        spec.m, spec.big_m, spec.l_code, spec.h.code, spec.h.param,
    )


def step_quasilinear(
    state: GridFunction,
    buf: HistoryBuffer,
    spec: ProblemSpec,
    tau: float,
    dtau: float,
) -> GridFunction:
    """One linearly implicit tau-step using the buffer for the delayed term."""
    if dtau <= 0.0:
        raise ValueError("dtau must be positive")
    c = eval_diffusion(spec, state)
    wd = history_eval(buf, tau - spec.rho)
    n = state.grid.n_interior
    out = np.empty(n)
    fu = np.empty(n)
    rhs = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    hval = spec.h.param if spec.h.code == _kernels.H_CONSTANT else 0.0
    _kernels.step_quasilinear_inplace(
        state.values, wd.values, dtau, state.grid.dx, spec.lam, spec.gamma, c,
        spec.f.code, spec.f.param, hval, out, fu, rhs, cp, dp,
    )
    if not np.all(np.isfinite(out)) or np.max(np.abs(out)) > BLOWUP_LIMIT:
        raise BlowUpError(tau + dtau, float(np.max(np.abs(state.values))))
    return GridFunction(state.grid, out)


def _require_valid(spec: ProblemSpec) -> None:
    diags = validate_spec(spec)
    if diags:
        raise SpecInvalidError(diags)


def solve_quasilinear(
    spec: ProblemSpec, T: float, dtau: float, check: bool = True
) -> Trajectory:
    """Seed history from phi, march to tau = T, record every state."""
    if check:
        _require_valid(spec)
    if T <= 0.0 or dtau <= 0.0:
        raise ValueError("T and dtau must be positive")
    phi = spec.phi
    grid = phi.grid
    n_steps = int(round(T / dtau))
    states = np.empty((n_steps + 1, grid.n_interior))
    coeffs = np.empty(n_steps + 1)
    states[0] = phi.samples[-1]
    status, last = _kernels.run_quasilinear(
        phi.samples, -phi.rho, phi.dsigma,
        n_steps, dtau, grid.dx, spec.lam, spec.gamma, spec.rho,
        *_spec_kernel_args(spec), BLOWUP_LIMIT,
        states, coeffs,
    )
    if status == _kernels.STATUS_BLOWUP:
        raise BlowUpError(last * dtau, float(np.nanmax(np.abs(states[last]))))
    stamps = np.arange(n_steps + 1) * dtau
    return Trajectory(grid, stamps, states, coeffs, "tau")


def solve_semilinear(
    spec: ProblemSpec,
    T_t: float,
    dt: float,
    tau_stop: float = np.inf,
    ds: float = 1e-5,
    check: bool = True,
) -> tuple[Trajectory, TimeChange, float]:
    """Run the rescaled solver up to t = T_t (or until alpha reaches tau_stop).

    Returns (trajectory in t, forward TimeChange on [0, t_end], t_start),
    where t_start = alpha^{-1}(-rho) reported by the initial-segment map.
    """
    if check:
        _require_valid(spec)
    if T_t <= 0.0 or dt <= 0.0:
        raise ValueError("T_t and dt must be positive")
    from .timechange import compute_alpha0

    t_start, _ = compute_alpha0(spec.phi, spec, ds)
    phi = spec.phi
    grid = phi.grid
    n_max = int(round(T_t / dt))
    states = np.empty((n_max + 1, grid.n_interior))
    alphas = np.empty(n_max + 1)
    coeffs = np.empty(n_max + 1)
    states[0] = phi.samples[-1]
    status, last = _kernels.run_semilinear(
        phi.samples, -phi.rho, phi.dsigma,
        n_max, dt, grid.dx, tau_stop, spec.lam, spec.gamma, spec.rho,
        *_spec_kernel_args(spec), BLOWUP_LIMIT,
        states, alphas, coeffs,
    )
    if status == _kernels.STATUS_BLOWUP:
        raise BlowUpError(last * dt, float(np.nanmax(np.abs(states[last]))))
    stamps = np.arange(last + 1) * dt
    traj = Trajectory(grid, stamps, states[: last + 1], coeffs[: last + 1], "t")
    tc = TimeChange(stamps.copy(), alphas[: last + 1].copy())
    return traj, tc, t_start


def pushforward(
    traj_t: Trajectory, tc: TimeChange, tau_grid: np.ndarray
) -> Trajectory:
    """Restamp the t-trajectory onto tau via w(tau) = u(alpha^{-1}(tau)),
    linear interpolation between t-stamps."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    t_of_tau = invert_alpha(tc, tau_grid)
    lo, hi = traj_t.stamps[0], traj_t.stamps[-1]
    if np.any(t_of_tau < lo - 1e-9) or np.any(t_of_tau > hi + 1e-9):
        raise TimeRangeError("tau grid maps outside the computed t range")
    idx = np.clip(
        np.searchsorted(traj_t.stamps, t_of_tau, side="right") - 1,
        0, traj_t.n_stamps - 2,
    )
    span = traj_t.stamps[idx + 1] - traj_t.stamps[idx]
    w = np.clip((t_of_tau - traj_t.stamps[idx]) / span, 0.0, 1.0)
    states = (1.0 - w)[:, None] * traj_t.states[idx] + w[:, None] * traj_t.states[
        idx + 1
    ]
    coeffs = (1.0 - w) * traj_t.coeffs[idx] + w * traj_t.coeffs[idx + 1]
    return Trajectory(traj_t.grid, tau_grid.copy(), states, coeffs, "tau")


def _sine_basis(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of the discrete Laplacian: modes sin(k pi x_i)
    with eigenvalues -(4/dx^2) sin^2(k pi dx / 2)."""
    n = grid.n_interior
    k = np.arange(1, n + 1)
    basis = np.sin(np.outer(k, grid.x) * np.pi)  # (mode, node)
    mu = 4.0 / grid.dx ** 2 * np.sin(k * np.pi * grid.dx / 2.0) ** 2
    return basis, mu


def concatenation_check(
    traj: Trajectory, spec: ProblemSpec, tc: TimeChange | None, t_probe: float
) -> float:
    """l2 residual of the mild-solution identity at t_probe:

        u(t) - [ exp(t D_h) phi(0)
                 + sum_n dt_n exp((t - s_n) D_h) g(s_n) ],
        g = (lam f(u) + gamma u_hist + h)/a(l(u)),

    evaluated exactly on the sine eigenbasis of D_h. For a == 1 the residual
    is the scheme's splitting error, O(dt + dx^2); for varying a it also
    carries the clock mismatch between the identity's unit semigroup and the
    rescaled equation, so refinement statements are made at a == 1.
    """
    grid = traj.grid
    basis, mu = _sine_basis(grid)
    scale = 2.0 * grid.dx  # orthogonality: sum sin_k sin_l = delta / (2 dx)
    phi0 = spec.phi.samples[-1]

    idx = int(np.searchsorted(traj.stamps, t_probe, side="right")) - 1
    idx = min(max(idx, 0), traj.n_stamps - 1)
    t_probe = float(traj.stamps[idx])

    phi0_hat = basis @ phi0 * scale
    acc_hat = np.exp(-mu * t_probe) * phi0_hat

    hval = spec.h.param if spec.h.code == _kernels.H_CONSTANT else 0.0
    for k in range(idx):
        s = traj.stamps[k]
        dt_k = traj.stamps[k + 1] - traj.stamps[k]
        u = traj.states[k]
        c = traj.coeffs[k]
        tau_now = tc.alpha(s) if tc is not None else s
        tau_d = float(tau_now) - spec.rho
        if tau_d <= 0.0:
            hist = spec.phi.eval(tau_d).values
        else:
            if tc is not None:
                t_d = invert_alpha(tc, tau_d)
                hist = traj.interp_state(float(t_d))
            else:
                hist = traj.interp_state(tau_d)
        g = (spec.lam * spec.f(u) + spec.gamma * hist + hval) / c
        acc_hat += dt_k * np.exp(-mu * (t_probe - s)) * (basis @ g * scale)

    recon = basis.T @ acc_hat
    diff = traj.states[idx] - recon
    return float(np.sqrt(np.sum(diff ** 2) * grid.dx))
