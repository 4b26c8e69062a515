"""Sub/super-solution envelopes: the shifted autonomous problems

    v_t = v_xx + (lam f(v) - gamma K)/M,   v(0) = -K   (lower)
    v_t = v_xx + (lam f(v) + gamma K)/m,   v(0) = +K   (upper)

run with the same IMEX scheme as the main solvers, the sandwich check
lower <= mid <= upper on shared stamps, and the per-delay-interval sup
constants used to re-base the comparison step by step.

The constant initial data +-K violate the boundary condition at t = 0; the
instantaneous boundary layer is accepted and smoothed by the first implicit
step. Ordering violations are reported as magnitudes, never hidden: the IMEX
scheme with explicit reaction is not provably monotone, so tests assert
smallness and refinement decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import Grid
from .integrator import BLOWUP_LIMIT, BlowUpError, Trajectory
from .model import ProblemSpec
from .timechange import TimeChange, invert_alpha


@dataclass
class EnvelopePair:
    lower: Trajectory
    upper: Trajectory
    K: float


def _shifted_autonomous_run(
    grid: Grid,
    u0: np.ndarray,
    spec: ProblemSpec,
    shift: float,
    divisor: float,
    T: float,
    dt: float,
    t_offset: float = 0.0,
) -> Trajectory:
    """Integrate v_t = v_xx + (lam f(v) + shift)/divisor from v(0) = u0.

    Realized with the quasilinear kernel: unit diffusion coefficient,
    lam/divisor on the reaction, shift/divisor as constant forcing, no delay.
    """
    n_steps = int(round(T / dt))
    states = np.empty((n_steps + 1, grid.n_interior))
    coeffs = np.empty(n_steps + 1)
    states[0] = u0
    phi_seed = np.stack([u0, u0])  # never read: gamma = 0
    status, last = _kernels.run_quasilinear(
        phi_seed, -1.0, 1.0,
        n_steps, dt, grid.dx, spec.lam / divisor, 0.0, 1.0,
        spec.f.code, spec.f.param,
        _kernels.A_CONSTANT, 1.0, 0.0, 1.0, 1.0,
        _kernels.L_L2_SQ,
        _kernels.H_CONSTANT, shift / divisor,
        BLOWUP_LIMIT,
        states, coeffs,
    )
    if status == _kernels.STATUS_BLOWUP:
        raise BlowUpError(t_offset + last * dt, float(np.nanmax(np.abs(states[last]))))
    stamps = t_offset + np.arange(n_steps + 1) * dt
    return Trajectory(grid, stamps, states, coeffs, "t")


def solve_envelope(
    spec: ProblemSpec, K: float, T: float, dt: float, t_offset: float = 0.0,
    lower_init: np.ndarray | None = None, upper_init: np.ndarray | None = None,
) -> EnvelopePair:
    """Both envelopes on [t_offset, t_offset + T] from constant data -+K
    (or explicit restart states when re-basing mid-run)."""
    if K <= 0.0:
        raise ValueError("K must be positive")
    grid = spec.phi.grid
    ones = np.ones(grid.n_interior)
    lo0 = -K * ones if lower_init is None else lower_init
    up0 = K * ones if upper_init is None else upper_init
    lower = _shifted_autonomous_run(
        grid, lo0, spec, -spec.gamma * K, spec.big_m, T, dt, t_offset
    )
    upper = _shifted_autonomous_run(
        grid, up0, spec, spec.gamma * K, spec.m, T, dt, t_offset
    )
    return EnvelopePair(lower, upper, K)


def f_minus(spec: ProblemSpec, u, K: float):
    return (spec.lam * spec.f(u) - spec.gamma * K) / spec.big_m


def f_plus(spec: ProblemSpec, u, K: float):
    return (spec.lam * spec.f(u) + spec.gamma * K) / spec.m


def check_sandwich(
    lower: Trajectory, mid: Trajectory, upper: Trajectory
) -> float:
    """max over shared stamps and nodes of max(lower - mid, mid - upper, 0).

    The envelope trajectories must share stamps; mid is aligned onto them by
    linear interpolation when its stamp grid differs.
    """
    if lower.n_stamps != upper.n_stamps or np.any(lower.stamps != upper.stamps):
        raise ValueError("lower and upper envelopes must share stamps")
    same = (
        mid.n_stamps == lower.n_stamps
        and np.allclose(mid.stamps, lower.stamps, rtol=0.0, atol=1e-12)
    )
    if same:
        mid_states = mid.states
    else:
        mid_states = np.vstack([mid.interp_state(s) for s in lower.stamps])
    viol_lo = np.max(lower.states - mid_states, initial=0.0)
    viol_up = np.max(mid_states - upper.states, initial=0.0)
    return float(max(viol_lo, viol_up, 0.0))


def stepwise_constants(
    traj: Trajectory, tc: TimeChange, rho: float, n_steps: int
) -> np.ndarray:
    """K_n = sup of linf over the n-th rescaled interval
    [alpha^{-1}((n-1) rho), alpha^{-1}(n rho)], n = 1..n_steps."""
    lo, hi = tc.alpha_range
    if hi < n_steps * rho - 1e-9:
        raise ValueError(
            f"trajectory covers alpha up to {hi:.6g} < {n_steps * rho:.6g}"
        )
    linf = np.max(np.abs(traj.states), axis=1)
    out = np.empty(n_steps)
    for n in range(1, n_steps + 1):
        t_lo = invert_alpha(tc, (n - 1) * rho) if (n - 1) * rho >= lo else traj.stamps[0]
        t_hi = invert_alpha(tc, min(n * rho, hi))
        mask = (traj.stamps >= t_lo - 1e-12) & (traj.stamps <= t_hi + 1e-12)
        vals = [np.max(linf[mask], initial=0.0)]
        # interval edges may fall between stamps
        for edge in (t_lo, t_hi):
            vals.append(float(np.max(np.abs(traj.interp_state(float(edge))))))
        out[n - 1] = max(vals)
    return out


def sandwich_report(
    spec: ProblemSpec,
    mid: Trajectory,
    tc: TimeChange,
    n_intervals: int,
    K0: float | None = None,
) -> dict:
    """Re-based sandwich over the first n_intervals delay windows.

    Interval n compares mid against envelopes restarted from +-K_n at
    t = alpha^{-1}((n-1) rho), with K_1 = sup |phi| (or K0) and
    K_{n+1} = sup of |mid| over interval n, mirroring the step induction.
    Envelope steps reuse the mid trajectory's dt so stamps align exactly.
    """
    rho = spec.rho
    K = float(K0 if K0 is not None else spec.phi.sup_linf())
    dt = float(mid.stamps[1] - mid.stamps[0])
    alpha_hi = tc.alpha_range[1]
    # interval boundaries snapped to mid stamps so consecutive intervals share
    # their endpoint state (the restart state is covered by the previous sup)
    bounds = [0]
    for n in range(1, n_intervals + 1):
        tau_n = min(n * rho, alpha_hi)
        t_n = float(invert_alpha(tc, tau_n))
        idx = int(np.argmin(np.abs(mid.stamps - t_n)))
        if idx <= bounds[-1]:
            break
        bounds.append(idx)
        if tau_n >= alpha_hi:
            break
    per_interval = []
    k_seq = []
    worst = 0.0
    for b0, b1 in zip(bounds[:-1], bounds[1:]):
        span = float(mid.stamps[b1] - mid.stamps[b0])
        env = solve_envelope(spec, K, span, dt, t_offset=float(mid.stamps[b0]))
        seg = Trajectory(
            mid.grid,
            mid.stamps[b0 : b1 + 1].copy(),
            mid.states[b0 : b1 + 1].copy(),
            mid.coeffs[b0 : b1 + 1].copy(),
            mid.time_label,
        )
        v = check_sandwich(env.lower, seg, env.upper)
        per_interval.append(v)
        k_seq.append(K)
        worst = max(worst, v)
        K = float(np.max(np.abs(seg.states)))
    return {
        "max_violation": worst,
        "per_interval_violations": per_interval,
        "K_sequence": k_seq,
    }
