"""The tau <-> t rescaling: alpha(t) = integral of a(l(u)) accumulated with
the left-endpoint rule, its piecewise-linear inverse, and the initial-segment
map alpha0 obtained by integrating alpha'(s) = a(l(phi(alpha(s)))) backward
until alpha reaches -rho.

A TimeChange is append-only and owned by one trajectory worker; after a run
it is read-only and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import InitialFunction, ProblemSpec


class TimeRangeError(ValueError):
    """A tau/t query outside the covered interval (a delay-bookkeeping bug)."""


@dataclass
class TimeChange:
    """Monotone sampled map t -> alpha(t). Forward maps start at (0, 0);
    chord slopes stay in [m, M] because they come from clamped coefficients."""

    t_knots: np.ndarray = field(repr=False)
    alpha_knots: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.t_knots, dtype=float)
        a = np.asarray(self.alpha_knots, dtype=float)
        if t.shape != a.shape or t.ndim != 1 or t.size < 1:
            raise ValueError("knot arrays must be equal-length 1-D")
        if np.any(np.diff(t) <= 0.0) or np.any(np.diff(a) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        self.t_knots = t
        self.alpha_knots = a

    @classmethod
    def origin(cls) -> "TimeChange":
        return cls(np.array([0.0]), np.array([0.0]))

    @property
    def t_range(self) -> tuple[float, float]:
        return float(self.t_knots[0]), float(self.t_knots[-1])

    @property
    def alpha_range(self) -> tuple[float, float]:
        return float(self.alpha_knots[0]), float(self.alpha_knots[-1])

    def chord_slopes(self) -> np.ndarray:
        return np.diff(self.alpha_knots) / np.diff(self.t_knots)

    def alpha(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lo, hi = self.t_range
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise TimeRangeError(f"t outside covered interval [{lo}, {hi}]")
        return np.interp(t, self.t_knots, self.alpha_knots)

    def export_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,alpha\n")
            for t, a in zip(self.t_knots, self.alpha_knots):
                fh.write(f"{float(t)!r},{float(a)!r}\n")


def accumulate_alpha(tc: TimeChange, t_new: float, coeff: float) -> TimeChange:
    """Append (t_new, alpha_last + coeff*(t_new - t_last)): the left-endpoint
    rule matching the frozen-coefficient integrator."""
    t_last = float(tc.t_knots[-1])
    if t_new <= t_last:
        raise ValueError(f"t_new = {t_new} must exceed last knot t = {t_last}")
    a_new = float(tc.alpha_knots[-1]) + coeff * (t_new - t_last)
    return TimeChange(
        np.append(tc.t_knots, t_new), np.append(tc.alpha_knots, a_new)
    )


def invert_alpha(tc: TimeChange, tau) -> np.ndarray | float:
    """Piecewise-linear inverse lookup t = alpha^{-1}(tau); exact on knots."""
    tau_arr = np.asarray(tau, dtype=float)
    lo, hi = tc.alpha_range
    if np.any(tau_arr < lo - 1e-12) or np.any(tau_arr > hi + 1e-12):
        raise TimeRangeError(f"tau outside covered interval [{lo}, {hi}]")
    out = np.interp(tau_arr, tc.alpha_knots, tc.t_knots)
    return float(out) if np.isscalar(tau) else out


def compute_alpha0(
    phi: InitialFunction, spec: ProblemSpec, ds: float
) -> tuple[float, TimeChange]:
    """Initial-segment map: integrates the backward ODE until alpha = -rho.

    Returns (t_start, map on [t_start, 0]) with alpha(t_start) = -rho exactly.
    The window satisfies rho/M - ds <= -t_start <= rho/m + ds because every
    slope lies in [m, M] and the quadrature is first order in ds.
    """
    if ds <= 0.0:
        raise ValueError("ds must be positive")
    rho = spec.rho
    cap = int(np.ceil(rho / (spec.m * ds))) + 3
    t_buf = np.empty(cap)
    a_buf = np.empty(cap)
    p0, p1 = spec.a.params
    last = _kernels.alpha0_backward(
        phi.samples, -phi.rho, phi.dsigma, rho, ds, phi.grid.dx,
        spec.a.code, p0, p1, spec.m, spec.big_m, spec.l_code,
        t_buf, a_buf,
    )
    t_knots = t_buf[: last + 1][::-1].copy()
    alpha_knots = a_buf[: last + 1][::-1].copy()
    return float(t_knots[0]), TimeChange(t_knots, alpha_knots)


def reciprocal_window_quadrature(
    phi: InitialFunction, spec: ProblemSpec, refine: int = 64
) -> float:
    """Direct quadrature of the equivalent window expression
    integral over [-rho, 0] of a(l(phi(r)))^{-1} dr; equals -t_start up to
    quadrature error and serves as an independent cross-check.

    Evaluates on the phi sample grid refined by an integer factor, where the
    piecewise-linear interpolation is reproduced exactly.
    """
    p0, p1 = spec.a.params
    dx = phi.grid.dx
    w = np.linspace(0.0, 1.0, refine, endpoint=False)
    sig_parts = []
    inv_parts = []
    sig = phi.sigma
    for j in range(phi.samples.shape[0] - 1):
        # refine panel j: states (refine, n)
        states = (1.0 - w)[:, None] * phi.samples[j] + w[:, None] * phi.samples[j + 1]
        for i in range(refine):
            lval = _kernels.l_functional(states[i], dx, spec.l_code)
            c = _kernels.a_coefficient(
                lval, spec.a.code, p0, p1, spec.m, spec.big_m
            )
            inv_parts.append(1.0 / c)
            sig_parts.append(sig[j] + w[i] * (sig[j + 1] - sig[j]))
    lval = _kernels.l_functional(phi.samples[-1], dx, spec.l_code)
    inv_parts.append(
        1.0 / _kernels.a_coefficient(lval, spec.a.code, p0, p1, spec.m, spec.big_m)
    )
    sig_parts.append(sig[-1])
    return float(np.trapezoid(np.array(inv_parts), np.array(sig_parts)))
