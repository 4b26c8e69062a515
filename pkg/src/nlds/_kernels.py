"""Hot stepping kernels.

Everything here is written loop-style so numba can compile it. When the
environment variable NLDS_NUMBA is "0"/"false"/"off" the decorator becomes a
no-op and the same code runs under the plain interpreter (slow but identical
bit-for-bit, useful for debugging). See benchmarks/bench_kernels.py for a
side-by-side timing.
"""

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("NLDS_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "off",
)

if NUMBA_ENABLED:
    from numba import njit
else:

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# integer codes shared with model.py (kept in sync by model's registries)
F_ZERO = 0
F_LINEAR = 1
F_CHAFEE = 2
F_QUADRATIC = 3

A_CONSTANT = 0
A_INVERSE_DECAY = 1
A_AFFINE = 2

L_L2_SQ = 0
L_H10 = 1
L_MEAN = 2

H_ZERO = 0
H_CONSTANT = 1

STATUS_OK = 0
STATUS_BLOWUP = 1


@njit(cache=True)
def tridiag_const_solve(off, diag, rhs, out, cp, dp):
    """Thomas elimination for a constant-coefficient symmetric tridiagonal
    system (diag on the main diagonal, off on both side diagonals).

    Requires |diag| > 2|off| (strict diagonal dominance), which every caller
    guarantees, so no pivoting is needed. cp/dp are scratch arrays of len(rhs).
    """
    n = rhs.shape[0]
    cp[0] = off / diag
    dp[0] = rhs[0] / diag
    for i in range(1, n):
        denom = diag - off * cp[i - 1]
        cp[i] = off / denom
        dp[i] = (rhs[i] - off * dp[i - 1]) / denom
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]


@njit(cache=True)
def implicit_heat_solve(rhs, r, out, cp, dp):
    """Solve (I - r*D2) out = rhs where D2 is the dimensionless 3-point
    stencil (so r = dt*coeff/dx**2), zero boundary values."""
    tridiag_const_solve(-r, 1.0 + 2.0 * r, rhs, out, cp, dp)


@njit(cache=True)
def l_functional(u, dx, l_kind):
    """Evaluate the configured functional l at a grid state."""
    n = u.shape[0]
    if l_kind == L_L2_SQ:
        s = 0.0
        for i in range(n):
            s += u[i] * u[i]
        return s * dx
    elif l_kind == L_H10:
        s = 0.0
        prev = 0.0
        for i in range(n):
            d = u[i] - prev
            s += d * d
            prev = u[i]
        s += prev * prev
        return np.sqrt(s / dx)
    else:
        s = 0.0
        for i in range(n):
            s += u[i]
        return s * dx


@njit(cache=True)
def a_coefficient(lval, a_kind, a_p0, a_p1, m, big_m):
    """Diffusion coefficient a(l(u)), clamped into [m, M]."""
    if a_kind == A_CONSTANT:
        raw = a_p0
    elif a_kind == A_INVERSE_DECAY:
        s = lval if lval > 0.0 else 0.0
        raw = m + (big_m - m) / (1.0 + s)
    else:
        raw = a_p0 + a_p1 * lval
    if raw < m:
        return m
    if raw > big_m:
        return big_m
    return raw


@njit(cache=True)
def f_apply(u, f_kind, f_p0, out):
    n = u.shape[0]
    if f_kind == F_ZERO:
        for i in range(n):
            out[i] = 0.0
    elif f_kind == F_LINEAR:
        for i in range(n):
            out[i] = f_p0 * u[i]
    elif f_kind == F_QUADRATIC:
        for i in range(n):
            out[i] = u[i] * u[i]
    else:
        for i in range(n):
            out[i] = u[i] - u[i] * u[i] * u[i]


@njit(cache=True)
def interp_initial(tau, phi_t0, phi_dt, phi_states, out):
    """Linear interpolation in the seeded history samples on [phi_t0, 0]."""
    n_samp = phi_states.shape[0]
    pos = (tau - phi_t0) / phi_dt
    if pos <= 0.0:
        for i in range(out.shape[0]):
            out[i] = phi_states[0, i]
        return
    if pos >= n_samp - 1:
        for i in range(out.shape[0]):
            out[i] = phi_states[n_samp - 1, i]
        return
    j = int(pos)
    w = pos - j
    for i in range(out.shape[0]):
        out[i] = (1.0 - w) * phi_states[j, i] + w * phi_states[j + 1, i]


@njit(cache=True)
def interp_uniform(tau, dt, states, last, out):
    """Linear interpolation over recorded states with uniform stamps k*dt,
    k = 0..last."""
    pos = tau / dt
    if pos <= 0.0:
        for i in range(out.shape[0]):
            out[i] = states[0, i]
        return
    if pos >= last:
        for i in range(out.shape[0]):
            out[i] = states[last, i]
        return
    j = int(pos)
    w = pos - j
    for i in range(out.shape[0]):
        out[i] = (1.0 - w) * states[j, i] + w * states[j + 1, i]


@njit(cache=True)
def interp_nonuniform(tau, stamps, states, last, out):
    """Linear interpolation over recorded states with increasing stamps[0..last]."""
    if tau <= stamps[0]:
        for i in range(out.shape[0]):
            out[i] = states[0, i]
        return
    if tau >= stamps[last]:
        for i in range(out.shape[0]):
            out[i] = states[last, i]
        return
    j = np.searchsorted(stamps[: last + 1], tau) - 1
    if j < 0:
        j = 0
    w = (tau - stamps[j]) / (stamps[j + 1] - stamps[j])
    for i in range(out.shape[0]):
        out[i] = (1.0 - w) * states[j, i] + w * states[j + 1, i]


@njit(cache=True)
def step_quasilinear_inplace(
    w,
    wd,
    dtau,
    dx,
    lam,
    gamma,
    c,
    f_kind,
    f_p0,
    hval,
    out,
    fu,
    rhs,
    cp,
    dp,
):
    """One linearly implicit step of the tau-time problem: diffusion with
    frozen coefficient c is implicit, reaction/delay/forcing explicit."""
    n = w.shape[0]
    f_apply(w, f_kind, f_p0, fu)
    for i in range(n):
        rhs[i] = w[i] + dtau * (lam * fu[i] + gamma * wd[i] + hval)
    implicit_heat_solve(rhs, dtau * c / (dx * dx), out, cp, dp)


@njit(cache=True)
def run_quasilinear(
    phi_states,
    phi_t0,
    phi_dt,
    n_steps,
    dtau,
    dx,
    lam,
    gamma,
    rho,
    f_kind,
    f_p0,
    a_kind,
    a_p0,
    a_p1,
    m,
    big_m,
    l_kind,
    h_kind,
    h_p0,
    blowup_limit,
    states,
    coeffs,
):
    """March the tau-time solver. states[0] must hold phi(0); states/coeffs
    are filled for stamps k*dtau, k = 0..n_steps. Returns (status, last)."""
    n = states.shape[1]
    fu = np.empty(n)
    rhs = np.empty(n)
    wd = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    hval = h_p0 if h_kind == H_CONSTANT else 0.0
    for k in range(n_steps):
        w = states[k]
        c = a_coefficient(l_functional(w, dx, l_kind), a_kind, a_p0, a_p1, m, big_m)
        coeffs[k] = c
        tau_d = k * dtau - rho
        if tau_d <= 0.0:
            interp_initial(tau_d, phi_t0, phi_dt, phi_states, wd)
        else:
            interp_uniform(tau_d, dtau, states, k, wd)
        step_quasilinear_inplace(
            w, wd, dtau, dx, lam, gamma, c, f_kind, f_p0, hval,
            states[k + 1], fu, rhs, cp, dp,
        )
        linf = 0.0
        for i in range(n):
            v = abs(states[k + 1, i])
            if v > linf:
                linf = v
        if not (linf <= blowup_limit):
            coeffs[k + 1] = c
            return STATUS_BLOWUP, k + 1
    w = states[n_steps]
    coeffs[n_steps] = a_coefficient(
        l_functional(w, dx, l_kind), a_kind, a_p0, a_p1, m, big_m
    )
    return STATUS_OK, n_steps


@njit(cache=True)
def run_semilinear(
    phi_states,
    phi_t0,
    phi_dt,
    n_max,
    dt,
    dx,
    tau_stop,
    lam,
    gamma,
    rho,
    f_kind,
    f_p0,
    a_kind,
    a_p0,
    a_p1,
    m,
    big_m,
    l_kind,
    h_kind,
    h_p0,
    blowup_limit,
    states,
    alphas,
    coeffs,
):
    """March the rescaled t-time solver.

    The clock map alpha (t -> tau) is accumulated with the left-endpoint rule
    alpha += a(l(u))*dt, and the equation stepped is the t-form of the
    tau-problem under that clock: u_t = a^2*Du + a*(lam*f(u) + gamma*u_d + h),
    diffusion implicit with frozen a(l(u^n)). History lives in tau-stamps
    (alphas), so the delayed lookup at alpha(t)-rho is uniform across steps.
    Stops after n_max steps or once alpha >= tau_stop. Returns (status, last).
    """
    n = states.shape[1]
    fu = np.empty(n)
    rhs = np.empty(n)
    ud = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    hval = h_p0 if h_kind == H_CONSTANT else 0.0
    alphas[0] = 0.0
    for k in range(n_max):
        u = states[k]
        c = a_coefficient(l_functional(u, dx, l_kind), a_kind, a_p0, a_p1, m, big_m)
        coeffs[k] = c
        tau_d = alphas[k] - rho
        if tau_d <= 0.0:
            interp_initial(tau_d, phi_t0, phi_dt, phi_states, ud)
        else:
            interp_nonuniform(tau_d, alphas, states, k, ud)
        f_apply(u, f_kind, f_p0, fu)
        for i in range(n):
            rhs[i] = u[i] + dt * c * (lam * fu[i] + gamma * ud[i] + hval)
        implicit_heat_solve(rhs, dt * c * c / (dx * dx), states[k + 1], cp, dp)
        alphas[k + 1] = alphas[k] + c * dt
        linf = 0.0
        for i in range(n):
            v = abs(states[k + 1, i])
            if v > linf:
                linf = v
        if not (linf <= blowup_limit):
            coeffs[k + 1] = c
            return STATUS_BLOWUP, k + 1
        if alphas[k + 1] >= tau_stop:
            u = states[k + 1]
            coeffs[k + 1] = a_coefficient(
                l_functional(u, dx, l_kind), a_kind, a_p0, a_p1, m, big_m
            )
            return STATUS_OK, k + 1
    u = states[n_max]
    coeffs[n_max] = a_coefficient(
        l_functional(u, dx, l_kind), a_kind, a_p0, a_p1, m, big_m
    )
    return STATUS_OK, n_max


@njit(cache=True)
def alpha0_backward(
    phi_states,
    phi_t0,
    phi_dt,
    rho,
    ds,
    dx,
    a_kind,
    a_p0,
    a_p1,
    m,
    big_m,
    l_kind,
    t_knots,
    alpha_knots,
):
    """Integrate alpha'(s) = a(l(phi(alpha(s)))) backward from (0, 0) until
    alpha reaches -rho exactly (overshoot resolved with one linear sub-step).

    Knot arrays are filled in backward order starting at index 0 = (0, 0);
    returns the index of the last knot written (t_start, -rho).
    """
    n = phi_states.shape[1]
    tmp = np.empty(n)
    k = 0
    t = 0.0
    alpha = 0.0
    t_knots[0] = 0.0
    alpha_knots[0] = 0.0
    while alpha > -rho:
        interp_initial(alpha, phi_t0, phi_dt, phi_states, tmp)
        c = a_coefficient(l_functional(tmp, dx, l_kind), a_kind, a_p0, a_p1, m, big_m)
        step = ds
        nxt = alpha - c * ds
        if nxt < -rho:
            step = (alpha + rho) / c
            nxt = -rho
        t -= step
        alpha = nxt
        k += 1
        t_knots[k] = t
        alpha_knots[k] = alpha
    return k
