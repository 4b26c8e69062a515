"""Acceptance gate at canonical resolution.

Canonical instance: f(u) = u - u^3, lam = 1, a(s) = 1 + 1/(1+s) (m = 1,
M = 2), l = squared L2 norm, gamma = 1, rho = 1, C0 = 1, dx = 1/256,
dtau = 1e-4. One test per criterion; each prints a PASS/FAIL line (run with
`pytest -s tests/test_acceptance.py` to see them inline).
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import random_fourier_phi
from oracles import scalar_dde
from nlds.attractor import (
    BundleSnapshot,
    absorption_time,
    containment_check,
    hausdorff_semidist,
    omega_limit_estimate,
    run_bundle,
)
from nlds.comparison import sandwich_report
from nlds.dissipativity import (
    c1_star_pair,
    check_D,
    check_S,
    closed_form_theta,
    compute_K_abs,
    full_report,
    solve_theta,
)
from nlds.grid import Grid
from nlds.integrator import pushforward, solve_quasilinear, solve_semilinear
from nlds.model import (
    DiffusionLaw,
    InitialFunction,
    Nonlinearity,
    ProblemSpec,
    StructuralConstants,
    derive_chafee_constants,
)
from nlds.timechange import compute_alpha0

DX = 1.0 / 256
DTAU = 1e-4
N = 255
OMEGA = np.pi ** 2 + 1.0


def canonical_spec(n=N, phi=None, gamma=1.0, f=None):
    grid = Grid(n)
    if phi is None:
        phi = InitialFunction.from_callable(
            grid, 1.0, lambda s, x: 0.8 * (1.0 + 0.3 * s) * np.sin(np.pi * x)
        )
    return ProblemSpec(
        lam=1.0, gamma=gamma, rho=1.0, m=1.0, big_m=2.0,
        f=f if f is not None else Nonlinearity("chafee_infante"),
        a=DiffusionLaw("inverse_decay"), l="l2_norm_sq", phi=phi,
    )


def report(num, desc, ok, detail):
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {desc} [{detail}]"
    print(line)
    assert ok, line


def _equivalence_error(n, dtau, T=2.0):
    spec = canonical_spec(n)
    qtraj = solve_quasilinear(spec, T, dtau)
    straj, tc, _ = solve_semilinear(spec, T / spec.m + 2 * dtau, dtau,
                                    tau_stop=T)
    tau_hi = min(T, tc.alpha_range[1])
    tau_grid = np.linspace(0.0, tau_hi, 201)
    pushed = pushforward(straj, tc, tau_grid)
    direct = np.vstack([qtraj.interp_state(float(t)) for t in tau_grid])
    dx = spec.phi.grid.dx
    return float(np.max(np.sqrt(np.sum((pushed.states - direct) ** 2, axis=1)
                                * dx)))


def test_criterion_01_timechange_equivalence():
    e0 = _equivalence_error(255, 1e-4)
    e1 = _equivalence_error(511, 5e-5)
    ratio = e0 / e1
    report(
        1, "direct/rescaled round-trip equivalence on [0,2]",
        e0 <= 5e-3 and ratio >= 1.8,
        f"sup l2 diff = {e0:.3e} (tol 5e-3), halving ratio = {ratio:.2f}",
    )


def test_criterion_02_delay_window():
    ds = 1e-5
    grid = Grid(N)
    rng = np.random.default_rng(2024)
    worst_lo, worst_hi = np.inf, -np.inf
    ok = True
    for _ in range(20):
        phi = random_fourier_phi(grid, 1.0, rng,
                                 amplitude=rng.uniform(0.2, 2.0))
        spec = canonical_spec(phi=phi)
        t_start, _ = compute_alpha0(phi, spec, ds)
        w = -t_start
        worst_lo = min(worst_lo, w)
        worst_hi = max(worst_hi, w)
        ok = ok and (0.5 - ds * 2.0 <= w <= 1.0 + ds * 2.0)
    report(
        2, "phi-dependent delay window in [rho/M, rho/m] = [0.5, 1.0]",
        ok, f"20 draws, window range [{worst_lo:.5f}, {worst_hi:.5f}]",
    )


def test_criterion_03_heat_oracle():
    grid = Grid(N)
    phi = InitialFunction.from_callable(grid, 1.0,
                                        lambda s, x: np.sin(np.pi * x))
    spec = ProblemSpec(lam=1.0, gamma=0.0, rho=1.0, m=1.0, big_m=1.0,
                       f=Nonlinearity("zero"), a=DiffusionLaw("constant", 1.0),
                       l="l2_norm_sq", phi=phi)
    traj = solve_quasilinear(spec, 0.1, DTAU)
    got = float(np.max(np.abs(traj.states[-1])))
    exact = float(np.exp(-np.pi ** 2 * 0.1))  # 0.3727076...
    rel = abs(got - exact) / exact
    report(3, "exact heat decay ||w(0.1)||_inf = exp(-pi^2/10)",
           rel <= 1e-3, f"got {got:.6f}, exact {exact:.6f}, rel {rel:.2e}")


def test_criterion_04_scalar_dde_mode_oracle():
    grid = Grid(N)
    phi = InitialFunction.from_callable(grid, 1.0,
                                        lambda s, x: np.sin(np.pi * x))
    spec = ProblemSpec(lam=1.0, gamma=1.0, rho=1.0, m=1.0, big_m=1.0,
                       f=Nonlinearity("zero"), a=DiffusionLaw("constant", 1.0),
                       l="l2_norm_sq", phi=phi)
    traj = solve_quasilinear(spec, 3.0, DTAU)
    oracle = scalar_dde(3.0, gamma=1.0, rate=np.pi ** 2)
    sel = slice(0, traj.n_stamps, 10)
    linf = np.max(np.abs(traj.states[sel]), axis=1)
    ref = np.array([abs(oracle(float(t))) for t in traj.stamps[sel]])
    mis = float(np.max(np.abs(linf - ref)))
    report(4, "sine-mode amplitude vs refined scalar delay integrator on [0,3]",
           mis <= 1e-3, f"linf mismatch {mis:.2e}")


def test_criterion_05_sandwich():
    rng = np.random.default_rng(31415)
    grid = Grid(N)
    worst_first = 0.0
    worst_all = 0.0
    for _ in range(5):
        phi = random_fourier_phi(grid, 1.0, rng,
                                 amplitude=rng.uniform(0.5, 2.0))
        spec = canonical_spec(phi=phi)
        mid, tc, _ = solve_semilinear(spec, 5.0 / spec.m + 2 * DTAU, DTAU,
                                      tau_stop=5.0)
        rep = sandwich_report(spec, mid, tc, 5)
        worst_first = max(worst_first, rep["per_interval_violations"][0])
        worst_all = max(worst_all, rep["max_violation"])
    report(
        5, "ordering envelopes sandwich the solution (first window and 5 rho)",
        worst_first <= 1e-6 and worst_all <= 1e-6,
        f"max violation first window {worst_first:.2e}, re-based {worst_all:.2e}",
    )


def test_criterion_06_conditions_and_constants():
    spec = canonical_spec()
    rep = check_D(spec, c0=1.0)
    omega_ok = rep.omega == pytest.approx(OMEGA, rel=1e-15)
    c1 = StructuralConstants.for_spec(spec, 1.0).c1
    holds, margin, _ = check_S(spec, 1.0, c1)
    formula = float(np.exp(-OMEGA) + 1.0 / OMEGA)
    d_ok = (abs(rep.d_lhs - formula) <= 1e-12
            and abs(rep.d_lhs - 0.0920) <= 1e-4)
    k = compute_K_abs(c1, OMEGA, 1.0, spec.gamma, spec.m, spec.big_m)
    resub = all(
        np.exp(-OMEGA * 1.0 / spec.big_m) * k + c1s / OMEGA < k
        for c1s in c1_star_pair(c1, spec.gamma, k, spec.m, spec.big_m)
    )
    report(
        6, "decay rate, sign-condition constants, smallness value, radius",
        omega_ok and holds and margin <= 1e-9 and d_ok and resub,
        f"omega = {rep.omega:.6f}, S margin = {margin:.1e}, "
        f"lhs = {rep.d_lhs:.6f}, K_abs = {k:.4f}",
    )


def test_criterion_07_theta():
    g = Grid(255)
    th = solve_theta(1.0, 1.0, g)
    err = float(np.max(np.abs(th.values - closed_form_theta(1.0, 1.0, g.x))))
    mid = g.n_interior // 2
    th0 = solve_theta(0.0, 1.0, g)
    spot_ok = th0.values[mid] == pytest.approx(1.0 / 8.0, rel=1e-12)
    errs = []
    for n in (63, 127, 255):
        gg = Grid(n)
        t = solve_theta(1.0, 1.0, gg)
        errs.append(np.max(np.abs(t.values - closed_form_theta(1.0, 1.0, gg.x))))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    report(
        7, "steady envelope: closed form, parabola spot value, convergence",
        err <= 1e-4 and spot_ok and r1 >= 3.5 and r2 >= 3.5,
        f"max err {err:.2e}, theta0(1/2) = {th0.values[mid]:.12f}, "
        f"ratios {r1:.2f}/{r2:.2f}",
    )


def test_criterion_08_containment():
    spec0 = canonical_spec(phi=InitialFunction.zero(Grid(N), 1.0))
    rep = full_report(spec0, 1.0)
    grid = spec0.phi.grid
    rng = np.random.default_rng(777)

    inside_members = []
    sig = np.linspace(-1.0, 0.0, 17)
    for _ in range(8):
        r = rng.uniform(-1.0, 1.0)
        wob = rng.uniform(0.0, 0.5)
        mod = r * (1.0 - wob * np.sin(np.pi * sig) ** 2)
        inside_members.append(
            InitialFunction(grid, 1.0, mod[:, None] * rep.theta.values[None, :])
        )
    run_in = run_bundle(inside_members, spec0, 3.0, 0.05, DTAU)
    v_in = max(
        float(np.max(np.abs(s.segments) - rep.theta.values[None, None, :]))
        for s in run_in.snapshots
    )

    outside_members = [
        random_fourier_phi(grid, 1.0, rng, amplitude=1.5) for _ in range(8)
    ]
    run_out = run_bundle(outside_members, spec0, 4.0, 0.05, DTAU)
    t_abs = absorption_time(run_out, rep.k_abs, "linf")
    cont = containment_check(run_out, rep.theta, 0.25)
    after_ok = (t_abs is not None
                and cont["window_start_stamp"] >= t_abs
                and cont["window_violation"] <= 1e-6)
    report(
        8, "pointwise steady-envelope containment (inside kept, outside drawn in)",
        v_in <= 1e-6 and after_ok,
        f"inside violation {v_in:.2e}, absorption at {t_abs}, "
        f"trailing violation {cont['window_violation']:.2e}",
    )


def test_criterion_09_omega_limit():
    grid = Grid(N)
    rng = np.random.default_rng(99)
    members = [random_fourier_phi(grid, 1.0, rng, amplitude=1.0)
               for _ in range(6)]
    spec = ProblemSpec(lam=1.0, gamma=0.1, rho=1.0, m=1.0, big_m=2.0,
                       f=Nonlinearity("linear", -1.0),
                       a=DiffusionLaw("inverse_decay"), l="l2_norm_sq",
                       phi=members[0])
    drep = check_D(spec, c0=0.5, c1=0.0)
    assert drep.d_holds and drep.d_holds_conservative
    run = run_bundle(members, spec, 5.0, 0.1, DTAU)
    reps = omega_limit_estimate(run, 0.3)
    dist0 = float(np.sqrt(np.sum(reps[0].values ** 2) * grid.dx)) if reps else np.inf
    zero = BundleSnapshot(0.0, (0,), np.zeros((1, N)))
    dists = np.array(
        [hausdorff_semidist(s, zero, "l2") for s in run.snapshots]
    )
    t_abs = absorption_time(run, 0.2, "l2")
    after = dists[run.stamps >= t_abs]
    monotone = bool(np.all(np.diff(after) <= 1e-4))
    report(
        9, "omega-limit estimate collapses to zero and attraction is monotone",
        len(reps) == 1 and dist0 <= 1e-4 and monotone,
        f"{len(reps)} cluster(s), dist to 0 = {dist0:.2e}, "
        f"max dist increase after absorption = {np.max(np.diff(after), initial=0):.1e}",
    )


def test_criterion_10_determinism(tmp_path):
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "nlds.cli", "selftest",
             "--out", str(out), "--seed", "4242"],
            capture_output=True, text=True, timeout=600,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    files1 = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*")
                    if p.is_file())
    files2 = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*")
                    if p.is_file())
    same_names = files1 == files2
    same_bytes = all(
        (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
        for f in files1
    )
    selftest_green = json.loads(
        (outs[0] / "selftest_report.json").read_text()
    )["all_passed"]
    report(
        10, "selftest artifacts byte-identical across reruns with one seed",
        same_names and same_bytes and selftest_green,
        f"{len(files1)} files compared, selftest all green = {selftest_green}",
    )
