import numpy as np
import pytest

from conftest import make_spec, random_fourier_phi
from oracles import discrete_heat_semigroup
from nlds.comparison import (
    EnvelopePair,
    check_sandwich,
    f_minus,
    f_plus,
    sandwich_report,
    solve_envelope,
    stepwise_constants,
)
from nlds.grid import Grid
from nlds.integrator import Trajectory, solve_quasilinear, solve_semilinear
from nlds.model import DiffusionLaw, InitialFunction, Nonlinearity, ProblemSpec


def test_envelope_heat_sign_preservation():
    # f == 0, gamma == 0: discrete heat flow preserves the sign of +-K data
    spec = make_spec(n=63, gamma=0.0, f=Nonlinearity("zero"))
    env = solve_envelope(spec, K=1.0, T=0.3, dt=1e-3)
    assert np.all(env.upper.states >= 0.0)
    assert np.all(env.lower.states <= 0.0)
    assert np.all(env.lower.states <= env.upper.states)


def test_envelope_linear_problem_oracle():
    # f(u) = -u, lam = m = M = 1, gamma = 0: the upper envelope solves the
    # exactly factorizable problem v(t) = e^{-t} exp(t D_h) 1
    g = Grid(63)
    phi = InitialFunction.zero(g, 1.0)
    spec = ProblemSpec(lam=1.0, gamma=0.0, rho=1.0, m=1.0, big_m=1.0,
                       f=Nonlinearity("linear", -1.0),
                       a=DiffusionLaw("constant", 1.0), l="l2_norm_sq", phi=phi)
    dt = 1e-4
    env = solve_envelope(spec, K=1.0, T=0.5, dt=dt)
    ones = np.ones(g.n_interior)
    for k in (500, 2500, 5000):
        t = env.upper.stamps[k]
        oracle = np.exp(-t) * discrete_heat_semigroup(g, ones, t)
        assert np.max(env.upper.states[k] - oracle) <= 1e-3


def test_check_sandwich_boundary_and_counterexample():
    g = Grid(8)
    stamps = np.array([0.0, 1.0])
    zero = np.zeros((2, 8))
    lo = Trajectory(g, stamps, zero - 1.0, np.ones(2), "t")
    up = Trajectory(g, stamps, zero + 1.0, np.ones(2), "t")
    mid_eq_lower = Trajectory(g, stamps, zero - 1.0, np.ones(2), "t")
    assert check_sandwich(lo, mid_eq_lower, up) == 0.0
    mid_above = Trajectory(g, stamps, zero + 2.0, np.ones(2), "t")
    assert check_sandwich(lo, mid_above, up) == pytest.approx(1.0, abs=1e-15)


def test_stepwise_constants_zero_solution():
    from nlds.timechange import TimeChange

    g = Grid(8)
    stamps = np.linspace(0.0, 1.0, 11)
    traj = Trajectory(g, stamps, np.zeros((11, 8)), np.ones(11), "t")
    tc = TimeChange(stamps.copy(), stamps.copy())
    ks = stepwise_constants(traj, tc, rho=0.2, n_steps=5)
    assert np.all(ks == 0.0)


def test_stepwise_constants_heat_decay():
    # a == 1 so alpha = id; K_n = exp(-mu1 (n-1) rho) for decaying modes
    from conftest import heat_spec
    from nlds.grid import discrete_first_eigenvalue

    spec = heat_spec(n=127, rho=0.1)
    dt = 1e-4
    straj, tc, _ = solve_semilinear(spec, 0.4, dt)
    ks = stepwise_constants(straj, tc, rho=0.1, n_steps=4)
    mu1 = discrete_first_eigenvalue(spec.phi.grid)
    for n in range(1, 5):
        expected = np.exp(-mu1 * (n - 1) * 0.1)
        assert abs(ks[n - 1] - expected) <= 1e-3


def test_stepwise_constants_requires_coverage():
    from nlds.timechange import TimeChange

    g = Grid(8)
    stamps = np.linspace(0.0, 1.0, 11)
    traj = Trajectory(g, stamps, np.zeros((11, 8)), np.ones(11), "t")
    tc = TimeChange(stamps.copy(), stamps.copy())
    with pytest.raises(ValueError, match="covers"):
        stepwise_constants(traj, tc, rho=1.0, n_steps=3)


def test_envelope_monotonicity_in_K(rng):
    spec = make_spec(n=63)
    dt = 1e-3
    env_small = solve_envelope(spec, K=1.5, T=0.5, dt=dt)
    env_big = solve_envelope(spec, K=2.0, T=0.5, dt=dt)
    assert np.max(env_small.upper.states - env_big.upper.states) <= 1e-8
    assert np.max(env_big.lower.states - env_small.lower.states) <= 1e-8


def test_fplus_dominates_fminus_on_envelope_range():
    # holds on [-K, K], where envelope trajectories live
    spec = make_spec(n=16)
    K = 2.0
    u = np.linspace(-K, K, 4001)
    assert np.all(f_plus(spec, u, K) >= f_minus(spec, u, K) - 1e-14)


def test_sandwich_random_phi_small(rng):
    spec = make_spec(n=63, phi=random_fourier_phi(Grid(63), 1.0, rng,
                                                  amplitude=1.5))
    dt = 2e-4
    mid, tc, _ = solve_semilinear(spec, 2.0 / spec.m + 2 * dt, dt, tau_stop=2.0)
    rep = sandwich_report(spec, mid, tc, 2)
    assert rep["max_violation"] <= 1e-6
    assert len(rep["K_sequence"]) == 2
    # re-based constants never grow once the dynamics contract
    assert rep["K_sequence"][1] <= rep["K_sequence"][0] + 1e-12


def test_envelope_blowup_when_sign_condition_fails_badly():
    # quadratic reaction from large positive constant data escapes in finite
    # time (small data settles on the stable root instead, so K matters)
    from nlds.integrator import BlowUpError

    spec = make_spec(n=31, f=Nonlinearity("quadratic"))
    with pytest.raises(BlowUpError):
        solve_envelope(spec, K=15.0, T=5.0, dt=1e-3)
    env = solve_envelope(spec, K=2.0, T=5.0, dt=1e-3)
    assert np.max(env.upper.states[-1]) < 1.0


def test_interval_constants_absorbed_below_radius(rng):
    # the re-based interval constants of the dissipative dynamics drop below
    # the absorbing radius and stay non-increasing afterwards
    from nlds.dissipativity import full_report

    spec = make_spec(n=63, phi=random_fourier_phi(Grid(63), 1.0, rng,
                                                  amplitude=1.5))
    rep = full_report(spec, 1.0)
    dt = 2e-4
    mid, tc, _ = solve_semilinear(spec, 5.0 / spec.m + 2 * dt, dt, tau_stop=5.0)
    ks = stepwise_constants(mid, tc, spec.rho, 5)
    inside = np.flatnonzero(ks <= rep.k_abs)
    assert inside.size > 0
    first = inside[0]
    assert np.all(ks[first:] <= rep.k_abs)
    assert np.all(np.diff(ks[first:]) <= 1e-12)
