import numpy as np
import pytest

from nlds.grid import (
    Grid,
    GridFunction,
    continuum_first_eigenvalue,
    discrete_first_eigenvalue,
    implicit_diffusion_step,
    laplacian_apply,
    norms,
)


def sin_mode(grid, k=1):
    return GridFunction.from_callable(grid, lambda x: np.sin(k * np.pi * x))


def test_grid_invariants():
    g = Grid(255)
    assert g.dx * (g.n_interior + 1) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        Grid(1)
    assert Grid.from_dx(1.0 / 256).n_interior == 255


def test_gridfunction_rejects_nonfinite():
    g = Grid(4)
    with pytest.raises(ValueError):
        GridFunction(g, np.array([0.0, np.nan, 0.0, 0.0]))
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros(3))


def test_laplacian_zero():
    g = Grid(64)
    out = laplacian_apply(GridFunction.zero(g))
    assert np.all(out.values == 0.0)


def test_laplacian_sin_taylor_bound():
    # central differences on sin(pi x): error bounded by pi^4 dx^2 / 12
    g = Grid(255)
    u = sin_mode(g)
    out = laplacian_apply(u)
    err = np.max(np.abs(out.values + np.pi ** 2 * u.values))
    assert err <= np.pi ** 4 * g.dx ** 2 / 12.0 * 1.1


def test_laplacian_hand_stencil():
    # n = 2, dx = 1/3, u = (1, 0): ((0 - 2 + 0), (1 - 0 + 0)) * 9 = (-18, 9)
    g = Grid(2)
    u = GridFunction(g, np.array([1.0, 0.0]))
    out = laplacian_apply(u)
    assert out.values == pytest.approx([-18.0, 9.0], abs=1e-12)


def test_implicit_step_zero():
    g = Grid(32)
    out = implicit_diffusion_step(GridFunction.zero(g), 1.0, 0.1)
    assert np.all(out.values == 0.0)


def test_implicit_step_eigenmode():
    # sin(pi x) is an eigenvector: v = u / (1 + dt*coeff*mu1)
    g = Grid(255)
    u = sin_mode(g)
    dt = 1e-3
    for coeff in (1.0, 2.0):
        mu1 = discrete_first_eigenvalue(g)
        v = implicit_diffusion_step(u, coeff, dt)
        assert v.values == pytest.approx(
            u.values / (1.0 + dt * coeff * mu1), abs=1e-13
        )


def test_implicit_step_small_dt_limit(rng):
    g = Grid(63)
    u = GridFunction(g, rng.standard_normal(63))
    dt = 1e-8
    v = implicit_diffusion_step(u, 1.5, dt)
    lap = laplacian_apply(u)
    l2 = lambda w: np.sqrt(np.sum(w ** 2) * g.dx)
    assert l2(v.values - u.values) <= dt * 1.5 * l2(lap.values) * (1.0 + 1e-6)


def test_implicit_step_is_l2_contraction(rng):
    g = Grid(63)
    for _ in range(10):
        u = GridFunction(g, rng.standard_normal(63) * 10)
        v = implicit_diffusion_step(u, rng.uniform(0.1, 5.0), rng.uniform(1e-5, 1.0))
        assert norms(v)[0] <= norms(u)[0] + 1e-14


def test_norms_zero():
    assert norms(GridFunction.zero(Grid(16))) == (0.0, 0.0, 0.0)


def test_norms_sin_exact_integrals():
    # integral of sin^2 = 1/2, of (pi cos)^2 = pi^2/2, max = 1
    g = Grid(255)
    l2, h10, linf = norms(sin_mode(g))
    assert l2 == pytest.approx(1.0 / np.sqrt(2.0), abs=5 * g.dx ** 2)
    assert h10 == pytest.approx(np.pi / np.sqrt(2.0), abs=20 * g.dx ** 2)
    assert linf == pytest.approx(1.0, abs=g.dx ** 2)


def test_h10_matches_quadratic_form(rng):
    # <-D_h u, u> dx equals the h10 norm squared (summation by parts)
    g = Grid(63)
    u = GridFunction(g, rng.standard_normal(63))
    lap = laplacian_apply(u)
    quad = -np.sum(lap.values * u.values) * g.dx
    assert quad == pytest.approx(norms(u)[1] ** 2, rel=1e-12)


def test_discrete_poincare(rng):
    g = Grid(127)
    for _ in range(20):
        u = GridFunction(g, rng.standard_normal(127))
        l2, h10, _ = norms(u)
        assert h10 >= np.pi * l2 * (1.0 - 10.0 * g.dx ** 2)


def test_laplacian_symmetric_negative_definite(rng):
    g = Grid(63)
    for _ in range(10):
        u = GridFunction(g, rng.standard_normal(63))
        lap = laplacian_apply(u)
        assert np.sum(lap.values * u.values) * g.dx < 0.0


def test_eigenvalue_continuum_values():
    assert continuum_first_eigenvalue(0.0) == pytest.approx(np.pi ** 2, rel=1e-15)
    assert continuum_first_eigenvalue(1.0) == pytest.approx(np.pi ** 2 + 1.0,
                                                            rel=1e-15)


def test_eigenvalue_against_power_iteration():
    # independent oracle: power iteration on the inverse of -D_h (via the
    # implicit step with a huge dt) isolates the smallest eigenvalue
    g = Grid(127)
    u = GridFunction(g, np.ones(127))
    big = 1e8
    for _ in range(60):
        v = implicit_diffusion_step(u, 1.0, big)
        u = GridFunction(g, v.values / np.max(np.abs(v.values)))
    v = implicit_diffusion_step(u, 1.0, big)
    lam_inv = np.max(np.abs(v.values))  # approx 1/(big*mu1)
    mu1_power = 1.0 / (big * lam_inv)
    mu1 = discrete_first_eigenvalue(g)
    assert mu1 == pytest.approx(mu1_power, rel=1e-6)
    assert abs(mu1 - np.pi ** 2) / np.pi ** 2 <= 1e-3


def test_eigenvalue_monotone_from_below():
    vals = [discrete_first_eigenvalue(Grid(n)) for n in (15, 31, 63, 127, 255)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert all(v < np.pi ** 2 for v in vals)
