import numpy as np
import pytest

from nlds.grid import Grid, GridFunction
from nlds.model import (
    DiffusionLaw,
    Forcing,
    InitialFunction,
    Nonlinearity,
    ProblemSpec,
)


def make_spec(
    n=127,
    lam=1.0,
    gamma=1.0,
    rho=1.0,
    m=1.0,
    big_m=2.0,
    f=None,
    a=None,
    l="l2_norm_sq",
    phi=None,
    h=None,
):
    grid = Grid(n)
    if phi is None:
        phi = InitialFunction.from_callable(
            grid, rho, lambda s, x: 0.8 * (1.0 + 0.3 * s) * np.sin(np.pi * x)
        )
    return ProblemSpec(
        lam=lam,
        gamma=gamma,
        rho=rho,
        m=m,
        big_m=big_m,
        f=f if f is not None else Nonlinearity("chafee_infante"),
        a=a if a is not None else DiffusionLaw("inverse_decay"),
        l=l,
        phi=phi,
        h=h if h is not None else Forcing("zero"),
    )


def heat_spec(n=127, amplitude=1.0, rho=1.0):
    """a == 1, f == 0, gamma == 0: the exactly solvable mode problem."""
    grid = Grid(n)
    phi = InitialFunction.from_callable(
        grid, rho, lambda s, x: amplitude * np.sin(np.pi * x)
    )
    return ProblemSpec(
        lam=1.0, gamma=0.0, rho=rho, m=1.0, big_m=1.0,
        f=Nonlinearity("zero"), a=DiffusionLaw("constant", 1.0),
        l="l2_norm_sq", phi=phi,
    )


def random_fourier_phi(grid, rho, rng, amplitude=1.0, modes=4, n_sigma=33):
    c = rng.standard_normal(modes)
    d = rng.uniform(-0.5, 0.5, modes)
    sig = np.linspace(-rho, 0.0, n_sigma)
    basis = np.stack([np.sin((k + 1) * np.pi * grid.x) for k in range(modes)])
    samples = np.empty((n_sigma, grid.n_interior))
    for i, s in enumerate(sig):
        samples[i] = (c * (1.0 + d * s)) @ basis
    peak = np.max(np.abs(samples))
    if peak > 0:
        samples *= amplitude / peak
    return InitialFunction(grid, rho, samples)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
