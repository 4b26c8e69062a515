import os
import subprocess
import sys

import numpy as np
import pytest

from nlds import _kernels


def test_numba_mode_active_by_default():
    if os.environ.get("NLDS_NUMBA", "1").lower() in ("0", "false", "off"):
        assert not _kernels.NUMBA_ENABLED
    else:
        assert _kernels.NUMBA_ENABLED


def test_tridiag_against_dense_solve(rng):
    n = 64
    for _ in range(5):
        off = -rng.uniform(0.1, 2.0)
        diag = 2.0 * abs(off) + rng.uniform(0.5, 3.0)
        rhs = rng.standard_normal(n)
        out = np.empty(n)
        cp = np.empty(n)
        dp = np.empty(n)
        _kernels.tridiag_const_solve(off, diag, rhs, out, cp, dp)
        A = (np.diag(np.full(n, diag)) + np.diag(np.full(n - 1, off), 1)
             + np.diag(np.full(n - 1, off), -1))
        assert out == pytest.approx(np.linalg.solve(A, rhs), rel=1e-12)


def test_l_functionals_match_numpy(rng):
    u = rng.standard_normal(33)
    dx = 1.0 / 34
    assert _kernels.l_functional(u, dx, _kernels.L_L2_SQ) == pytest.approx(
        np.sum(u ** 2) * dx, rel=1e-14
    )
    d = np.diff(u, prepend=0.0, append=0.0)
    assert _kernels.l_functional(u, dx, _kernels.L_H10) == pytest.approx(
        np.sqrt(np.sum(d ** 2) / dx), rel=1e-14
    )
    assert _kernels.l_functional(u, dx, _kernels.L_MEAN) == pytest.approx(
        np.sum(u) * dx, rel=1e-14
    )


_FALLBACK_SCRIPT = r"""
import json
import numpy as np
from nlds import _kernels
from nlds.grid import Grid
from nlds.model import InitialFunction, Nonlinearity, DiffusionLaw, ProblemSpec
from nlds.integrator import solve_quasilinear, solve_semilinear

assert _kernels.NUMBA_ENABLED == (%(jit)s)
g = Grid(31)
phi = InitialFunction.from_callable(g, 0.5, lambda s, x: (1 + 0.4*s)*np.sin(np.pi*x))
spec = ProblemSpec(lam=1.0, gamma=1.0, rho=0.5, m=1.0, big_m=2.0,
                   f=Nonlinearity("chafee_infante"), a=DiffusionLaw("inverse_decay"),
                   l="l2_norm_sq", phi=phi)
q = solve_quasilinear(spec, 0.2, 1e-3)
s, tc, t0 = solve_semilinear(spec, 0.1, 1e-3)
print(json.dumps({
    "q": q.states[-1].tolist(),
    "s": s.states[-1].tolist(),
    "alpha": tc.alpha_knots[-1],
    "t_start": t0,
}))
"""


def test_jit_and_fallback_paths_agree(tmp_path):
    # identical bits from the compiled and interpreted kernels
    outputs = {}
    for flag, jit in (("1", True), ("0", False)):
        env = dict(os.environ, NLDS_NUMBA=flag)
        script = _FALLBACK_SCRIPT % {"jit": jit}
        proc = subprocess.run(
            [sys.executable, "-c", script], env=env,
            capture_output=True, text=True, timeout=300,
        )
        assert proc.returncode == 0, proc.stderr
        outputs[flag] = proc.stdout.strip().splitlines()[-1]
    import json

    a = json.loads(outputs["1"])
    b = json.loads(outputs["0"])
    assert a["q"] == b["q"]
    assert a["s"] == b["s"]
    assert a["alpha"] == b["alpha"]
    assert a["t_start"] == b["t_start"]
