"""Timing comparison of the numba-compiled kernels against the interpreted
fallback (NLDS_NUMBA=0). Run directly:

    python3 benchmarks/bench_kernels.py            # both modes, side by side
    NLDS_NUMBA=0 python3 benchmarks/bench_kernels.py --single   # one mode

The fallback executes the identical loop code, so results agree bit for bit;
only the wall time differs.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def run_case(n=255, steps=4000):
    from nlds.grid import Grid
    from nlds.integrator import solve_quasilinear, solve_semilinear
    from nlds.model import (
        DiffusionLaw,
        InitialFunction,
        Nonlinearity,
        ProblemSpec,
    )

    grid = Grid(n)
    phi = InitialFunction.from_callable(
        grid, 1.0, lambda s, x: 0.8 * (1.0 + 0.3 * s) * np.sin(np.pi * x)
    )
    spec = ProblemSpec(lam=1.0, gamma=1.0, rho=1.0, m=1.0, big_m=2.0,
                       f=Nonlinearity("chafee_infante"),
                       a=DiffusionLaw("inverse_decay"), l="l2_norm_sq",
                       phi=phi)
    dtau = 1e-4
    # warm-up triggers compilation in the jit mode
    solve_quasilinear(spec, 10 * dtau, dtau)
    solve_semilinear(spec, 10 * dtau, dtau)

    t0 = time.perf_counter()
    q = solve_quasilinear(spec, steps * dtau, dtau)
    t1 = time.perf_counter()
    s, tc, _ = solve_semilinear(spec, steps * dtau, dtau)
    t2 = time.perf_counter()
    return {
        "quasilinear_s": t1 - t0,
        "semilinear_s": t2 - t1,
        "steps": steps,
        "n": n,
        "checksum": float(np.sum(q.states[-1]) + np.sum(s.states[-1])),
    }


def main():
    rows = []
    for flag in ("1", "0"):
        env = dict(os.environ, NLDS_NUMBA=flag)
        steps = 4000 if flag == "1" else 400  # fallback is slow; scale down
        proc = subprocess.run(
            [sys.executable, __file__, "--single", f"--steps={steps}"],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            raise SystemExit(1)
        rows.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    jit, plain = rows
    print(f"grid n = {jit['n']}")
    for key, label in (("quasilinear_s", "direct solver"),
                       ("semilinear_s", "rescaled solver")):
        a = jit[key] / jit["steps"]
        b = plain[key] / plain["steps"]
        print(f"{label:16s}  jit {a*1e6:8.2f} us/step   "
              f"fallback {b*1e6:8.2f} us/step   speedup x{b/a:,.0f}")


if __name__ == "__main__":
    if "--single" in sys.argv:
        steps = 4000
        for a in sys.argv:
            if a.startswith("--steps="):
                steps = int(a.split("=")[1])
        from nlds import NUMBA_ENABLED

        res = run_case(steps=steps)
        res["jit"] = NUMBA_ENABLED
        print(json.dumps(res))
    else:
        main()
