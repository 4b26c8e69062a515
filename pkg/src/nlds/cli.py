"""Batch driver: parse a JSON config, dispatch subcommands, write CSV/JSON
artifacts with stable schemas.

    nlds <subcommand> --config <path> [--out <dir>] [--dx ...] [--dtau ...]
         [--seed ...]

Subcommands: simulate | transform-check | delay-window | envelope |
conditions | attractor | selftest. Exit codes: 0 success, 1 unknown
subcommand, 2 validation failure, 3 numerical blow-up / I/O failure.

CSV headers are exactly: trajectory "stamp,x,value"; theta "x,theta";
timechange "t,alpha". Numbers are written in full round-trip precision, and a
fixed config + seed reproduces every artifact byte for byte. Every output
directory carries a manifest.json embedding the resolved config.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .attractor import (
    absorption_time,
    containment_check,
    omega_limit_estimate,
    run_bundle,
    save_bundle,
)
from .comparison import sandwich_report
from .dissipativity import full_report
from .grid import Grid, GridFunction
from .integrator import (
    BlowUpError,
    SpecInvalidError,
    Trajectory,
    pushforward,
    solve_quasilinear,
    solve_semilinear,
)
from .model import (
    DiffusionLaw,
    Forcing,
    InitialFunction,
    Nonlinearity,
    ProblemSpec,
    validate_spec,
)
from .timechange import compute_alpha0, reciprocal_window_quadrature

SCHEMA_VERSION = 1

SUBCOMMANDS = (
    "simulate",
    "transform-check",
    "delay-window",
    "envelope",
    "conditions",
    "attractor",
    "selftest",
)

DEFAULT_CONFIG = {
    "schema_version": SCHEMA_VERSION,
    "problem": {
        "lambda": 1.0,
        "gamma": 1.0,
        "rho": 1.0,
        "m": 1.0,
        "M": 2.0,
        "f": {"kind": "chafee_infante"},
        "a": {"kind": "inverse_decay"},
        "l": "l2_norm_sq",
        "h": {"kind": "zero"},
        "phi": {"kind": "sine_mode", "amplitude": 0.8, "mode": 1, "ramp": 0.3},
        "c0": 1.0,
    },
    "discretization": {"dx": 1.0 / 256, "dtau": 1e-4, "dt": 1e-4, "ds": 1e-5},
    "run": {
        "T": 2.0,
        "seed": 1234,
        "snap_every": 0.05,
        "bundle_members": 8,
        "window_fraction": 0.25,
        "n_phi": 5,
        "n_intervals": 5,
        "tolerances": {
            "heat_rel": 1e-2,
            "equivalence_sup_l2": 5e-2,
            "sandwich": 1e-4,
            "containment": 1e-6,
            "scalar_delay": 2e-2,
            "theta_closed_form": 1e-4,
        },
    },
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def make_phi(recipe: dict, grid: Grid, rho: float,
             rng: np.random.Generator | None = None,
             theta: GridFunction | None = None,
             n_sigma: int = 33) -> InitialFunction:
    """Materialize an initial-function recipe on the grid."""
    kind = recipe.get("kind", "zero")
    x = grid.x
    if kind == "zero":
        return InitialFunction.zero(grid, rho)
    if kind == "sine_mode":
        amp = float(recipe.get("amplitude", 1.0))
        mode = int(recipe.get("mode", 1))
        ramp = float(recipe.get("ramp", 0.0))
        return InitialFunction.from_callable(
            grid, rho,
            lambda s, xv: amp * (1.0 + ramp * s) * np.sin(mode * np.pi * xv),
            n_sigma,
        )
    if kind == "random_fourier":
        if rng is None:
            raise ConfigError("random_fourier phi needs a seeded generator")
        amp = float(recipe.get("amplitude", 1.0))
        n_modes = int(recipe.get("modes", 4))
        c = rng.standard_normal(n_modes)
        d = rng.uniform(-0.5, 0.5, n_modes)
        sig = np.linspace(-rho, 0.0, n_sigma)
        basis = np.stack([np.sin((k + 1) * np.pi * x) for k in range(n_modes)])
        samples = np.empty((n_sigma, grid.n_interior))
        for i, s in enumerate(sig):
            coeff = c * (1.0 + d * s)
            samples[i] = coeff @ basis
        peak = np.max(np.abs(samples))
        if peak > 0.0:
            samples *= amp / peak
        return InitialFunction(grid, rho, samples)
    if kind == "theta_scaled":
        if theta is None:
            raise ConfigError("theta_scaled phi needs the steady envelope")
        if rng is None:
            raise ConfigError("theta_scaled phi needs a seeded generator")
        r = rng.uniform(-1.0, 1.0)
        wob = rng.uniform(0.0, 0.5)
        sig = np.linspace(-rho, 0.0, n_sigma)
        mod = r * (1.0 - wob * np.sin(np.pi * sig / max(rho, 1e-12)) ** 2)
        samples = mod[:, None] * theta.values[None, :]
        return InitialFunction(grid, rho, samples)
    raise ConfigError(f"unknown phi kind {kind!r}")


def build_spec(cfg: dict, rng: np.random.Generator | None = None,
               theta: GridFunction | None = None) -> ProblemSpec:
    p = cfg["problem"]
    d = cfg["discretization"]
    grid = Grid.from_dx(float(d["dx"]))
    f = Nonlinearity(p["f"]["kind"], float(p["f"].get("slope", 1.0)))
    a = DiffusionLaw(
        p["a"]["kind"], float(p["a"].get("value", 1.0)),
        float(p["a"].get("intercept", 1.0)), float(p["a"].get("slope", 0.0)),
    )
    h = Forcing(p["h"]["kind"], float(p["h"].get("value", 0.0)))
    rho = float(p["rho"])
    phi = make_phi(p["phi"], grid, rho, rng, theta)
    return ProblemSpec(
        lam=float(p["lambda"]), gamma=float(p["gamma"]), rho=rho,
        m=float(p["m"]), big_m=float(p["M"]), f=f, a=a, l=p["l"],
        phi=phi, h=h,
    )


def emit_trajectory_csv(traj: Trajectory, path) -> None:
    x = traj.grid.x
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("stamp,x,value\n")
        for k in range(traj.n_stamps):
            st = float(traj.stamps[k])
            row = traj.states[k]
            for xi, vi in zip(x, row):
                fh.write(f"{st!r},{float(xi)!r},{float(vi)!r}\n")


def emit_theta_csv(theta: GridFunction, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,theta\n")
        for xi, vi in zip(theta.grid.x, theta.values):
            fh.write(f"{float(xi)!r},{float(vi)!r}\n")


def emit_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _traj_summary(traj: Trajectory, thin: int = 1) -> dict:
    t = traj.thin(thin) if thin > 1 else traj
    doc = t.summary_jsonable()
    doc["schema_version"] = SCHEMA_VERSION
    return doc


def _manifest(cfg: dict, subcommand: str, artifacts: list[str]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": cfg,
        "artifacts": sorted(artifacts),
    }


def _load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            user = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return _merge(DEFAULT_CONFIG, user)


def _apply_overrides(cfg: dict, args) -> dict:
    d = cfg["discretization"]
    r = cfg["run"]
    if args.dx is not None:
        d["dx"] = args.dx
    if args.dtau is not None:
        d["dtau"] = args.dtau
        d["dt"] = args.dtau
    if args.seed is not None:
        r["seed"] = args.seed
    if getattr(args, "T", None) is not None:
        r["T"] = args.T
    return cfg


# ---------------------------------------------------------------- subcommands


def cmd_simulate(cfg: dict, out: Path) -> list[str]:
    rng = np.random.default_rng(int(cfg["run"]["seed"]))
    spec = build_spec(cfg, rng)
    traj = solve_quasilinear(
        spec, float(cfg["run"]["T"]), float(cfg["discretization"]["dtau"])
    )
    thin = max(1, traj.n_stamps // 201)
    emit_trajectory_csv(traj.thin(thin), out / "trajectory.csv")
    emit_json(_traj_summary(traj, thin), out / "trajectory.summary.json")
    return ["trajectory.csv", "trajectory.summary.json"]


def cmd_transform_check(cfg: dict, out: Path) -> list[str]:
    rng = np.random.default_rng(int(cfg["run"]["seed"]))
    spec = build_spec(cfg, rng)
    d = cfg["discretization"]
    T = float(cfg["run"]["T"])
    dtau = float(d["dtau"])
    dt = float(d["dt"])
    qtraj = solve_quasilinear(spec, T, dtau)
    straj, tc, t_start = solve_semilinear(
        spec, T / spec.m + 2 * dt, dt, tau_stop=T, ds=float(d["ds"])
    )
    tau_hi = min(T, tc.alpha_range[1])
    tau_grid = np.linspace(0.0, tau_hi, 201)
    pushed = pushforward(straj, tc, tau_grid)
    direct = np.vstack([qtraj.interp_state(float(s)) for s in tau_grid])
    dxv = spec.phi.grid.dx
    diffs = np.sqrt(np.sum((pushed.states - direct) ** 2, axis=1) * dxv)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "sup_l2_difference": float(np.max(diffs)),
        "tau_grid": [float(v) for v in tau_grid],
        "l2_differences": [float(v) for v in diffs],
        "t_start": t_start,
    }
    emit_json(doc, out / "equivalence.json")
    tc.export_csv(out / "timechange.csv")
    return ["equivalence.json", "timechange.csv"]


def cmd_delay_window(cfg: dict, out: Path) -> list[str]:
    rng = np.random.default_rng(int(cfg["run"]["seed"]))
    d = cfg["discretization"]
    n_phi = int(cfg["run"].get("n_phi", 5))
    results = []
    for _ in range(n_phi):
        cfg_phi = json.loads(json.dumps(cfg))
        cfg_phi["problem"]["phi"] = {"kind": "random_fourier", "amplitude": 1.0,
                                     "modes": 4}
        spec = build_spec(cfg_phi, rng)
        t_start, tc = compute_alpha0(spec.phi, spec, float(d["ds"]))
        quad = reciprocal_window_quadrature(spec.phi, spec)
        results.append({
            "t_start": t_start,
            "neg_t_start": -t_start,
            "reciprocal_quadrature": quad,
            "lower_bound": spec.rho / spec.big_m,
            "upper_bound": spec.rho / spec.m,
        })
    spec0 = build_spec(cfg, np.random.default_rng(int(cfg["run"]["seed"])))
    _, tc0 = compute_alpha0(spec0.phi, spec0, float(d["ds"]))
    # thin the alpha0 map for the artifact
    step = max(1, tc0.t_knots.size // 500)
    from .timechange import TimeChange

    idx = np.arange(0, tc0.t_knots.size, step)
    if idx[-1] != tc0.t_knots.size - 1:
        idx = np.append(idx, tc0.t_knots.size - 1)
    TimeChange(tc0.t_knots[idx], tc0.alpha_knots[idx]).export_csv(
        out / "alpha0.csv"
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "ds": float(d["ds"]),
        "windows": results,
        "all_within_bounds": all(
            r["lower_bound"] - float(d["ds"]) * spec0.big_m
            <= r["neg_t_start"]
            <= r["upper_bound"] + float(d["ds"]) * spec0.big_m
            for r in results
        ),
    }
    emit_json(doc, out / "delay_window.json")
    return ["delay_window.json", "alpha0.csv"]


def cmd_envelope(cfg: dict, out: Path) -> list[str]:
    rng = np.random.default_rng(int(cfg["run"]["seed"]))
    spec = build_spec(cfg, rng)
    d = cfg["discretization"]
    n_int = int(cfg["run"].get("n_intervals", 5))
    dt = float(d["dt"])
    straj, tc, _ = solve_semilinear(
        spec, spec.rho / spec.m * n_int + 2 * dt, dt,
        tau_stop=n_int * spec.rho, ds=float(d["ds"]),
    )
    rep = sandwich_report(spec, straj, tc, n_int)
    rep["schema_version"] = SCHEMA_VERSION
    emit_json(rep, out / "envelope.json")
    return ["envelope.json"]


def cmd_conditions(cfg: dict, out: Path) -> list[str]:
    rng = np.random.default_rng(int(cfg["run"]["seed"]))
    spec = build_spec(cfg, rng)
    c0 = float(cfg["problem"].get("c0", 1.0))
    rep = full_report(spec, c0)
    doc = rep.to_jsonable()
    doc["schema_version"] = SCHEMA_VERSION
    emit_json(doc, out / "conditions.json")
    arts = ["conditions.json"]
    if rep.theta is not None:
        emit_theta_csv(rep.theta, out / "theta.csv")
        arts.append("theta.csv")
    return arts


def cmd_attractor(cfg: dict, out: Path) -> list[str]:
    rng = np.random.default_rng(int(cfg["run"]["seed"]))
    # the steady envelope is needed before theta-relative members can be drawn
    base_cfg = json.loads(json.dumps(cfg))
    base_cfg["problem"]["phi"] = {"kind": "zero"}
    spec0 = build_spec(base_cfg, rng)
    c0 = float(cfg["problem"].get("c0", 1.0))
    rep = full_report(spec0, c0)
    if rep.theta is None:
        raise ConfigError(
            "attractor run needs the conservative smallness condition to hold"
        )
    grid = spec0.phi.grid
    n_members = int(cfg["run"].get("bundle_members", 8))
    members = [
        make_phi(cfg["problem"]["phi"], grid, spec0.rho, rng, rep.theta)
        for _ in range(n_members)
    ]
    dtau = float(cfg["discretization"]["dtau"])
    run = run_bundle(members, spec0, float(cfg["run"]["T"]),
                     float(cfg["run"]["snap_every"]), dtau)
    wf = float(cfg["run"].get("window_fraction", 0.25))
    t_abs = absorption_time(run, rep.k_abs, "linf")
    cont = containment_check(run, rep.theta, wf)
    reps = omega_limit_estimate(run, wf)
    reports = {
        "absorption_time": t_abs,
        "containment": cont,
        "n_omega_representatives": len(reps),
        "k_abs": rep.k_abs,
    }
    save_bundle(run, out / "attractor", reports)
    arts = ["attractor/manifest.json"] + [
        f"attractor/member_{m:03d}.csv" for m in run.member_ids
    ]
    return arts


def cmd_selftest(cfg: dict, out: Path) -> list[str]:
    """Reduced-resolution sweep exercising every pipeline and artifact kind.

    The canonical-resolution acceptance gate lives in tests/test_acceptance.py;
    this produces small deterministic artifacts (fixed seed => byte-identical)
    and a coarse pass/fail report at tolerances scaled for the coarse grid.
    """
    cfg = json.loads(json.dumps(cfg))
    cfg["discretization"].update({"dx": 1.0 / 64, "dtau": 1e-3, "dt": 1e-3,
                                  "ds": 1e-4})
    cfg["run"].update({"T": 1.0, "snap_every": 0.1, "bundle_members": 4,
                       "n_phi": 5, "n_intervals": 2})
    tol = dict(DEFAULT_CONFIG["run"]["tolerances"])
    tol.update(cfg["run"].get("tolerances", {}))
    arts: list[str] = []
    checks: dict[str, bool] = {}
    measured: dict[str, float] = {}

    # pure heat run: the norms-figure artifact and the decay oracle
    heat_cfg = json.loads(json.dumps(cfg))
    heat_cfg["problem"].update({
        "gamma": 0.0,
        "f": {"kind": "zero"},
        "a": {"kind": "constant", "value": 1.0},
        "M": 1.0,
        "phi": {"kind": "sine_mode", "amplitude": 1.0, "mode": 1, "ramp": 0.0},
    })
    heat_spec = build_spec(heat_cfg, np.random.default_rng(0))
    heat = solve_quasilinear(heat_spec, 0.5, 1e-3)
    thin = max(1, heat.n_stamps // 201)
    emit_trajectory_csv(heat.thin(thin), out / "heat_trajectory.csv")
    emit_json(_traj_summary(heat, thin), out / "heat_trajectory.summary.json")
    arts += ["heat_trajectory.csv", "heat_trajectory.summary.json"]
    nrm = heat.norms()
    k01 = int(round(0.1 / 1e-3))
    rel = abs(nrm["linf"][k01] - np.exp(-np.pi ** 2 * 0.1)) / np.exp(-np.pi ** 2 * 0.1)
    measured["heat_rel"] = float(rel)
    checks["heat_decay"] = bool(rel < tol["heat_rel"])

    # sine-mode amplitude vs a refined scalar backward-Euler delay integrator
    dde_cfg = json.loads(json.dumps(heat_cfg))
    dde_cfg["problem"]["gamma"] = 1.0
    dde_spec = build_spec(dde_cfg, np.random.default_rng(0))
    dde_traj = solve_quasilinear(dde_spec, 1.0, 1e-3)
    fine = 1e-5
    n_fine = int(round(1.0 / fine))
    lag = int(round(dde_spec.rho / fine))
    c = np.ones(n_fine + 1)
    rate = np.pi ** 2
    for k in range(n_fine):
        c_delay = 1.0 if k < lag else c[k - lag]
        c[k + 1] = (c[k] + fine * c_delay) / (1.0 + fine * rate)
    sel = np.arange(0, dde_traj.n_stamps, 50)
    pde_amp = np.max(np.abs(dde_traj.states[sel]), axis=1)
    ref_amp = np.abs(c[(sel * 100).astype(int)])
    measured["scalar_delay"] = float(np.max(np.abs(pde_amp - ref_amp)))
    checks["scalar_delay_mode"] = bool(
        measured["scalar_delay"] < tol["scalar_delay"]
    )

    # steady envelope against its closed form at the coarse resolution
    from .dissipativity import closed_form_theta, solve_theta
    from .grid import Grid as _Grid

    g64 = _Grid.from_dx(1.0 / 64)
    th = solve_theta(1.0, 1.0, g64)
    measured["theta_closed_form"] = float(
        np.max(np.abs(th.values - closed_form_theta(1.0, 1.0, g64.x)))
    )
    checks["theta_closed_form"] = bool(
        measured["theta_closed_form"] < tol["theta_closed_form"]
    )

    arts += cmd_simulate(cfg, out)
    arts += cmd_transform_check(cfg, out)
    eq = json.loads((out / "equivalence.json").read_text())
    measured["equivalence_sup_l2"] = eq["sup_l2_difference"]
    checks["equivalence"] = bool(
        eq["sup_l2_difference"] < tol["equivalence_sup_l2"]
    )
    arts += cmd_delay_window(cfg, out)
    dw = json.loads((out / "delay_window.json").read_text())
    checks["delay_windows_within_bounds"] = bool(dw["all_within_bounds"])
    arts += cmd_conditions(cfg, out)
    arts += cmd_envelope(cfg, out)
    env = json.loads((out / "envelope.json").read_text())
    measured["sandwich"] = env["max_violation"]
    checks["sandwich"] = bool(env["max_violation"] < tol["sandwich"])
    att_cfg = json.loads(json.dumps(cfg))
    att_cfg["run"].update({"T": 2.0, "snap_every": 0.05})
    att_cfg["problem"]["phi"] = {"kind": "theta_scaled"}
    arts += cmd_attractor(att_cfg, out)
    att = json.loads((out / "attractor" / "manifest.json").read_text())
    measured["containment"] = att["reports"]["containment"]["window_violation"]
    checks["containment"] = bool(measured["containment"] < tol["containment"])
    doc = {
        "schema_version": SCHEMA_VERSION,
        "checks": checks,
        "measured": measured,
        "tolerances": tol,
        "all_passed": all(checks.values()),
    }
    emit_json(doc, out / "selftest_report.json")
    arts.append("selftest_report.json")
    return arts


HANDLERS = {
    "simulate": cmd_simulate,
    "transform-check": cmd_transform_check,
    "delay-window": cmd_delay_window,
    "envelope": cmd_envelope,
    "conditions": cmd_conditions,
    "attractor": cmd_attractor,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__)
        return 0 if argv else 1
    sub = argv[0]
    if sub not in SUBCOMMANDS:
        print(__doc__)
        print(f"unknown subcommand: {sub!r}", file=sys.stderr)
        return 1
    parser = argparse.ArgumentParser(prog=f"nlds {sub}")
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default="out")
    parser.add_argument("--dx", type=float, default=None)
    parser.add_argument("--dtau", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--T", type=float, default=None)
    args = parser.parse_args(argv[1:])

    try:
        cfg = _load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        # scalar validation probe; phi recipes that need run-time data (the
        # steady envelope, drawn randomness) are materialized by the handlers
        probe_cfg = json.loads(json.dumps(cfg))
        probe_cfg["problem"]["phi"] = {"kind": "zero"}
        spec = build_spec(probe_cfg)
        diags = validate_spec(spec)
        for name, value in cfg["run"].get("tolerances", {}).items():
            if not (isinstance(value, (int, float)) and value > 0):
                diags.append(f"tolerance {name!r} must be positive")
        hard = [d for d in diags if "clamp" not in d]
        if hard:
            for d in hard:
                print(f"config invalid: {d}", file=sys.stderr)
            return 2
        for d in diags:
            print(f"warning: {d}", file=sys.stderr)
    except (ConfigError, SpecInvalidError, ValueError) as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        artifacts = HANDLERS[sub](cfg, out)
        emit_json(_manifest(cfg, sub, artifacts), out / "manifest.json")
    except (SpecInvalidError, ConfigError, ValueError) as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 3
    print(f"{sub}: wrote {len(artifacts)} artifact(s) to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
