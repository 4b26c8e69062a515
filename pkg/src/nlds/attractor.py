"""Finite-bundle approximation of the set-valued solution operator: orbits of
finite sets of initial functions, Hausdorff semidistance, omega-limit
estimates, absorption times, and containment against the steady envelope.

A deterministic scheme cannot branch at one initial function, so set dynamics
are approximated by bundles of initial functions; the omega-limit surrogate is
forward-only. Bundle members integrate independently (parallelizable with no
shared state); everything after the join is deterministic in member order.
Bundle runs are autonomous: forcing must be identically zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import GridFunction, norms
from .integrator import BlowUpError, Trajectory, solve_quasilinear
from .model import InitialFunction, ProblemSpec

NORM_KINDS = ("l2", "h10", "linf")


def _norm_of(diff: np.ndarray, grid, kind: str) -> float:
    gf = GridFunction(grid, diff)
    l2, h10, linf = norms(gf)
    return {"l2": l2, "h10": h10, "linf": linf}[kind]


@dataclass
class BundleSnapshot:
    """States of every member at one stamp, plus sampled history segments
    (member, sigma_sample, node) so set elements can be compared either at
    segment endpoints or over the whole delay window."""

    stamp: float
    member_ids: tuple[int, ...]
    states: np.ndarray = field(repr=False)
    segments: np.ndarray | None = field(default=None, repr=False)


@dataclass
class BundleRun:
    spec: ProblemSpec
    member_ids: tuple[int, ...]
    snapshots: list[BundleSnapshot]
    dtau: float

    @property
    def stamps(self) -> np.ndarray:
        return np.array([s.stamp for s in self.snapshots])


def run_bundle(
    members: list[InitialFunction],
    spec: ProblemSpec,
    T: float,
    snap_every: float,
    dtau: float,
    n_segment_samples: int = 9,
) -> BundleRun:
    """Integrate every member with the tau-time solver and snapshot at
    multiples of snap_every, storing each member's trailing delay segment."""
    if not members:
        raise ValueError("bundle needs at least one member")
    if not spec.h.is_zero:
        raise ValueError("bundle runs are autonomous: forcing h must be zero")
    every = int(round(snap_every / dtau))
    if every < 1:
        raise ValueError("snap_every must be at least one step")
    n_steps = int(round(T / dtau))
    snap_idx = np.arange(0, n_steps + 1, every)
    sigma_off = np.linspace(-spec.rho, 0.0, n_segment_samples)
    grid = members[0].grid

    per_member_states = []
    per_member_segments = []
    for mid, phi in enumerate(members):
        spec_m = ProblemSpec(
            lam=spec.lam, gamma=spec.gamma, rho=spec.rho, m=spec.m,
            big_m=spec.big_m, f=spec.f, a=spec.a, l=spec.l, phi=phi, h=spec.h,
        )
        try:
            traj = solve_quasilinear(spec_m, T, dtau)
        except BlowUpError as exc:
            err = BlowUpError(exc.stamp, exc.linf)
            err.args = (f"bundle member {mid}: {err.args[0]}",)
            err.member_id = mid
            raise err from exc
        per_member_states.append(traj.states[snap_idx])
        segs = np.empty((snap_idx.size, n_segment_samples, grid.n_interior))
        for si, k in enumerate(snap_idx):
            tau_s = traj.stamps[k]
            for ji, off in enumerate(sigma_off):
                tau_q = tau_s + off
                if tau_q <= 0.0:
                    segs[si, ji] = phi.eval(tau_q).values
                else:
                    segs[si, ji] = traj.interp_state(float(tau_q))
        per_member_segments.append(segs)

    snapshots = []
    ids = tuple(range(len(members)))
    for si, k in enumerate(snap_idx):
        states = np.stack([per_member_states[m][si] for m in ids])
        segments = np.stack([per_member_segments[m][si] for m in ids])
        snapshots.append(
            BundleSnapshot(float(k * dtau), ids, states, segments)
        )
    return BundleRun(spec, ids, snapshots, dtau)


def hausdorff_semidist(
    A: BundleSnapshot, B: BundleSnapshot, norm_kind: str = "l2",
    use_segments: bool = False,
) -> float:
    """sup over a in A of min over b in B of ||a - b||; asymmetric.

    With use_segments the elements are whole delay segments and the elementwise
    distance is the sup over the sigma samples of the chosen norm (the
    segment-space metric surrogate)."""
    if norm_kind not in NORM_KINDS:
        raise ValueError(f"norm_kind must be one of {NORM_KINDS}")
    if use_segments:
        if A.segments is None or B.segments is None:
            raise ValueError("snapshots carry no segment samples")
        elems_a, elems_b = A.segments, B.segments
    else:
        elems_a = A.states[:, None, :]
        elems_b = B.states[:, None, :]
    if elems_b.shape[0] == 0:
        raise ValueError("distance to an empty set is undefined")
    grid_n = elems_a.shape[2]
    from .grid import Grid

    grid = Grid(grid_n)
    worst = 0.0
    for a in elems_a:
        best = np.inf
        for b in elems_b:
            d = max(
                _norm_of(a[j] - b[j], grid, norm_kind)
                for j in range(a.shape[0])
            )
            if d < best:
                best = d
        if best > worst:
            worst = best
    return float(worst)


def scheme_error_estimate(dx: float, dtau: float) -> float:
    """Crude first-order-in-time, second-order-in-space error scale used to
    pick the default clustering radius."""
    return dtau + dx * dx


def omega_limit_estimate(
    run: BundleRun,
    window_fraction: float,
    eps_cluster: float | None = None,
) -> list[GridFunction]:
    """Cluster representatives of all states in the trailing window: a finite
    forward-only surrogate for the omega-limit set of the bundle."""
    if not (0.0 < window_fraction < 1.0):
        raise ValueError("window_fraction must be in (0,1)")
    n_snap = len(run.snapshots)
    k0 = int(np.floor(n_snap * (1.0 - window_fraction)))
    window = run.snapshots[k0:]
    if len(window) < 10:
        raise ValueError(
            f"trailing window holds {len(window)} snapshots; need >= 10"
        )
    grid = run.spec.phi.grid
    if eps_cluster is None:
        eps_cluster = 10.0 * scheme_error_estimate(grid.dx, run.dtau)
    reps: list[np.ndarray] = []
    for snap in window:
        for state in snap.states:
            assigned = False
            for r in reps:
                if _norm_of(state - r, grid, "l2") <= eps_cluster:
                    assigned = True
                    break
            if not assigned:
                reps.append(state.copy())
    return [GridFunction(grid, r) for r in reps]


def absorption_time(
    run: BundleRun, radius: float, norm_kind: str = "linf"
) -> float | None:
    """Earliest snapshot stamp after which every member stays within the
    radius ball at all remaining snapshots; None if that never happens."""
    if norm_kind not in NORM_KINDS:
        raise ValueError(f"norm_kind must be one of {NORM_KINDS}")
    grid = run.spec.phi.grid
    inside = []
    for snap in run.snapshots:
        ok = all(
            _norm_of(state, grid, norm_kind) <= radius for state in snap.states
        )
        inside.append(ok)
    entry = None
    run_ok = True
    for i in range(len(inside) - 1, -1, -1):
        run_ok = run_ok and inside[i]
        if not run_ok:
            break
        entry = i
    if entry is None:
        return None
    return float(run.snapshots[entry].stamp)


def containment_check(
    run: BundleRun,
    theta: GridFunction,
    window_fraction: float = 0.2,
    eps_cluster: float | None = None,
) -> dict:
    """Trailing-window check of |u| <= theta over members, stamps,
    history-segment samples and nodes, plus the bound on the omega-limit
    surrogate. Positive numbers are violations; nothing is clipped."""
    th = theta.values
    n_snap = len(run.snapshots)
    k0 = int(np.floor(n_snap * (1.0 - window_fraction)))
    worst = -np.inf
    for snap in run.snapshots[k0:]:
        data = snap.segments if snap.segments is not None else snap.states[:, None, :]
        worst = max(worst, float(np.max(np.abs(data) - th[None, None, :])))
    reps = omega_limit_estimate(run, window_fraction, eps_cluster)
    rep_viol = max(
        (float(np.max(np.abs(r.values) - th)) for r in reps), default=-np.inf
    )
    return {
        "window_violation": worst,
        "omega_estimate_violation": rep_viol,
        "window_start_stamp": float(run.snapshots[k0].stamp),
        "n_omega_representatives": len(reps),
    }


def save_bundle(run: BundleRun, out_dir, reports: dict | None = None) -> None:
    """Persist a bundle run: one long-form CSV per member plus a manifest
    with the spec hash, stamps and any attached reports."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = run.spec.phi.grid
    x = grid.x
    for mid in run.member_ids:
        path = out / f"member_{mid:03d}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("stamp,x,value\n")
            for snap in run.snapshots:
                st = snap.stamp
                vals = snap.states[mid]
                for xi, vi in zip(x, vals):
                    fh.write(f"{float(st)!r},{float(xi)!r},{float(vi)!r}\n")
    manifest = {
        "schema_version": 1,
        "spec_hash": run.spec.content_hash(),
        "stamps": [float(s.stamp) for s in run.snapshots],
        "member_ids": list(run.member_ids),
        "dtau": run.dtau,
        "reports": reports or {},
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
