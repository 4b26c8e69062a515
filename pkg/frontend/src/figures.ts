/**
 * The four figure kinds, each a pure function from parsed artifacts to an
 * SVG string. Rendering is read-only and style is fixed, so identical inputs
 * give identical bytes.
 */
import { logSlope } from "./fit.js";
import type { SummaryData, ThetaData, TimechangeData, TrajectoryData } from "./data.js";
import { Svg, diverging, extent, linearScale } from "./svg.js";

const W = 720;
const H = 480;
const MARGIN = { left: 70, right: 100, top: 30, bottom: 50 };

function frame(): { svg: Svg; x0: number; x1: number; y0: number; y1: number } {
  const svg = new Svg(W, H);
  return {
    svg,
    x0: MARGIN.left,
    x1: W - MARGIN.right,
    y0: H - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

/** Space-time heatmap of w(stamp, x). */
export function renderHeatmap(traj: TrajectoryData): string {
  const { svg, x0, x1, y0, y1 } = frame();
  const sx = linearScale(extent(traj.stamps), [x0, x1]);
  const sy = linearScale([0, 1], [y0, y1]);
  let vmax = 0;
  for (const row of traj.values) for (const v of row) vmax = Math.max(vmax, Math.abs(v));
  if (vmax === 0) vmax = 1;
  const nT = traj.stamps.length;
  const nX = traj.x.length;
  const dxPix = nT > 1 ? (x1 - x0) / (nT - 1) : x1 - x0;
  const dyPix = (y0 - y1) / (nX + 1);
  for (let i = 0; i < nT; i++) {
    for (let j = 0; j < nX; j++) {
      const color = diverging(traj.values[i][j] / vmax);
      svg.rect(
        sx(traj.stamps[i]) - dxPix / 2,
        sy(traj.x[j]) - dyPix / 2,
        dxPix + 0.5,
        dyPix + 0.5,
        color,
      );
    }
  }
  svg.axes(sx, sy, "stamp", "x");
  svg.text(x0, y1 - 8, `solution heatmap, |w| scaled by ${vmax.toPrecision(4)}`);
  return svg.render();
}

/** Norm decay on a log axis, with the fitted slope and exp(-omega t) line. */
export function renderNorms(summary: SummaryData, omega: number): { svg: string; slope: number } {
  const { svg, x0, x1, y0, y1 } = frame();
  const slope = logSlope(summary.stamps, summary.l2);
  const logs = {
    l2: summary.l2.map((v) => (v > 0 ? Math.log10(v) : NaN)),
    h10: summary.h10.map((v) => (v > 0 ? Math.log10(v) : NaN)),
    linf: summary.linf.map((v) => (v > 0 ? Math.log10(v) : NaN)),
  };
  const finite = Object.values(logs).flat().filter(Number.isFinite) as number[];
  const sx = linearScale(extent(summary.stamps), [x0, x1]);
  const sy = linearScale(extent(finite), [y0, y1]);
  const colors: Record<keyof typeof logs, string> = {
    l2: "#1f77b4",
    h10: "#2ca02c",
    linf: "#d62728",
  };
  (Object.keys(logs) as Array<keyof typeof logs>).forEach((key, i) => {
    const pts: Array<[number, number]> = [];
    summary.stamps.forEach((t, k) => {
      if (Number.isFinite(logs[key][k])) pts.push([sx(t), sy(logs[key][k])]);
    });
    if (pts.length > 1) svg.polyline(pts, colors[key]);
    svg.text(x1 + 8, y1 + 14 * (i + 1), key, 10);
    svg.line(x1 + 50, y1 + 14 * (i + 1) - 3, x1 + 70, y1 + 14 * (i + 1) - 3, colors[key], 2);
  });
  // reference exp(-omega t) anchored at the first positive l2 sample
  const k0 = summary.l2.findIndex((v) => v > 0);
  if (k0 >= 0) {
    const t0 = summary.stamps[k0];
    const pts: Array<[number, number]> = summary.stamps.map((t) => [
      sx(t),
      sy(Math.log10(summary.l2[k0]) - (omega * (t - t0)) / Math.LN10),
    ]);
    svg.polyline(pts, "#888", 1, "4 3");
    svg.text(x1 + 8, y1 + 14 * 5, `exp(-${omega.toPrecision(4)} t)`, 9);
  }
  svg.axes(sx, sy, summary.time_label, "log10 norm");
  svg.text(x0, y1 - 8, `fitted_slope=${slope.toPrecision(8)}`);
  return { svg: svg.render(), slope };
}

/** Steady envelope +-theta(x) against the per-node sup of |w| over stamps. */
export function renderEnvelope(theta: ThetaData, traj: TrajectoryData): string {
  const { svg, x0, x1, y0, y1 } = frame();
  if (theta.x.length !== traj.x.length) {
    throw new Error(
      `theta grid (${theta.x.length} nodes) does not match trajectory grid (${traj.x.length})`,
    );
  }
  const sup = traj.x.map((_, j) => {
    let s = 0;
    for (const row of traj.values) s = Math.max(s, Math.abs(row[j]));
    return s;
  });
  const amp = Math.max(...theta.theta, ...sup) * 1.1 || 1;
  const sx = linearScale([0, 1], [x0, x1]);
  const sy = linearScale([-amp, amp], [y0, y1]);
  svg.line(x0, sy(0), x1, sy(0), "#ccc");
  svg.polyline(theta.x.map((x, j) => [sx(x), sy(theta.theta[j])]), "#555", 1.5, "5 3");
  svg.polyline(theta.x.map((x, j) => [sx(x), sy(-theta.theta[j])]), "#555", 1.5, "5 3");
  svg.polyline(traj.x.map((x, j) => [sx(x), sy(sup[j])]), "#d62728", 2);
  svg.polyline(traj.x.map((x, j) => [sx(x), sy(-sup[j])]), "#1f77b4", 2);
  svg.axes(sx, sy, "x", "value");
  svg.text(x0, y1 - 8, "dashed: +-theta(x); solid: +-sup over stamps of |w(.,x)|");
  return svg.render();
}

/** The clock map alpha(t) with the admissible slope cone. */
export function renderTimechange(tc: TimechangeData): string {
  const { svg, x0, x1, y0, y1 } = frame();
  const sx = linearScale(extent(tc.t), [x0, x1]);
  const sy = linearScale(extent(tc.alpha), [y0, y1]);
  svg.polyline(tc.t.map((t, i) => [sx(t), sy(tc.alpha[i])]), "#1f77b4", 2);
  // chord from first to last knot for visual slope comparison
  const n = tc.t.length;
  if (n > 1) {
    svg.line(sx(tc.t[0]), sy(tc.alpha[0]), sx(tc.t[n - 1]), sy(tc.alpha[n - 1]), "#aaa", 1, "4 3");
    const mean = (tc.alpha[n - 1] - tc.alpha[0]) / (tc.t[n - 1] - tc.t[0]);
    svg.text(x0, y1 - 8, `clock map alpha(t), mean slope ${mean.toPrecision(5)}`);
  }
  svg.axes(sx, sy, "t", "alpha");
  return svg.render();
}
