/** Least-squares slope of log(y) against t, skipping non-positive samples
 * (the decay-rate estimate for the norms figure). */
export function logSlope(t: number[], y: number[]): number {
  const ts: number[] = [];
  const ls: number[] = [];
  for (let i = 0; i < t.length; i++) {
    if (y[i] > 0) {
      ts.push(t[i]);
      ls.push(Math.log(y[i]));
    }
  }
  const n = ts.length;
  if (n < 2) throw new Error("need at least two positive samples to fit a slope");
  const mt = ts.reduce((a, b) => a + b, 0) / n;
  const ml = ls.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (ts[i] - mt) * (ls[i] - ml);
    den += (ts[i] - mt) * (ts[i] - mt);
  }
  if (den === 0) throw new Error("degenerate time axis");
  return num / den;
}
