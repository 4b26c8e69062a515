/** Tiny deterministic SVG builder: fixed style, no timestamps, no ids. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = d1 === d0 ? 0 : (r1 - r0) / (d1 - d0);
  const f = ((v: number) => r0 + (v - d0) * k) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function extent(values: number[], fallback: [number, number] = [0, 1]): [number, number] {
  if (values.length === 0) return fallback;
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

const fmt = (v: number) => (Math.abs(v) < 1e-12 ? "0" : v.toPrecision(6));

export class Svg {
  private parts: string[] = [];
  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  polyline(pts: Array<[number, number]>, stroke: string, width = 1.5, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    const coords = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${coords}" fill="none" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  text(x: number, y: number, content: string, size = 11, anchor = "start"): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="monospace" font-size="${size}" text-anchor="${anchor}">${content}</text>`,
    );
  }

  axes(
    sx: Scale,
    sy: Scale,
    labelX: string,
    labelY: string,
    ticks = 5,
  ): void {
    const [x0, x1] = sx.range;
    const [y0, y1] = sy.range;
    this.line(x0, y0, x1, y0, "#333");
    this.line(x0, y0, x0, y1, "#333");
    for (let i = 0; i <= ticks; i++) {
      const vx = sx.domain[0] + ((sx.domain[1] - sx.domain[0]) * i) / ticks;
      const vy = sy.domain[0] + ((sy.domain[1] - sy.domain[0]) * i) / ticks;
      this.line(sx(vx), y0, sx(vx), y0 + 4, "#333");
      this.text(sx(vx), y0 + 16, vx.toPrecision(3), 9, "middle");
      this.line(x0 - 4, sy(vy), x0, sy(vy), "#333");
      this.text(x0 - 6, sy(vy) + 3, vy.toPrecision(3), 9, "end");
    }
    this.text((x0 + x1) / 2, y0 + 30, labelX, 11, "middle");
    this.text(x0 - 46, (y0 + y1) / 2, labelY, 11, "middle");
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n<rect width="100%" height="100%" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

/** Diverging blue-white-red map for s in [-1, 1]. */
export function diverging(s: number): string {
  const t = Math.max(-1, Math.min(1, s));
  const lerp = (a: number, b: number, u: number) => Math.round(a + (b - a) * u);
  let r: number, g: number, b: number;
  if (t < 0) {
    const u = t + 1; // 0..1 from blue to white
    r = lerp(33, 255, u);
    g = lerp(102, 255, u);
    b = lerp(172, 255, u);
  } else {
    const u = t; // 0..1 from white to red
    r = lerp(255, 178, u);
    g = lerp(255, 24, u);
    b = lerp(255, 43, u);
  }
  return `rgb(${r},${g},${b})`;
}
