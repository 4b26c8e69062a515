#!/usr/bin/env node
/**
 * plots render --kind <heatmap|norms|envelope|timechange> --in <dir> --out <file.svg>
 *
 * Reads only the stable CSV/JSON artifacts written by the nlds CLI. Exit 0 on
 * success; exit 1 with the offending field on schema mismatch or usage error.
 */
import { existsSync, writeFileSync } from "fs";
import { join } from "path";
import {
  SchemaError,
  readOmega,
  readSummaryJson,
  readThetaCsv,
  readTimechangeCsv,
  readTrajectoryCsv,
} from "./data.js";
import {
  renderEnvelope,
  renderHeatmap,
  renderNorms,
  renderTimechange,
} from "./figures.js";

const KINDS = ["heatmap", "norms", "envelope", "timechange"] as const;
type Kind = (typeof KINDS)[number];

function firstExisting(dir: string, names: string[]): string {
  for (const n of names) {
    const p = join(dir, n);
    if (existsSync(p)) return p;
  }
  throw new SchemaError(`none of [${names.join(", ")}] found in ${dir}`);
}

export function renderKind(kind: Kind, inDir: string): string {
  switch (kind) {
    case "heatmap":
      return renderHeatmap(
        readTrajectoryCsv(firstExisting(inDir, ["trajectory.csv", "heat_trajectory.csv"])),
      );
    case "norms": {
      const summary = readSummaryJson(
        firstExisting(inDir, ["heat_trajectory.summary.json", "trajectory.summary.json"]),
      );
      let omega = Math.PI * Math.PI;
      const cond = join(inDir, "conditions.json");
      if (existsSync(cond)) omega = readOmega(cond);
      const { svg, slope } = renderNorms(summary, omega);
      console.log(`fitted_slope=${slope.toPrecision(8)}`);
      return svg;
    }
    case "envelope":
      return renderEnvelope(
        readThetaCsv(firstExisting(inDir, ["theta.csv"])),
        readTrajectoryCsv(firstExisting(inDir, ["trajectory.csv", "heat_trajectory.csv"])),
      );
    case "timechange":
      return renderTimechange(
        readTimechangeCsv(firstExisting(inDir, ["timechange.csv", "alpha0.csv"])),
      );
  }
}

function usage(): void {
  console.error(
    "usage: plots render --kind <heatmap|norms|envelope|timechange> --in <dir> --out <file.svg>",
  );
}

export function main(argv: string[]): number {
  if (argv[0] !== "render") {
    usage();
    return 1;
  }
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || argv[i + 1] === undefined) {
      usage();
      return 1;
    }
    opts.set(argv[i].slice(2), argv[i + 1]);
  }
  const kind = opts.get("kind") as Kind | undefined;
  const inDir = opts.get("in");
  const out = opts.get("out");
  if (!kind || !KINDS.includes(kind) || !inDir || !out) {
    usage();
    return 1;
  }
  try {
    const svg = renderKind(kind, inDir);
    writeFileSync(out, svg);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof Error) {
      console.error(`plots: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const isDirectRun =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
