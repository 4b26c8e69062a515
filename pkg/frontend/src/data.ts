/**
 * Readers for the nlds artifact schemas (schema_version 1). Everything is
 * validated up front; a mismatch throws SchemaError naming the offending
 * field so the CLI can exit nonzero with a useful message.
 */
import { readFileSync } from "fs";
import Papa from "papaparse";
import { z } from "zod";

export class SchemaError extends Error {}

function parseCsv(path: string, expectedHeader: string[]): number[][] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  const header = rows[0] ?? [];
  for (let i = 0; i < expectedHeader.length; i++) {
    if (header[i] !== expectedHeader[i]) {
      throw new SchemaError(
        `${path}: expected column ${i} to be "${expectedHeader[i]}", got "${header[i] ?? ""}"`,
      );
    }
  }
  return rows.slice(1).map((row, r) => {
    const nums = row.map((v, c) => {
      const x = Number(v);
      if (!Number.isFinite(x)) {
        throw new SchemaError(
          `${path}: row ${r + 2}, column "${expectedHeader[c]}": not a finite number (${v})`,
        );
      }
      return x;
    });
    return nums;
  });
}

export interface TrajectoryData {
  stamps: number[]; // unique, ascending
  x: number[]; // unique node coordinates, ascending
  values: number[][]; // [stamp][node]
}

/** Long-form trajectory CSV: header stamp,x,value. */
export function readTrajectoryCsv(path: string): TrajectoryData {
  const rows = parseCsv(path, ["stamp", "x", "value"]);
  const stamps: number[] = [];
  const x: number[] = [];
  for (const [s, xi] of rows) {
    if (stamps.length === 0 || s !== stamps[stamps.length - 1]) stamps.push(s);
    if (stamps.length === 1) x.push(xi);
  }
  const values: number[][] = stamps.map(() => new Array<number>(x.length));
  rows.forEach(([s, xi, v], i) => {
    const si = Math.floor(i / x.length);
    const ni = i % x.length;
    if (stamps[si] !== s || x[ni] !== xi) {
      throw new SchemaError(
        `${path}: row ${i + 2}: stamps/x not in long-form row-major order`,
      );
    }
    values[si][ni] = v;
  });
  return { stamps, x, values };
}

export interface ThetaData {
  x: number[];
  theta: number[];
}

/** Steady-envelope CSV: header x,theta. */
export function readThetaCsv(path: string): ThetaData {
  const rows = parseCsv(path, ["x", "theta"]);
  return { x: rows.map((r) => r[0]), theta: rows.map((r) => r[1]) };
}

export interface TimechangeData {
  t: number[];
  alpha: number[];
}

/** Clock-map CSV: header t,alpha. */
export function readTimechangeCsv(path: string): TimechangeData {
  const rows = parseCsv(path, ["t", "alpha"]);
  return { t: rows.map((r) => r[0]), alpha: rows.map((r) => r[1]) };
}

const summarySchema = z.object({
  schema_version: z.literal(1),
  time_label: z.string(),
  stamps: z.array(z.number()),
  l2: z.array(z.number()),
  h10: z.array(z.number()),
  linf: z.array(z.number()),
  coeff: z.array(z.number()),
});

export type SummaryData = z.infer<typeof summarySchema>;

/** Compact trajectory summary JSON (stamps + norms + coefficient trace). */
export function readSummaryJson(path: string): SummaryData {
  const doc: unknown = JSON.parse(readFileSync(path, "utf8"));
  const res = summarySchema.safeParse(doc);
  if (!res.success) {
    const issue = res.error.issues[0];
    throw new SchemaError(`${path}: field "${issue.path.join(".")}": ${issue.message}`);
  }
  const d = res.data;
  const n = d.stamps.length;
  for (const key of ["l2", "h10", "linf", "coeff"] as const) {
    if (d[key].length !== n) {
      throw new SchemaError(`${path}: field "${key}": length ${d[key].length} != stamps length ${n}`);
    }
  }
  return d;
}

const conditionsSchema = z.object({ omega: z.number() }).passthrough();

/** Optional conditions.json; only omega is consumed (decay reference line). */
export function readOmega(path: string): number {
  const doc: unknown = JSON.parse(readFileSync(path, "utf8"));
  const res = conditionsSchema.safeParse(doc);
  if (!res.success) {
    const issue = res.error.issues[0];
    throw new SchemaError(`${path}: field "${issue.path.join(".")}": ${issue.message}`);
  }
  return res.data.omega;
}
