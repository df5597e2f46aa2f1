/**
 * Assemble sweep rows into a complete (delay x message size) grid for one
 * metric. Axis values are sorted ascending; every combination must appear
 * exactly once, and cell values are carried over without any rescaling.
 */

import { CsvError, Metric, SweepRow } from "./csv.js";

export interface HeatmapGrid {
  metric: Metric;
  /** Ascending reconfiguration delays (ns), one per column. */
  alphaRNs: number[];
  /** Ascending message sizes (bytes), one per row. */
  msgBytes: number[];
  /** cells[yIndex][xIndex] = metric value at (msgBytes[y], alphaRNs[x]). */
  cells: number[][];
  max: number;
}

export function buildGrid(rows: SweepRow[], metric: Metric): HeatmapGrid {
  const alphaSet = [...new Set(rows.map((r) => r.alphaRNs))].sort((a, b) => a - b);
  const sizeSet = [...new Set(rows.map((r) => r.msgBytes))].sort((a, b) => a - b);

  const seen = new Map<string, number>();
  for (const row of rows) {
    const key = `${row.alphaRNs}|${row.msgBytes}`;
    if (seen.has(key)) {
      throw new CsvError(`duplicate grid point alpha_r_ns=${row.alphaRNs} msg_bytes=${row.msgBytes}`);
    }
    const value = row.values[metric];
    if (value === undefined) {
      throw new CsvError(`grid point alpha_r_ns=${row.alphaRNs} msg_bytes=${row.msgBytes} lacks ${metric}`);
    }
    seen.set(key, value);
  }
  if (seen.size !== alphaSet.length * sizeSet.length) {
    const missing: string[] = [];
    for (const a of alphaSet) {
      for (const m of sizeSet) {
        if (!seen.has(`${a}|${m}`)) {
          missing.push(`(alpha_r_ns=${a}, msg_bytes=${m})`);
        }
      }
    }
    throw new CsvError(`incomplete grid; missing ${missing.slice(0, 4).join(", ")}`);
  }

  const cells = sizeSet.map((m) => alphaSet.map((a) => seen.get(`${a}|${m}`)!));
  const max = Math.max(...cells.flat());
  return { metric, alphaRNs: alphaSet, msgBytes: sizeSet, cells, max };
}

const TIME_UNITS: Array<[number, string]> = [
  [1e9, "S"],
  [1e6, "MS"],
  [1e3, "US"],
  [1, "NS"],
];

const SIZE_UNITS: Array<[number, string]> = [
  [2 ** 30, "GB"],
  [2 ** 20, "MB"],
  [2 ** 10, "KB"],
  [1, "B"],
];

function compact(value: number): string {
  if (Number.isInteger(value)) return String(value);
  const fixed = value >= 10 ? value.toFixed(0) : value.toFixed(1);
  return fixed.endsWith(".0") ? fixed.slice(0, -2) : fixed;
}

/** 100 -> "100NS", 31623 -> "32US": nearest human time unit. */
export function formatTimeNs(ns: number): string {
  for (const [scale, unit] of TIME_UNITS) {
    if (ns >= scale) {
      return `${compact(ns / scale)}${unit}`;
    }
  }
  return `${compact(ns)}NS`;
}

/** 1024 -> "1KB", 2**30 -> "1GB". */
export function formatBytes(bytes: number): string {
  for (const [scale, unit] of SIZE_UNITS) {
    if (bytes >= scale) {
      return `${compact(bytes / scale)}${unit}`;
    }
  }
  return `${compact(bytes)}B`;
}
