/**
 * render --csv PATH --metric NAME --out PATH
 *
 * Exit codes: 0 success, 1 data/io failure (bad CSV, incomplete grid),
 * 2 usage error (unknown flag/metric).
 */

import * as fs from "node:fs";

import { CsvError, Metric, METRICS, parseSweepCsv } from "./csv.js";
import { buildGrid } from "./grid.js";
import { renderToPng } from "./heatmap.js";

const USAGE = "usage: render --csv PATH --metric NAME --out PATH";

export function runCli(argv: string[]): number {
  if (argv[0] !== "render") {
    process.stderr.write(`${USAGE}\n`);
    return 2;
  }
  const flags = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      process.stderr.write(`${USAGE}\n`);
      return 2;
    }
    flags.set(key.slice(2), value);
  }
  const csvPath = flags.get("csv");
  const metric = flags.get("metric");
  const outPath = flags.get("out");
  if (!csvPath || !metric || !outPath) {
    process.stderr.write(`${USAGE}\n`);
    return 2;
  }
  if (!(METRICS as readonly string[]).includes(metric)) {
    process.stderr.write(
      `unknown metric '${metric}'; valid metrics: ${METRICS.join(", ")}\n`,
    );
    return 2;
  }

  let text: string;
  try {
    text = fs.readFileSync(csvPath, "utf-8");
  } catch (error) {
    process.stderr.write(`cannot read ${csvPath}: ${(error as Error).message}\n`);
    return 1;
  }
  try {
    const rows = parseSweepCsv(text);
    const grid = buildGrid(rows, metric as Metric);
    fs.writeFileSync(outPath, renderToPng(grid));
  } catch (error) {
    if (error instanceof CsvError) {
      process.stderr.write(`invalid sweep CSV: ${error.message}\n`);
      return 1;
    }
    process.stderr.write(`${(error as Error).message}\n`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(runCli(process.argv.slice(2)));
}
