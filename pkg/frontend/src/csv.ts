/**
 * Strict reader for the scheduler sweep CSV contract.
 *
 * The producer guarantees a fixed header, no quoting, and one row per
 * (alpha_r_ns, msg_bytes) grid point; anything off-contract is an error here
 * rather than a silent guess.
 */

export const METRICS = ["speedup_vs_bvn", "speedup_vs_static", "speedup_vs_best"] as const;
export type Metric = (typeof METRICS)[number];

export const EXPECTED_HEADER = [
  "alpha_r_ns",
  "msg_bytes",
  "cost_opt_ns",
  "cost_static_ns",
  "cost_bvn_ns",
  "cost_threshold_ns",
  "speedup_vs_static",
  "speedup_vs_bvn",
  "speedup_vs_best",
  "opt_reconfig_count",
] as const;

export interface SweepRow {
  alphaRNs: number;
  msgBytes: number;
  /** Raw numeric cells by column name, exactly as parsed. */
  values: Record<string, number>;
}

export class CsvError extends Error {}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV");
  }
  const header = lines[0].split(",");
  for (const column of EXPECTED_HEADER) {
    if (!header.includes(column)) {
      throw new CsvError(`missing column '${column}' in header: ${lines[0]}`);
    }
  }
  const index = new Map(header.map((name, i) => [name, i] as const));

  const rows: SweepRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const cells = lines[lineNo].split(",");
    if (cells.length !== header.length) {
      throw new CsvError(
        `row ${lineNo}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    const values: Record<string, number> = {};
    for (const [name, i] of index) {
      const cell = cells[i];
      if (cell === "") {
        continue; // optional solver column left blank
      }
      const value = Number(cell);
      if (!Number.isFinite(value)) {
        throw new CsvError(`row ${lineNo}: column '${name}' is not numeric: '${cell}'`);
      }
      values[name] = value;
    }
    for (const required of ["alpha_r_ns", "msg_bytes"] as const) {
      if (!(required in values)) {
        throw new CsvError(`row ${lineNo}: column '${required}' is blank`);
      }
    }
    rows.push({ alphaRNs: values["alpha_r_ns"], msgBytes: values["msg_bytes"], values });
  }
  if (rows.length === 0) {
    throw new CsvError("CSV has a header but no data rows");
  }
  return rows;
}
