import { readFileSync } from "node:fs";
import Papa from "papaparse";

/** Column order of the simulator's sweep CSVs (bit-exact schema). */
export const REQUIRED_COLUMNS = [
  "sweep_param",
  "value",
  "mode",
  "S",
  "mean_sum_rate",
  "stderr",
  "mean_til_last",
  "discarded",
  "trials",
  "seed",
] as const;

export interface SweepRow {
  sweep_param: string;
  value: number;
  mode: string;
  S: number;
  mean_sum_rate: number;
  stderr: number;
  mean_til_last: number;
  discarded: number;
  trials: number;
  seed: number;
}

export class CsvSchemaError extends Error {}

function num(raw: string | undefined, column: string, source: string, line: number): number {
  const value = Number(raw);
  if (raw === undefined || raw === "" || (Number.isNaN(value) && raw.toLowerCase() !== "nan")) {
    throw new CsvSchemaError(`${source}:${line}: bad numeric value '${raw}' in column '${column}'`);
  }
  return value;
}

/** Parse one sweep CSV, rejecting anything that strays from the schema. */
export function parseSweepCsv(text: string, source = "<csv>"): SweepRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new CsvSchemaError(`${source}: missing column '${column}'`);
    }
  }
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new CsvSchemaError(`${source}: ${e.message} (row ${e.row})`);
  }
  if (parsed.data.length === 0) {
    throw new CsvSchemaError(`${source}: no data rows`);
  }
  return parsed.data.map((raw, i) => ({
    sweep_param: raw.sweep_param ?? "",
    value: num(raw.value, "value", source, i + 2),
    mode: raw.mode ?? "",
    S: num(raw.S, "S", source, i + 2),
    mean_sum_rate: num(raw.mean_sum_rate, "mean_sum_rate", source, i + 2),
    stderr: num(raw.stderr, "stderr", source, i + 2),
    mean_til_last: num(raw.mean_til_last, "mean_til_last", source, i + 2),
    discarded: num(raw.discarded, "discarded", source, i + 2),
    trials: num(raw.trials, "trials", source, i + 2),
    seed: num(raw.seed, "seed", source, i + 2),
  }));
}

export function readSweepCsv(path: string): SweepRow[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvSchemaError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseSweepCsv(text, path);
}
