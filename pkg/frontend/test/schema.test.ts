import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { CsvSchemaError, parseSweepCsv, readSweepCsv } from "../src/schema.js";

const fixture = (name: string) => new URL(`./fixtures/${name}`, import.meta.url).pathname;

describe("parseSweepCsv", () => {
  it("parses a til sweep with typed rows", () => {
    const rows = parseSweepCsv(readFileSync(fixture("til-decay-k2-s1.csv"), "utf8"));
    expect(rows).toHaveLength(6);
    expect(rows[0].sweep_param).toBe("n");
    expect(rows[0].value).toBe(25);
    expect(rows[0].mode).toBe("ar");
    expect(rows[0].mean_til_last).toBeGreaterThan(0);
    expect(rows[0].trials).toBe(10000);
  });

  it("keeps NaN TIL columns for single-set modes", () => {
    const rows = parseSweepCsv(readFileSync(fixture("rate-vs-snr-crossover.csv"), "utf8"));
    const nar = rows.filter((r) => r.mode === "nar");
    expect(nar.length).toBeGreaterThan(0);
    expect(nar.every((r) => Number.isNaN(r.mean_til_last))).toBe(true);
    expect(nar.every((r) => Number.isFinite(r.mean_sum_rate))).toBe(true);
  });

  it("rejects a CSV with a missing column, naming it", () => {
    const text = readFileSync(fixture("missing-columns.csv"), "utf8");
    expect(() => parseSweepCsv(text, "broken.csv")).toThrow(CsvSchemaError);
    expect(() => parseSweepCsv(text, "broken.csv")).toThrow(/missing column 'stderr'/);
  });

  it("rejects an empty CSV", () => {
    const text = readFileSync(fixture("empty.csv"), "utf8");
    expect(() => parseSweepCsv(text, "empty.csv")).toThrow(/no data rows/);
  });

  it("rejects garbage numerics", () => {
    const text =
      "sweep_param,value,mode,S,mean_sum_rate,stderr,mean_til_last,discarded,trials,seed\n" +
      "n,25,ar,1,lots,0.1,0.9,0,10,1\n";
    expect(() => parseSweepCsv(text)).toThrow(/bad numeric value 'lots'/);
  });

  it("reports unreadable files", () => {
    expect(() => readSweepCsv("/nonexistent/nowhere.csv")).toThrow(/cannot read/);
  });
});
