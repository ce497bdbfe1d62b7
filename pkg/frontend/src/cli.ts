#!/usr/bin/env node
import { writeFileSync } from "node:fs";
import { basename } from "node:path";
import { pathToFileURL } from "node:url";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { readSweepCsv } from "./schema.js";
import {
  FigureKind,
  LabeledInput,
  lookupTableSvg,
  rateFigureOption,
  renderSvg,
  tilFigureOption,
} from "./render.js";

function parseIntList(raw: string | undefined, count: number, flag: string): number[] | undefined {
  if (raw === undefined) return undefined;
  const values = String(raw)
    .split(",")
    .filter((v) => v !== "")
    .map((v) => {
      const n = Number(v);
      if (!Number.isInteger(n) || n < 1) throw new Error(`--${flag} expects positive integers, got '${v}'`);
      return n;
    });
  if (values.length === 1) return Array(count).fill(values[0]);
  if (values.length !== count) {
    throw new Error(`--${flag} needs 1 or ${count} comma-separated values, got ${values.length}`);
  }
  return values;
}

export function runRender(argv: {
  kind: string;
  in: string[];
  out: string;
  k?: string;
  s?: string;
  width: number;
  height: number;
}): void {
  const kind = argv.kind as FigureKind;
  const ks = parseIntList(argv.k, argv.in.length, "k");
  const ss = parseIntList(argv.s, argv.in.length, "s");
  const inputs: LabeledInput[] = argv.in.map((path, i) => ({
    label: basename(path).replace(/\.csv$/i, ""),
    rows: readSweepCsv(path),
    k: ks?.[i],
    s: ss?.[i],
  }));
  let svg: string;
  if (kind === "til") {
    if (!ks || !ss) throw new Error("--kind til needs --k and --s for the theory guides");
    svg = renderSvg(tilFigureOption(inputs), argv.width, argv.height);
  } else if (kind === "lookup") {
    svg = lookupTableSvg(inputs);
  } else {
    svg = renderSvg(rateFigureOption(kind, inputs), argv.width, argv.height);
  }
  writeFileSync(argv.out, svg);
  console.log(`wrote ${argv.out} (${svg.length} bytes, ${inputs.length} input file(s))`);
}

export function main(args: string[]): number {
  try {
    const argv = yargs(args)
      .command("render", "render a figure from sweep CSV files", (y) =>
        y
          .option("kind", {
            choices: ["til", "rate-snr", "rate-n", "rate-rsinr", "lookup"] as const,
            demandOption: true,
            describe: "figure layout to produce",
          })
          .option("in", {
            type: "string",
            array: true,
            demandOption: true,
            describe: "input sweep CSV file(s)",
          })
          .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
          .option("k", { type: "string", describe: "pair count(s) for the til guides (comma list)" })
          .option("s", { type: "string", describe: "stream count(s) for the til guides (comma list)" })
          .option("width", { type: "number", default: 860 })
          .option("height", { type: "number", default: 560 }),
      )
      .demandCommand(1, "expected the 'render' command")
      .strict()
      .exitProcess(false)
      .fail((msg, err) => {
        throw err ?? new Error(msg);
      })
      .parseSync();
    runRender(argv as unknown as Parameters<typeof runRender>[0]);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

// zrender keeps timers alive after SSR, so exit explicitly when run directly
if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(main(hideBin(process.argv)));
}
