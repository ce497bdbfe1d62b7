import * as echarts from "echarts";
import type { EChartsOption, SeriesOption } from "echarts";

import { guideSeries, guideSlope } from "./guides.js";
import type { SweepRow } from "./schema.js";

export interface LabeledInput {
  label: string;
  rows: SweepRow[];
  k?: number;
  s?: number;
}

export type FigureKind = "til" | "rate-snr" | "rate-n" | "rate-rsinr" | "lookup";

const X_LABEL: Record<Exclude<FigureKind, "lookup">, string> = {
  til: "relay candidates N",
  "rate-snr": "snr [dB]",
  "rate-n": "relay candidates N",
  "rate-rsinr": "residual self-interference-to-noise ratio [dB]",
};

function sortedByValue(rows: SweepRow[]): SweepRow[] {
  return [...rows].sort((a, b) => a.value - b.value);
}

/** Log-log decay figure: one curve per input plus its dotted theory guide. */
export function tilFigureOption(inputs: LabeledInput[]): EChartsOption {
  const series: SeriesOption[] = [];
  for (const input of inputs) {
    if (input.k === undefined || input.s === undefined) {
      throw new Error(`input '${input.label}' needs pair/stream counts for its guide`);
    }
    const pts = sortedByValue(input.rows).map(
      (r) => [r.value, r.mean_til_last] as [number, number],
    );
    if (pts.some(([, y]) => !Number.isFinite(y))) {
      throw new Error(`input '${input.label}' has no TIL statistics to plot`);
    }
    const slope = guideSlope(input.k, input.s);
    series.push({
      name: `${input.label} (K=${input.k}, S=${input.s})`,
      type: "line",
      data: pts,
      symbolSize: 6,
    });
    series.push({
      name: `guide slope ${slope.toFixed(4)}`,
      type: "line",
      data: guideSeries(pts, slope),
      lineStyle: { type: "dotted", width: 2 },
      symbol: "none",
    });
  }
  return {
    animation: false,
    legend: { top: 4, type: "scroll" },
    grid: { left: 70, right: 24, top: 48, bottom: 48 },
    xAxis: { type: "log", name: X_LABEL.til, nameLocation: "middle", nameGap: 28 },
    yAxis: { type: "log", name: "mean largest selected TIL", nameLocation: "middle", nameGap: 48 },
    series,
  };
}

/** Sum-rate overlays: one curve per (mode, stream-count) group per input. */
export function rateFigureOption(
  kind: Exclude<FigureKind, "til" | "lookup">,
  inputs: LabeledInput[],
): EChartsOption {
  const series: SeriesOption[] = [];
  const multi = inputs.length > 1;
  for (const input of inputs) {
    const groups = new Map<string, SweepRow[]>();
    for (const row of input.rows) {
      const key = `${row.mode} S=${row.S}`;
      groups.set(key, [...(groups.get(key) ?? []), row]);
    }
    for (const [key, rows] of groups) {
      series.push({
        name: multi ? `${input.label}: ${key}` : key,
        type: "line",
        data: sortedByValue(rows).map((r) => [r.value, r.mean_sum_rate]),
        symbolSize: 6,
      });
    }
  }
  return {
    animation: false,
    legend: { top: 4, type: "scroll" },
    grid: { left: 64, right: 24, top: 48, bottom: 48 },
    xAxis: {
      type: kind === "rate-n" ? "log" : "value",
      name: X_LABEL[kind],
      nameLocation: "middle",
      nameGap: 28,
    },
    yAxis: {
      type: "value",
      name: "mean sum-rate [bits/slot]",
      nameLocation: "middle",
      nameGap: 40,
    },
    series,
  };
}

export function renderSvg(option: EChartsOption, width = 860, height = 560): string {
  const chart = echarts.init(null, null, { renderer: "svg", ssr: true, width, height });
  try {
    chart.setOption(option);
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Best-strategy table rendered as a standalone SVG grid: one row per input
 * (a relay-count setting), one column per swept snr value, each cell naming
 * the argmax (mode, S) and its mean sum-rate.
 */
export function lookupTableSvg(inputs: LabeledInput[]): string {
  if (inputs.length === 0) {
    throw new Error("lookup rendering needs at least one input");
  }
  const snrValues = [...new Set(inputs[0].rows.map((r) => r.value))].sort((a, b) => a - b);
  const cellW = 130;
  const cellH = 44;
  const left = 150;
  const top = 40;
  const width = left + cellW * snrValues.length + 20;
  const height = top + cellH * inputs.length + 20;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" font-family="sans-serif" font-size="12">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  snrValues.forEach((v, j) => {
    parts.push(
      `<text x="${left + j * cellW + cellW / 2}" y="${top - 14}" text-anchor="middle" font-weight="bold">snr = ${v} dB</text>`,
    );
  });
  inputs.forEach((input, i) => {
    const y = top + i * cellH;
    parts.push(
      `<text x="${left - 12}" y="${y + cellH / 2 + 4}" text-anchor="end" font-weight="bold">${escapeXml(input.label)}</text>`,
    );
    snrValues.forEach((v, j) => {
      const rows = input.rows.filter((r) => r.value === v);
      if (rows.length === 0) {
        throw new Error(`input '${input.label}' has no rows at snr ${v}`);
      }
      const best = rows.reduce((acc, r) => (r.mean_sum_rate > acc.mean_sum_rate ? r : acc));
      const x = left + j * cellW;
      parts.push(
        `<rect x="${x}" y="${y}" width="${cellW}" height="${cellH}" fill="none" stroke="#777"/>`,
        `<text x="${x + cellW / 2}" y="${y + 18}" text-anchor="middle">${escapeXml(best.mode)} S=${best.S}</text>`,
        `<text x="${x + cellW / 2}" y="${y + 34}" text-anchor="middle" fill="#555">T=${best.mean_sum_rate.toFixed(3)}</text>`,
      );
    });
  });
  parts.push("</svg>");
  return parts.join("\n");
}
