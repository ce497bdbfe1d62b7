/** Theoretical TIL decay guides for the log-log figure. */

/** Interference-term count of the TIL metric: 3SK - S - 1. */
export function tilShape(k: number, s: number): number {
  if (!Number.isInteger(k) || !Number.isInteger(s) || k < 1 || s < 1) {
    throw new Error(`pair/stream counts must be positive integers, got k=${k}, s=${s}`);
  }
  return 3 * s * k - s - 1;
}

/** Slope of the theoretical decay guide on log-log axes: -1/(3SK - S - 1). */
export function guideSlope(k: number, s: number): number {
  return -1 / tilShape(k, s);
}

/**
 * Power-law guide anchored at the first data point: y = y0 (x / x0)^slope,
 * evaluated at every x of the data series.
 */
export function guideSeries(
  points: ReadonlyArray<readonly [number, number]>,
  slope: number,
): [number, number][] {
  if (points.length === 0) {
    throw new Error("cannot anchor a guide to an empty series");
  }
  const [x0, y0] = points[0];
  if (!(x0 > 0) || !(y0 > 0)) {
    throw new Error(`guide anchor must be positive, got (${x0}, ${y0})`);
  }
  return points.map(([x]) => [x, y0 * Math.pow(x / x0, slope)]);
}
