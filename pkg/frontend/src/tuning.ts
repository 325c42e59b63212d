/** Threshold-tuning support: sample the server's own suppression curve.
 *
 * The console never reimplements the adjustment math. It posts preview
 * requests with score=1 and d=0, so the returned theta_adjusted is the
 * server-evaluated curve and score_adjusted is 1 minus the confidence.
 */

import type { RaadClient } from "./api.js";
import type { ConfigDoc, OutcomeDoc } from "./types.js";

export interface CurvePoint {
  theta: number;
  thetaAdjusted: number;
  suppression: number; // fraction of a probability score removed
}

export function thetaGrid(n = 100): number[] {
  if (n < 2) throw new Error("need at least two samples");
  const grid: number[] = [];
  for (let i = 0; i < n; i++) grid.push(i / (n - 1));
  return grid;
}

export function toCurvePoint(theta: number, outcome: OutcomeDoc): CurvePoint {
  return {
    theta,
    thetaAdjusted: outcome.theta_adjusted,
    suppression: outcome.fp_confidence,
  };
}

export async function sampleCurve(
  client: RaadClient,
  config?: Partial<ConfigDoc>,
  n = 100,
): Promise<CurvePoint[]> {
  const grid = thetaGrid(n);
  const points: CurvePoint[] = [];
  for (const theta of grid) {
    const outcome = await client.preview({
      theta,
      d: 0,
      score: 1,
      ...(config ? { config: { ...config, score_kind: "probability" } } : {}),
    });
    points.push(toCurvePoint(theta, outcome));
  }
  return points;
}

/** Sanity used by the UI before plotting: a curve never amplifies. */
export function curveIsSane(points: CurvePoint[]): boolean {
  return points.every(
    (p) =>
      p.thetaAdjusted >= 0 &&
      p.thetaAdjusted <= Math.max(p.theta, 0) + 1e-12 &&
      p.suppression >= 0 &&
      p.suppression <= 1,
  );
}
