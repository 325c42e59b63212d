/** Live-service integration: runs only when RAAD_URL points at a fresh
 * suppression service (empty feedback store). `npm run test:integration`
 * via scripts/integration.sh starts one and wires the env for you.
 */

import { describe, expect, it } from "vitest";

import { RaadClient } from "../src/api.js";
import type { ConfigDoc, OutcomeDoc } from "../src/types.js";
import { curveIsSane, sampleCurve } from "../src/tuning.js";

const url = process.env.RAAD_URL;
const token = process.env.RAAD_TOKEN ?? null;

const KNOWN_CONFIG: ConfigDoc = {
  tau: 0.95,
  alpha: 60,
  delta: 1,
  score_kind: "probability",
  alert_threshold: 0.9,
};

const DIM = 8;

function randomVector(): number[] {
  const vec: number[] = [];
  for (let i = 0; i < DIM; i++) vec.push(Math.random() * 2 - 1);
  return vec;
}

function line(eventId: string, embedding: number[], score: number): string {
  return JSON.stringify({ event_id: eventId, embedding, score });
}

function outcomeOf(outcomes: OutcomeDoc[], eventId: string): OutcomeDoc {
  const found = outcomes.find((o) => o.event_id === eventId);
  if (!found) throw new Error(`no outcome for ${eventId}`);
  return found;
}

describe.skipIf(!url)("live service", () => {
  const client = new RaadClient(url ?? "", token);
  const run = Date.now().toString(36);
  const noisy = randomVector();
  const quiet = randomVector();

  it("suppresses an annotated false positive on the next batch", async () => {
    const health = await client.health();
    expect(health.status).toBe("ok");

    const echoed = await client.putConfig(KNOWN_CONFIG);
    expect(echoed.tau).toBe(KNOWN_CONFIG.tau);
    expect((await client.getConfig()).alpha).toBe(KNOWN_CONFIG.alpha);

    const first = await client.processBatch(
      line(`it-${run}-noisy-1`, noisy, 0.97) + "\n" + line(`it-${run}-quiet-1`, quiet, 0.2) + "\n",
    );
    expect(first.rejects).toEqual([]);
    expect(first.alerts).toContain(`it-${run}-noisy-1`);

    const created = await client.annotate({
      batch_id: first.batch_id,
      event_id: `it-${run}-noisy-1`,
      annotator: "console-integration",
      note: "known benign scanner",
    });
    expect(created.annotation_id).toBeGreaterThan(0);

    const second = await client.processBatch(
      line(`it-${run}-noisy-2`, noisy, 0.97) + "\n" + line(`it-${run}-quiet-2`, quiet, 0.2) + "\n",
    );
    const repeat = outcomeOf(second.outcomes, `it-${run}-noisy-2`);
    expect(repeat.theta_adjusted).toBe(1);
    expect(repeat.fp_confidence).toBe(1);
    expect(repeat.score_adjusted).toBe(0);
    expect(second.alerts).not.toContain(`it-${run}-noisy-2`);

    const alerts = await client.getAlerts(second.batch_id);
    expect(alerts.alerts).toEqual(second.alerts);
  });

  it("matches the documented preview arithmetic", async () => {
    const outcome = await client.preview({
      theta: 0.99,
      d: 0.5,
      score: 0.9,
      config: KNOWN_CONFIG,
    });
    expect(outcome.fp_confidence).toBeCloseTo(0.99, 9);
    expect(outcome.score_adjusted).toBeCloseTo(0.009, 9);
  });

  it("serves a sane suppression curve for the tuning chart", async () => {
    const points = await sampleCurve(client, KNOWN_CONFIG, 21);
    expect(points).toHaveLength(21);
    expect(curveIsSane(points)).toBe(true);
    const low = points[2];
    const high = points[20];
    if (!low || !high) throw new Error("grid too short");
    expect(low.suppression).toBeLessThan(0.01);
    expect(high.suppression).toBe(1);
  });
});
