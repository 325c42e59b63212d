import { describe, expect, it } from "vitest";

import { alertRows, batchStats, diffAlerts, pushHistory, type BatchStats } from "../src/state.js";
import type { BatchDoc, OutcomeDoc } from "../src/types.js";

function outcome(id: string, original: number, adjusted: number, conf = 0): OutcomeDoc {
  return {
    event_id: id,
    score_original: original,
    score_adjusted: adjusted,
    fp_confidence: conf,
    theta_closest: conf > 0 ? 0.99 : null,
    d_closest: conf > 0 ? 0.1 : null,
    theta_adjusted: conf,
    d_adjusted: 1,
    annotation_id: conf > 0 ? 7 : null,
  };
}

function batch(outcomes: OutcomeDoc[], alerts: string[], rejects = 0): BatchDoc {
  return {
    batch_id: 1,
    store_generation: 0,
    outcomes,
    alerts,
    rejects: Array.from({ length: rejects }, (_, i) => ({ line: i + 1, reason: "invalid_json" })),
  };
}

describe("alertRows", () => {
  it("sorts by adjusted score descending, ties by event id", () => {
    const doc = batch(
      [outcome("b", 0.9, 0.5), outcome("a", 0.9, 0.5), outcome("c", 0.99, 0.99)],
      ["b", "a", "c"],
    );
    expect(alertRows(doc).map((r) => r.eventId)).toEqual(["c", "a", "b"]);
  });

  it("only surfaces alerting events", () => {
    const doc = batch([outcome("quiet", 0.2, 0.2), outcome("loud", 0.95, 0.95)], ["loud"]);
    const rows = alertRows(doc);
    expect(rows).toHaveLength(1);
    expect(rows[0]!.eventId).toBe("loud");
    expect(rows[0]!.annotationId).toBeNull();
  });
});

describe("batchStats", () => {
  it("counts adjusted and silenced outcomes", () => {
    const doc = batch(
      [outcome("a", 0.9, 0.0, 1), outcome("b", 0.9, 0.45, 0.5), outcome("c", 0.3, 0.3)],
      [],
      2,
    );
    const stats = batchStats(doc);
    expect(stats.total).toBe(5);
    expect(stats.adjusted).toBe(2);
    expect(stats.silenced).toBe(1);
    expect(stats.rejects).toBe(2);
  });
});

describe("diffAlerts", () => {
  it("reports cleared and appeared ids sorted", () => {
    const prev = batch([], ["x", "y"]);
    const next = batch([], ["y", "z", "a"]);
    expect(diffAlerts(prev, next)).toEqual({ cleared: ["x"], appeared: ["a", "z"] });
  });

  it("treats null previous as all-appeared", () => {
    expect(diffAlerts(null, batch([], ["a"]))).toEqual({ cleared: [], appeared: ["a"] });
  });
});

describe("pushHistory", () => {
  const stats = (batchId: number): BatchStats => ({
    batchId,
    total: 1,
    alerts: 1,
    rejects: 0,
    adjusted: 0,
    silenced: 0,
  });

  it("dedupes repeated polls of the same batch", () => {
    const history = pushHistory(pushHistory([], stats(1)), stats(1));
    expect(history).toHaveLength(1);
  });

  it("caps the window", () => {
    let history: BatchStats[] = [];
    for (let i = 1; i <= 60; i++) history = pushHistory(history, stats(i), 50);
    expect(history).toHaveLength(50);
    expect(history[0]!.batchId).toBe(11);
    expect(history[49]!.batchId).toBe(60);
  });
});
