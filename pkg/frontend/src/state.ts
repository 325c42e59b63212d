/** Pure view-state helpers for the alert queue. No DOM, no IO. */

import type { BatchDoc, OutcomeDoc } from "./types.js";

export interface AlertRow {
  eventId: string;
  scoreOriginal: number;
  scoreAdjusted: number;
  fpConfidence: number;
  annotationId: number | null;
}

export interface BatchStats {
  batchId: number;
  total: number;
  alerts: number;
  rejects: number;
  /** outcomes whose score moved at all */
  adjusted: number;
  /** outcomes suppressed all the way to zero */
  silenced: number;
}

export interface AlertDiff {
  cleared: string[];
  appeared: string[];
}

function outcomeById(batch: BatchDoc): Map<string, OutcomeDoc> {
  const map = new Map<string, OutcomeDoc>();
  for (const oc of batch.outcomes) {
    if (oc.event_id !== null) map.set(oc.event_id, oc);
  }
  return map;
}

/** Alert-queue rows, worst adjusted score first, ties by event id. */
export function alertRows(batch: BatchDoc): AlertRow[] {
  const outcomes = outcomeById(batch);
  const rows: AlertRow[] = [];
  for (const eventId of batch.alerts) {
    const oc = outcomes.get(eventId);
    if (!oc) continue; // an alert always has an outcome; guard anyway
    rows.push({
      eventId,
      scoreOriginal: oc.score_original,
      scoreAdjusted: oc.score_adjusted,
      fpConfidence: oc.fp_confidence,
      annotationId: oc.annotation_id,
    });
  }
  rows.sort((a, b) =>
    a.scoreAdjusted !== b.scoreAdjusted
      ? b.scoreAdjusted - a.scoreAdjusted
      : a.eventId < b.eventId
        ? -1
        : a.eventId > b.eventId
          ? 1
          : 0,
  );
  return rows;
}

export function batchStats(batch: BatchDoc): BatchStats {
  let adjusted = 0;
  let silenced = 0;
  for (const oc of batch.outcomes) {
    if (oc.score_adjusted !== oc.score_original) adjusted += 1;
    if (oc.score_adjusted === 0 && oc.score_original !== 0) silenced += 1;
  }
  return {
    batchId: batch.batch_id,
    total: batch.outcomes.length + batch.rejects.length,
    alerts: batch.alerts.length,
    rejects: batch.rejects.length,
    adjusted,
    silenced,
  };
}

/** Which alert ids disappeared / appeared between two polls. */
export function diffAlerts(prev: BatchDoc | null, next: BatchDoc): AlertDiff {
  const before = new Set(prev ? prev.alerts : []);
  const after = new Set(next.alerts);
  return {
    cleared: [...before].filter((id) => !after.has(id)).sort(),
    appeared: [...after].filter((id) => !before.has(id)).sort(),
  };
}

/** Rolling per-batch history for the sparkline, newest last. */
export function pushHistory(history: BatchStats[], stats: BatchStats, cap = 50): BatchStats[] {
  const last = history[history.length - 1];
  if (last && last.batchId === stats.batchId) return history; // same poll result
  const next = [...history, stats];
  return next.length > cap ? next.slice(next.length - cap) : next;
}
