/** Browser entry point: wires the pure modules to a small DOM. */

import { RaadApiError, RaadClient } from "./api.js";
import { linePath, scaleLinear, sparklinePath } from "./charts.js";
import { createPoller, type Poller } from "./poll.js";
import { alertRows, batchStats, diffAlerts, pushHistory, type BatchStats } from "./state.js";
import { curveIsSane, sampleCurve } from "./tuning.js";
import type { BatchDoc, ConfigDoc } from "./types.js";

const POLL_INTERVAL_MS = 2000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function must(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

class Console {
  private client: RaadClient | null = null;
  private poller: Poller | null = null;
  private lastBatch: BatchDoc | null = null;
  private history: BatchStats[] = [];
  private annotator = "console";

  connect(baseUrl: string, token: string, annotator: string): void {
    this.disconnect();
    this.client = new RaadClient(baseUrl, token || null);
    this.annotator = annotator || "console";
    this.poller = createPoller(() => this.refresh(), POLL_INTERVAL_MS, (err) => this.showError(err));
    this.poller.start();
    void this.loadConfig();
    void this.loadCurve();
  }

  disconnect(): void {
    this.poller?.stop();
    this.poller = null;
    this.client = null;
    this.lastBatch = null;
    this.history = [];
    must("status").textContent = "disconnected";
  }

  private showError(err: unknown): void {
    const status = must("status");
    if (err instanceof RaadApiError && err.status === 404) {
      status.textContent = "connected; no batches yet";
      return;
    }
    status.textContent = err instanceof Error ? err.message : String(err);
  }

  private async refresh(): Promise<void> {
    if (!this.client) return;
    const batch = await this.client.getAlerts();
    const diff = diffAlerts(this.lastBatch, batch);
    this.lastBatch = batch;
    this.history = pushHistory(this.history, batchStats(batch));
    this.render(batch, diff.cleared);
    must("status").textContent = `connected; batch ${batch.batch_id}`;
  }

  private render(batch: BatchDoc, cleared: string[]): void {
    const stats = batchStats(batch);
    must("stats").textContent =
      `${stats.alerts} alerts of ${stats.total} events ` +
      `(${stats.adjusted} adjusted, ${stats.silenced} silenced, ${stats.rejects} rejected)` +
      (cleared.length ? ` — cleared: ${cleared.join(", ")}` : "");

    const spark = must("spark");
    spark.innerHTML = "";
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("viewBox", "0 0 240 40");
    svg.setAttribute("width", "240");
    svg.setAttribute("height", "40");
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    path.setAttribute("d", sparklinePath(this.history.map((s) => s.alerts), { width: 240, height: 40 }));
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", "currentColor");
    svg.appendChild(path);
    spark.appendChild(svg);

    const tbody = must("alerts");
    tbody.innerHTML = "";
    for (const row of alertRows(batch)) {
      const tr = el("tr");
      tr.appendChild(el("td", {}, row.eventId));
      tr.appendChild(el("td", {}, row.scoreOriginal.toFixed(4)));
      tr.appendChild(el("td", {}, row.scoreAdjusted.toFixed(4)));
      tr.appendChild(el("td", {}, row.fpConfidence.toFixed(4)));
      const action = el("td");
      const button = el("button", {}, "false positive");
      button.addEventListener("click", () => void this.annotate(batch.batch_id, row.eventId, button));
      action.appendChild(button);
      tr.appendChild(action);
      tbody.appendChild(tr);
    }
  }

  private async annotate(batchId: number, eventId: string, button: HTMLButtonElement): Promise<void> {
    if (!this.client) return;
    button.disabled = true;
    try {
      const res = await this.client.annotate({
        batch_id: batchId,
        event_id: eventId,
        annotator: this.annotator,
      });
      button.textContent = `recorded #${res.annotation_id}`;
      void this.loadCurve(); // store changed; curve display may be stale
    } catch (err) {
      button.disabled = false;
      this.showError(err);
    }
  }

  private async loadConfig(): Promise<void> {
    if (!this.client) return;
    try {
      const cfg = await this.client.getConfig();
      (must("cfg-json") as HTMLTextAreaElement).value = JSON.stringify(cfg, null, 2);
    } catch (err) {
      this.showError(err);
    }
  }

  async saveConfig(): Promise<void> {
    if (!this.client) return;
    try {
      const cfg = JSON.parse((must("cfg-json") as HTMLTextAreaElement).value) as ConfigDoc;
      await this.client.putConfig(cfg);
      must("status").textContent = "config updated";
      void this.loadCurve();
    } catch (err) {
      this.showError(err);
    }
  }

  private async loadCurve(): Promise<void> {
    if (!this.client) return;
    try {
      const points = await sampleCurve(this.client, undefined, 100);
      if (!curveIsSane(points)) throw new Error("server returned an amplifying curve");
      const x = scaleLinear([0, 1], [10, 310]);
      const y = scaleLinear([0, 1], [110, 10]);
      const d = linePath(
        points.map((p) => x(p.theta)),
        points.map((p) => y(p.thetaAdjusted)),
      );
      const curve = must("curve-path");
      curve.setAttribute("d", d);
    } catch (err) {
      this.showError(err);
    }
  }
}

function boot(): void {
  const ui = new Console();
  must("connect").addEventListener("click", () => {
    ui.connect(
      (must("base-url") as HTMLInputElement).value,
      (must("token") as HTMLInputElement).value,
      (must("annotator") as HTMLInputElement).value,
    );
  });
  must("disconnect").addEventListener("click", () => ui.disconnect());
  must("cfg-save").addEventListener("click", () => void ui.saveConfig());
}

document.addEventListener("DOMContentLoaded", boot);
