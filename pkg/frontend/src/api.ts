/** Thin fetch client for the suppression service. */

import type {
  AnnotationRequest,
  AnnotationResponse,
  BatchDoc,
  ConfigDoc,
  OutcomeDoc,
  PreviewRequest,
} from "./types.js";

export class RaadApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`service returned ${status}: ${JSON.stringify(detail)}`);
    this.name = "RaadApiError";
    this.status = status;
    this.detail = detail;
  }
}

async function errorDetail(res: Response): Promise<unknown> {
  const text = await res.text();
  try {
    const body = JSON.parse(text) as { detail?: unknown };
    return body.detail ?? body;
  } catch {
    return text;
  }
}

export class RaadClient {
  readonly baseUrl: string;
  private readonly token: string | null;

  constructor(baseUrl: string, token?: string | null) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.token = token ?? null;
  }

  private headers(contentType?: string): Record<string, string> {
    const headers: Record<string, string> = {};
    if (contentType) headers["Content-Type"] = contentType;
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      throw new RaadApiError(res.status, await errorDetail(res));
    }
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/healthz");
  }

  /** Submit one NDJSON batch; body is raw lines, not JSON. */
  processBatch(ndjson: string): Promise<BatchDoc> {
    return this.request("/v1/batches", {
      method: "POST",
      headers: this.headers("application/x-ndjson"),
      body: ndjson,
    });
  }

  getBatch(batchId: number): Promise<BatchDoc> {
    return this.request(`/v1/batches/${batchId}`, { headers: this.headers() });
  }

  getAlerts(batchId?: number): Promise<BatchDoc> {
    const query = batchId === undefined ? "" : `?batch_id=${batchId}`;
    return this.request(`/v1/alerts${query}`, { headers: this.headers() });
  }

  annotate(req: AnnotationRequest): Promise<AnnotationResponse> {
    return this.request("/v1/annotations", {
      method: "POST",
      headers: this.headers("application/json"),
      body: JSON.stringify(req),
    });
  }

  getConfig(): Promise<ConfigDoc> {
    return this.request("/v1/config", { headers: this.headers() });
  }

  putConfig(cfg: ConfigDoc): Promise<ConfigDoc> {
    return this.request("/v1/config", {
      method: "PUT",
      headers: this.headers("application/json"),
      body: JSON.stringify(cfg),
    });
  }

  preview(req: PreviewRequest): Promise<OutcomeDoc> {
    return this.request("/v1/preview", {
      method: "POST",
      headers: this.headers("application/json"),
      body: JSON.stringify(req),
    });
  }
}
