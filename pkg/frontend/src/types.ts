/** Wire types mirroring the service's JSON payloads. */

export interface OutcomeDoc {
  event_id: string | null;
  score_original: number;
  score_adjusted: number;
  fp_confidence: number;
  theta_closest: number | null;
  d_closest: number | null;
  theta_adjusted: number;
  d_adjusted: number;
  annotation_id: number | null;
}

export interface RejectDoc {
  line: number;
  reason: string;
}

export interface BatchDoc {
  batch_id: number;
  store_generation: number;
  outcomes: OutcomeDoc[];
  alerts: string[];
  rejects: RejectDoc[];
}

export type ScoreKind = "probability" | "loss";

export interface ConfigDoc {
  tau: number;
  alpha: number;
  delta: number | null;
  score_kind: ScoreKind;
  alert_threshold: number;
}

export interface PreviewRequest {
  theta: number;
  d?: number;
  score: number;
  config?: Partial<ConfigDoc>;
}

export interface AnnotationRequest {
  batch_id: number;
  event_id: string;
  annotator: string;
  note?: string;
}

export interface AnnotationResponse {
  annotation_id: number;
}
