/** Wire types for the /v1 triage API. Field names mirror the JSON exactly. */

export type Label = "suspect_adverse" | "not_suspect";

export type RuleId =
  | "R1_envelope"
  | "R2_scorer_a"
  | "R3_scorer_b_highconf"
  | "R4_identifiable_patient"
  | "R5_default";

export type ReviewStatus = "pending" | "reviewed";

export type Decision = "relevant" | "not_relevant";

export const LABELS: readonly Label[] = ["suspect_adverse", "not_suspect"];

export const RULE_IDS: readonly RuleId[] = [
  "R1_envelope",
  "R2_scorer_a",
  "R3_scorer_b_highconf",
  "R4_identifiable_patient",
  "R5_default",
];

export const STATUSES: readonly ReviewStatus[] = ["pending", "reviewed"];

export const DECISIONS: readonly Decision[] = ["relevant", "not_relevant"];

export interface ArticleRecord {
  id: string;
  title: string;
  abstract: string;
  source?: string;
}

export interface EnvelopeInfo {
  in_envelope: boolean;
  reasons: string[];
  language: string;
  token_count: number;
}

export interface TraceEntry {
  rule_id: RuleId;
  evaluated: boolean;
  fired: boolean;
  detail: string;
}

export interface Prediction {
  article_id: string;
  label: Label;
  fired_rule: RuleId;
  score_a: number | null;
  score_b: number | null;
  envelope: EnvelopeInfo;
  trace: TraceEntry[];
}

export interface DecisionRecord {
  article_id: string;
  decision: Decision;
  reviewer: string;
  timestamp_utc: string;
  note: string | null;
}

export interface WorkItem {
  batch_id: number;
  article: ArticleRecord;
  prediction: Prediction;
  status: ReviewStatus;
  decision: DecisionRecord | null;
  decision_count: number;
}

export interface QueuePage {
  items: WorkItem[];
  total: number;
  page: number;
  page_size: number;
}

/** Character span into the document text, title + "\n" + abstract. */
export interface Attribution {
  sentence_index: number;
  start: number;
  end: number;
  influence: number;
}

export interface Explanation {
  article_id: string;
  mode: string;
  base_score: number;
  attributions: Attribution[];
}

export interface ArticleDetail {
  article: ArticleRecord;
  prediction: Prediction;
  trace: TraceEntry[];
  explanation: Explanation | null;
  status: ReviewStatus;
  decision: DecisionRecord | null;
}

export interface DecisionBody {
  decision: Decision;
  reviewer: string;
  note?: string;
}

export interface DecisionAck {
  article_id: string;
  status: ReviewStatus;
  decision_count: number;
}

export interface BatchAck {
  batch_id: number;
  summary: {
    batch_id: number;
    size: number;
    labels: Record<Label, number>;
    rules: Record<RuleId, number>;
  };
}

export interface QueueStats {
  items: { total: number; pending: number; reviewed: number };
  labels: Record<Label, number>;
  rules: Record<RuleId, number>;
  decisions_recorded: number;
  confusion: { tp: number; fp: number; tn: number; fn: number };
  thresholds: { theta_a: number; theta_b: number } | null;
  bundle_digest: string | null;
}
