// Payload types for the review gateway API. Pre-commit item payloads are
// blinded: they carry no disagreement side, no scores, no annotator labels.

export interface QueueInfo {
  queue_id: string;
  theme: string;
  pending_count: number;
  decided_count: number;
}

export interface PassageView {
  start: number;
  end: number;
  sentences: string[];
}

export interface ContextView {
  start: number;
  end: number;
  before: string[];
  after: string[];
}

export interface BlindedItem {
  item_id: string;
  queue_id: string;
  theme: string;
  transcript_id: string;
  status: "pending" | "decided";
  passage: PassageView;
  context: ContextView;
}

export type Decision = "positive" | "negative" | "undecided";

export const REASON_CATEGORIES = [
  "unrelated_to_theme",
  "not_about_defendant",
  "neutral_or_factual",
  "needs_longer_context",
  "defense_counterargument",
  "other",
] as const;

export type ReasonCategory = (typeof REASON_CATEGORIES)[number];

export interface DecisionBody {
  decision: Decision;
  reason_category: ReasonCategory;
  reason_text: string;
  secondary_categories: ReasonCategory[];
  reviewers: string[];
  client_token: string;
}

export interface Reveal {
  side: "FP" | "FN";
  model_label: "positive" | "negative";
  annotator_label: "positive" | "negative";
}

export interface DecisionResponse {
  record: {
    record_id: string;
    item_id: string;
    decision: Decision;
    side: "FP" | "FN";
    theme: string;
    started_at: string;
    ended_at: string;
  };
  reveal: Reveal;
}

export interface AgreementReport {
  theme: string;
  fp_counts: { positive: number; negative: number; undecided: number };
  fn_counts: { positive: number; negative: number; undecided: number };
  model_lawyer_agreement: number | null;
  fp_agreement: number | null;
  undecided_share: number | null;
  total_read: number;
}
