// Client-side view model for one review card plus the running session tally.
// Blinding is inherited from the API payloads: the card can only ever render
// fields that exist on BlindedItem, and the side arrives only after commit.

import type { BlindedItem, Decision, ReasonCategory, Reveal } from "./types.js";

export const CONTEXT_STEP = 5;

export interface DecisionDraft {
  decision: Decision | null;
  category: ReasonCategory | null;
  reasonText: string;
  secondaries: ReasonCategory[];
}

export interface ReviewCard {
  item: BlindedItem;
  contextExtra: number; // cumulative; each expand request widens by CONTEXT_STEP
  draft: DecisionDraft;
  startedAtMs: number;
  reveal: Reveal | null; // null until the decision is committed
  committedDecision: Decision | null;
}

export interface SessionTally {
  read: number;
  agreed: number;
  undecided: number;
}

export function emptyDraft(): DecisionDraft {
  return { decision: null, category: null, reasonText: "", secondaries: [] };
}

export function newCard(item: BlindedItem, nowMs: number): ReviewCard {
  return {
    item,
    contextExtra: 0,
    draft: emptyDraft(),
    startedAtMs: nowMs,
    reveal: null,
    committedDecision: null,
  };
}

export function nextContextExtra(card: ReviewCard): number {
  return card.contextExtra + CONTEXT_STEP;
}

/** Commit is allowed once a decision and a usable reason are in place:
 *  a category must be chosen, "other" needs free text, and an undecided
 *  outcome always needs free text. */
export function canCommit(draft: DecisionDraft): boolean {
  if (draft.decision === null || draft.category === null) return false;
  if (draft.category === "other" && draft.reasonText.trim() === "") return false;
  if (draft.decision === "undecided" && draft.reasonText.trim() === "") return false;
  return true;
}

export function agreesWithModel(reveal: Reveal, decision: Decision): boolean {
  if (decision === "undecided") return false;
  return decision === reveal.model_label;
}

export function applyCommit(
  tally: SessionTally,
  reveal: Reveal,
  decision: Decision,
): SessionTally {
  return {
    read: tally.read + 1,
    agreed: tally.agreed + (agreesWithModel(reveal, decision) ? 1 : 0),
    undecided: tally.undecided + (decision === "undecided" ? 1 : 0),
  };
}

export function tallyRate(tally: SessionTally): number | null {
  return tally.read === 0 ? null : tally.agreed / tally.read;
}

export function describeReveal(reveal: Reveal): string {
  return `model said ${reveal.model_label}; annotators said ${reveal.annotator_label}`;
}

/** Guard used by the contract tests: a pre-commit payload must not smuggle
 *  in any of the fields the gateway reveals only after commit. */
export function assertBlinded(payload: unknown): void {
  const forbidden = new Set([
    "side",
    "rank_score",
    "peak_score",
    "score",
    "scores",
    "gold",
    "annotator_label",
    "model_label",
    "origin",
    "defendant_gated",
    "reveal",
  ]);
  const walk = (value: unknown): void => {
    if (Array.isArray(value)) {
      value.forEach(walk);
    } else if (value !== null && typeof value === "object") {
      for (const [key, inner] of Object.entries(value as Record<string, unknown>)) {
        if (forbidden.has(key)) {
          throw new Error(`blinded payload leaks field: ${key}`);
        }
        walk(inner);
      }
    }
  };
  walk(payload);
}
