// Keyboard-first controls: 1/2/3 pick a decision, c expands context.

import type { Decision } from "./types.js";

export type KeyAction =
  | { kind: "decide"; decision: Decision }
  | { kind: "expand" }
  | { kind: "commit" }
  | null;

const DECISION_KEYS: Record<string, Decision> = {
  "1": "positive",
  "2": "negative",
  "3": "undecided",
};

export interface KeyStroke {
  key: string;
  targetIsInput?: boolean;
}

export function mapKey(stroke: KeyStroke): KeyAction {
  if (stroke.targetIsInput) return null; // never steal keys from the reason box
  const key = stroke.key.toLowerCase();
  if (key in DECISION_KEYS) return { kind: "decide", decision: DECISION_KEYS[key] };
  if (key === "c") return { kind: "expand" };
  if (key === "enter") return { kind: "commit" };
  return null;
}
