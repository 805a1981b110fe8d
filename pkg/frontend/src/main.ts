// DOM wiring. All review state lives on the server; this file renders it and
// forwards intents. Logic worth testing sits in state.ts/keyboard.ts/api.ts.

import { ApiClient, ApiError } from "./api.js";
import { mapKey } from "./keyboard.js";
import {
  CONTEXT_STEP,
  ReviewCard,
  SessionTally,
  applyCommit,
  canCommit,
  describeReveal,
  newCard,
  nextContextExtra,
  tallyRate,
} from "./state.js";
import { REASON_CATEGORIES, ReasonCategory } from "./types.js";

const api = new ApiClient("");
let card: ReviewCard | null = null;
let tally: SessionTally = { read: 0, agreed: 0, undecided: 0 };
let queueId: string | null = null;
const reviewers = ["reviewer-1"];

const app = document.getElementById("app")!;

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function setError(message: string | null): void {
  const banner = document.getElementById("error-banner")!;
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

async function loadNext(): Promise<void> {
  setError(null);
  if (queueId === null) {
    const queues = await api.listQueues();
    const open = queues.find((q) => q.pending_count > 0) ?? queues[0];
    if (!open) {
      app.replaceChildren(el("p", "done", "no queues configured"));
      return;
    }
    queueId = open.queue_id;
  }
  try {
    const item = await api.nextItem(queueId);
    card = newCard(item, Date.now());
    render();
  } catch (error) {
    if (error instanceof ApiError && error.isExhausted) {
      card = null;
      app.replaceChildren(el("p", "done", "queue complete - every item is decided"));
    } else {
      setError(String(error));
    }
  }
}

async function expand(): Promise<void> {
  if (!card) return;
  const extra = nextContextExtra(card);
  try {
    const payload = await api.expandContext(card.item.item_id, extra);
    card.contextExtra = extra;
    card.item.context = payload.context;
    render();
  } catch (error) {
    setError(String(error));
  }
}

async function commit(): Promise<void> {
  if (!card || !canCommit(card.draft) || card.reveal) return;
  const draft = card.draft;
  try {
    const response = await api.commitDecision(card.item.item_id, {
      decision: draft.decision!,
      reason_category: draft.category!,
      reason_text: draft.reasonText,
      secondary_categories: draft.secondaries,
      reviewers,
      client_token: `${card.item.item_id}:${card.startedAtMs}`,
    });
    card.reveal = response.reveal;
    card.committedDecision = draft.decision;
    tally = applyCommit(tally, response.reveal, draft.decision!);
    render();
  } catch (error) {
    if (error instanceof ApiError && error.isConflict) {
      // someone else decided first; refresh the card as decided
      setError("already decided elsewhere - advancing");
      await loadNext();
    } else {
      setError(`commit failed: ${String(error)}`); // no offline mode
    }
  }
}

function render(): void {
  if (!card) return;
  const { item, draft, reveal } = card;
  app.replaceChildren();

  const header = el("div", "card-header");
  header.append(
    el("span", "theme-badge", item.theme),
    el("span", "item-meta", `${item.transcript_id} · sentences ${item.passage.start}-${item.passage.end}`),
  );
  app.append(header);

  const context = el("div", "context");
  for (const sentence of item.context.before) context.append(el("p", "ctx", sentence));
  const passage = el("div", "passage");
  for (const sentence of item.passage.sentences) passage.append(el("p", "highlight", sentence));
  context.append(passage);
  for (const sentence of item.context.after) context.append(el("p", "ctx", sentence));
  app.append(context);

  const expandButton = el("button", "expand", `expand context +${CONTEXT_STEP} (c)`);
  expandButton.onclick = () => void expand();
  app.append(expandButton);

  if (reveal) {
    const banner = el("div", "reveal", describeReveal(reveal));
    const rate = tallyRate(tally);
    banner.append(
      el(
        "span",
        "tally",
        ` · you agreed with the model ${tally.agreed}/${tally.read}` +
          (rate === null ? "" : ` (${(rate * 100).toFixed(0)}%)`),
      ),
    );
    app.append(banner);
    const advance = el("button", "advance", "next passage");
    advance.onclick = () => void loadNext();
    app.append(advance);
    return;
  }

  const controls = el("div", "controls");
  (["positive", "negative", "undecided"] as const).forEach((decision, index) => {
    const button = el("button", draft.decision === decision ? "decision active" : "decision");
    button.textContent = `${decision} (${index + 1})`;
    button.onclick = () => {
      draft.decision = decision;
      render();
    };
    controls.append(button);
  });
  app.append(controls);

  const categories = el("div", "categories");
  REASON_CATEGORIES.forEach((category) => {
    const button = el("button", draft.category === category ? "category active" : "category");
    button.textContent = category.replace(/_/g, " ");
    button.onclick = () => {
      draft.category = category as ReasonCategory;
      render();
    };
    categories.append(button);
  });
  app.append(categories);

  const reason = document.createElement("textarea");
  reason.className = "reason";
  reason.placeholder = "reason (required for undecided or 'other')";
  reason.value = draft.reasonText;
  reason.oninput = () => {
    draft.reasonText = reason.value;
    commitButton.disabled = !canCommit(draft);
  };
  app.append(reason);

  const commitButton = document.createElement("button");
  commitButton.className = "commit";
  commitButton.textContent = "commit decision (enter)";
  commitButton.disabled = !canCommit(draft);
  commitButton.onclick = () => void commit();
  app.append(commitButton);

  const timer = el("div", "timer", "");
  timer.dataset.startedAt = String(card.startedAtMs);
  app.append(timer);
}

window.addEventListener("keydown", (event) => {
  const target = event.target as HTMLElement | null;
  const action = mapKey({
    key: event.key,
    targetIsInput: target?.tagName === "TEXTAREA" || target?.tagName === "INPUT",
  });
  if (!action || !card) return;
  event.preventDefault();
  if (action.kind === "decide" && !card.reveal) {
    card.draft.decision = action.decision;
    render();
  } else if (action.kind === "expand") {
    void expand();
  } else if (action.kind === "commit") {
    void commit();
  }
});

void loadNext();
