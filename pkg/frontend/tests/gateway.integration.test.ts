// End-to-end contract test against the live gateway: state is produced with
// the pipeline CLI, the service is spawned as a real process, and the review
// flow runs through the same ApiClient the browser uses.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { assertBlinded } from "../src/state.js";

const PYTHON = process.env.TRIAGE_PYTHON ?? "python3";

function triage(args: string[], cwd: string): void {
  execFileSync(PYTHON, ["-m", "triage.cli", ...args], { cwd, stdio: "pipe" });
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

// 60 sentences; [25, 27] carries lexicon terms and the alias (model finds it),
// [50, 51] is annotated but term-free (model misses it -> one FN queue item).
function rawTranscript(): string {
  const background = [
    "the court reviewed the schedule for the afternoon.",
    "counsel approached the bench to confer quietly.",
    "the jurors took their seats after the recess.",
    "the clerk read the next docket entry aloud.",
    "the bailiff closed the side door again.",
  ];
  const sentences: string[] = [];
  for (let i = 0; i < 60; i += 1) {
    if (i >= 25 && i <= 27) {
      sentences.push("ms. carter showed no remorse on the stand.");
    } else {
      sentences.push(background[i % background.length]);
    }
  }
  return sentences.join(" ");
}

let workDir: string;
let server: ChildProcess | null = null;
let baseUrl: string;
let api: ApiClient;

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "review-ui-"));
  writeFileSync(join(workDir, "raw.txt"), rawTranscript());
  writeFileSync(
    join(workDir, "lexicon.jsonl"),
    JSON.stringify({ theme_code: "EMOT", term: "remorse", weight: 4.0 }) + "\n",
  );
  const goldRows = [
    { transcript_id: "trial-ui", theme_code: "EMOT", start_sentence: 25, end_sentence: 27, annotator_id: "ga1" },
    { transcript_id: "trial-ui", theme_code: "EMOT", start_sentence: 50, end_sentence: 51, annotator_id: "ga1" },
  ];
  writeFileSync(join(workDir, "gold.jsonl"), goldRows.map((r) => JSON.stringify(r)).join("\n") + "\n");

  triage(
    ["ingest", "--in", "raw.txt", "--id", "trial-ui", "--alias", "ms. carter", "--alias", "carter", "--out", "corpus"],
    workDir,
  );
  triage(["score", "--theme", "EMOT", "--scorer", "lexicon:lexicon.jsonl", "--corpus", "corpus", "--out", "scores"], workDir);
  triage(["gate", "--corpus", "corpus", "--scores", "scores", "--resolver", "builtin", "--theme", "EMOT", "--out", "flags"], workDir);
  triage(["extract", "--theme", "EMOT", "--scores", "scores", "--flags", "flags", "--out", "passages.jsonl"], workDir);
  triage(
    [
      "queue", "--theme", "EMOT", "--seed", "7", "--corpus", "corpus", "--scores", "scores",
      "--gold", "gold.jsonl", "--passages", "passages.jsonl", "--out", join("state", "queue.EMOT.jsonl"),
    ],
    workDir,
  );

  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn(
    PYTHON,
    ["-m", "triage.cli", "serve", "--corpus", "corpus", "--state", "state", "--port", String(port)],
    { cwd: workDir, stdio: "pipe" },
  );
  api = new ApiClient(baseUrl);

  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      await api.listQueues();
      break;
    } catch {
      if (Date.now() > deadline) throw new Error("gateway did not come up");
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }
}, 60_000);

afterAll(() => {
  server?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("review flow against the live gateway", () => {
  it("commits a decision; the side is revealed only after commit", async () => {
    const queues = await api.listQueues();
    assertBlinded(queues);
    expect(queues).toHaveLength(1);
    expect(queues[0].pending_count).toBeGreaterThan(0);

    const item = await api.nextItem(queues[0].queue_id);
    assertBlinded(item); // nothing about side/scores/labels before commit
    expect(item.status).toBe("pending");
    expect(item.passage.sentences.length).toBeGreaterThan(0);

    // context expansion widens monotonically: +5 then +10 per side
    const first = await api.expandContext(item.item_id, 5);
    assertBlinded(first);
    const second = await api.expandContext(item.item_id, 10);
    expect(second.context.start).toBeLessThanOrEqual(first.context.start);
    expect(second.context.end).toBeGreaterThanOrEqual(first.context.end);
    expect(
      second.context.before.length + second.context.after.length,
    ).toBeGreaterThanOrEqual(first.context.before.length + first.context.after.length);

    const response = await api.commitDecision(item.item_id, {
      decision: "negative",
      reason_category: "unrelated_to_theme",
      reason_text: "",
      secondary_categories: [],
      reviewers: ["reviewer-ui"],
      client_token: "ui-tok-1",
    });
    expect(["FP", "FN"]).toContain(response.reveal.side);
    expect(response.record.item_id).toBe(item.item_id);

    // replaying with the same token is idempotent; a new token conflicts
    const replay = await api.commitDecision(item.item_id, {
      decision: "negative",
      reason_category: "unrelated_to_theme",
      reason_text: "",
      secondary_categories: [],
      reviewers: ["reviewer-ui"],
      client_token: "ui-tok-1",
    });
    expect(replay.record.record_id).toBe(response.record.record_id);

    const conflict = await api
      .commitDecision(item.item_id, {
        decision: "positive",
        reason_category: "other",
        reason_text: "changed my mind",
        secondary_categories: [],
        reviewers: ["reviewer-ui"],
        client_token: "ui-tok-2",
      })
      .catch((e) => e);
    expect(conflict).toBeInstanceOf(ApiError);
    expect((conflict as ApiError).isConflict).toBe(true);

    // the agreement tally is server truth and reflects the commit
    const reports = await api.agreement("EMOT");
    expect(reports[0].total_read).toBe(1);
  }, 30_000);

  it("reports queue exhaustion as a distinct signal", async () => {
    const queues = await api.listQueues();
    const queueId = queues[0].queue_id;
    for (;;) {
      let item;
      try {
        item = await api.nextItem(queueId);
      } catch (error) {
        expect((error as ApiError).isExhausted).toBe(true);
        break;
      }
      await api.commitDecision(item.item_id, {
        decision: "positive",
        reason_category: "other",
        reason_text: "sweep",
        secondary_categories: [],
        reviewers: ["reviewer-ui"],
        client_token: `sweep-${item.item_id}`,
      });
    }
    const after = await api.listQueues();
    expect(after[0].pending_count).toBe(0);
  }, 30_000);
});
