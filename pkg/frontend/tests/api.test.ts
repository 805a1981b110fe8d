import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { assertBlinded } from "../src/state.js";
import type { BlindedItem, DecisionBody } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

function clientReturning(
  payload: unknown,
  status = 200,
  capture?: { url?: string; init?: RequestInit },
): ApiClient {
  return new ApiClient("", async (url, init) => {
    if (capture) {
      capture.url = url;
      capture.init = init;
    }
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  });
}

const decisionBody: DecisionBody = {
  decision: "positive",
  reason_category: "other",
  reason_text: "relevant",
  secondary_categories: [],
  reviewers: ["r1"],
  client_token: "tok",
};

describe("api client", () => {
  it("fetches the next blinded item", async () => {
    const capture: { url?: string } = {};
    const payload = fixture<BlindedItem>("item_precommit.json");
    const item = await clientReturning(payload, 200, capture).nextItem("queue-EMOT-3");
    expect(capture.url).toBe("/queues/queue-EMOT-3/next");
    expect(item.item_id).toBe(payload.item_id);
  });

  it("sends the decision body as JSON", async () => {
    const capture: { url?: string; init?: RequestInit } = {};
    const payload = fixture("decision_response.json");
    await clientReturning(payload, 200, capture).commitDecision("abc", decisionBody);
    expect(capture.url).toBe("/items/abc/decision");
    expect(capture.init?.method).toBe("POST");
    expect(JSON.parse(String(capture.init?.body))).toEqual(decisionBody);
  });

  it("maps 409 to a conflict error", async () => {
    const client = clientReturning({ detail: "already decided" }, 409);
    const error = await client.commitDecision("abc", decisionBody).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).isConflict).toBe(true);
    expect((error as ApiError).message).toBe("already decided");
  });

  it("maps queue exhaustion (404) distinctly", async () => {
    const client = clientReturning({ detail: "queue has no pending items" }, 404);
    const error = await client.nextItem("q").catch((e) => e);
    expect((error as ApiError).isExhausted).toBe(true);
  });

  it("surfaces unreachable gateways as errors, never queues offline", async () => {
    const client = new ApiClient("", async () => {
      throw new TypeError("fetch failed");
    });
    const error = await client.commitDecision("abc", decisionBody).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(0);
    expect((error as ApiError).message).toMatch(/unreachable/);
  });
});

describe("blinding contract against recorded gateway responses", () => {
  it("queue listing carries no revealed fields", () => {
    assertBlinded(fixture("queues.json"));
  });

  it("pre-commit item and context carry no revealed fields", () => {
    assertBlinded(fixture("item_precommit.json"));
    assertBlinded(fixture("context_expand.json"));
  });

  it("the recorded decision response does reveal the side", () => {
    const payload = fixture<{ reveal: { side: string } }>("decision_response.json");
    expect(["FP", "FN"]).toContain(payload.reveal.side);
    expect(() => assertBlinded(payload)).toThrow();
  });
});
