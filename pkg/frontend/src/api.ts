// Thin typed client for the review gateway. Every piece of state round-trips
// through these endpoints; there is no offline mode and no client-only truth.

import type {
  AgreementReport,
  BlindedItem,
  ContextView,
  DecisionBody,
  DecisionResponse,
  QueueInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }

  get isExhausted(): boolean {
    return this.status === 404;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (error) {
      throw new ApiError(0, `gateway unreachable: ${String(error)}`);
    }
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listQueues(): Promise<QueueInfo[]> {
    return this.request<QueueInfo[]>("/queues");
  }

  nextItem(queueId: string): Promise<BlindedItem> {
    return this.request<BlindedItem>(`/queues/${encodeURIComponent(queueId)}/next`);
  }

  getItem(itemId: string, context?: number): Promise<BlindedItem> {
    const query = context === undefined ? "" : `?context=${context}`;
    return this.request<BlindedItem>(`/items/${encodeURIComponent(itemId)}${query}`);
  }

  expandContext(itemId: string, extra: number): Promise<{ item_id: string; context: ContextView }> {
    return this.request(`/items/${encodeURIComponent(itemId)}/context?extra=${extra}`);
  }

  commitDecision(itemId: string, body: DecisionBody): Promise<DecisionResponse> {
    return this.request<DecisionResponse>(`/items/${encodeURIComponent(itemId)}/decision`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  agreement(theme: string): Promise<AgreementReport[]> {
    return this.request<AgreementReport[]>(`/reports/agreement?theme=${encodeURIComponent(theme)}`);
  }
}
