/** Typed client for the labeling session service (HTTP + JSON). */

export interface DatasetInfo {
  size: number;
  num_classes: number | null;
  render_hint: [number, number] | null;
}

export interface SessionConfig {
  budget: number;
  training_ratio: number;
  quality: number;
  splitter: string;
  min_split_size: number;
  seed: number;
}

export interface CreatedSession {
  session_id: string;
  status: string;
  dataset: string;
  size: number;
  num_classes: number;
  render_hint: [number, number] | null;
  config: SessionConfig;
}

/** The engine is blocked on an oracle call and wants a label. */
export interface PendingQuery {
  status: "awaiting_label";
  query_id: number;
  example_id: number;
  features: number[];
  render_hint: [number, number] | null;
  num_classes: number;
  budget_remaining: number;
}

export interface IdleQuery {
  status: "running" | "finished";
}

export type QueryView = PendingQuery | IdleQuery;

export interface LeafView {
  id: number;
  N: number;
  n: number;
  m: number;
  majority_class: number | null;
  uniformity: number;
}

/** Step-boundary snapshot of a session. */
export interface StateView {
  status: string;
  step_index: number;
  budget: number;
  budget_remaining: number;
  leaves: LeafView[];
  bound_curve: number[];
  total_bound: number;
  history_tail: Record<string, unknown>[];
  accepted_query_id?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(input: string, init?: RequestInit): Promise<T> {
  const response = await fetch(input, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === "string") {
        detail = body.detail;
      }
    } catch {
      // non-JSON error body; the status text will have to do
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

const JSON_HEADERS = { "Content-Type": "application/json" };

export class Api {
  constructor(readonly base: string = "") {}

  listDatasets(): Promise<Record<string, DatasetInfo>> {
    return request(`${this.base}/datasets`);
  }

  createSession(
    dataset: string,
    config?: Partial<SessionConfig>,
    numClasses?: number,
  ): Promise<CreatedSession> {
    return request(`${this.base}/sessions`, {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({
        dataset,
        config: config ?? null,
        num_classes: numClasses ?? null,
      }),
    });
  }

  getQuery(sessionId: string): Promise<QueryView> {
    return request(`${this.base}/sessions/${sessionId}/query`);
  }

  submitLabel(
    sessionId: string,
    queryId: number,
    label: number,
  ): Promise<StateView> {
    return request(`${this.base}/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({ query_id: queryId, label }),
    });
  }

  getState(sessionId: string): Promise<StateView> {
    return request(`${this.base}/sessions/${sessionId}/state`);
  }

  /** Finalize the session and return the label CSV text. */
  async finalize(sessionId: string): Promise<string> {
    const response = await fetch(
      `${this.base}/sessions/${sessionId}/finalize`,
      { method: "POST" },
    );
    if (!response.ok) {
      throw new ApiError(response.status, response.statusText);
    }
    return response.text();
  }
}
