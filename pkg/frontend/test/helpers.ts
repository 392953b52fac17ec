/** Shared test fixtures: polling helper and a scriptable fake service. */

import type {
  Api,
  CreatedSession,
  DatasetInfo,
  PendingQuery,
  QueryView,
  StateView,
} from "../src/api.js";

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 15_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
  throw new Error("timed out waiting for condition");
}

export function pendingQuery(overrides: Partial<PendingQuery> = {}): PendingQuery {
  return {
    status: "awaiting_label",
    query_id: 1,
    example_id: 5,
    features: [0.25, 0.75],
    render_hint: null,
    num_classes: 3,
    budget_remaining: 10,
    ...overrides,
  };
}

export function stateView(overrides: Partial<StateView> = {}): StateView {
  return {
    status: "awaiting_label",
    step_index: 0,
    budget: 10,
    budget_remaining: 10,
    leaves: [
      { id: 0, N: 20, n: 4, m: 3, majority_class: 1, uniformity: 0.75 },
    ],
    bound_curve: [],
    total_bound: 0,
    history_tail: [],
    ...overrides,
  };
}

/** In-memory stand-in for the service; each field is directly scriptable. */
export class FakeApi {
  readonly base = "";
  query: QueryView = pendingQuery();
  state: StateView = stateView();
  exportText = "example_id,label,source,node_id,uniformity\n0,1,oracle,0,1\n";
  submitted: Array<{ queryId: number; label: number }> = [];
  submitError: Error | null = null;
  /** When set, submitLabel stalls on this promise (in-flight testing). */
  submitGate: Promise<void> | null = null;
  queryCalls = 0;

  async listDatasets(): Promise<Record<string, DatasetInfo>> {
    return {};
  }

  async createSession(): Promise<CreatedSession> {
    throw new Error("not used in unit tests");
  }

  async getQuery(): Promise<QueryView> {
    this.queryCalls += 1;
    return this.query;
  }

  async getState(): Promise<StateView> {
    return this.state;
  }

  async submitLabel(
    _sessionId: string,
    queryId: number,
    label: number,
  ): Promise<StateView> {
    if (this.submitGate !== null) {
      await this.submitGate;
    }
    if (this.submitError !== null) {
      throw this.submitError;
    }
    this.submitted.push({ queryId, label });
    return this.state;
  }

  async finalize(): Promise<string> {
    return this.exportText;
  }

  asApi(): Api {
    return this as unknown as Api;
  }
}
