/** The labeling console: a thin oracle terminal over the session API.
 *
 * Every number on screen comes from a service snapshot; the console never
 * infers labels client-side, and its only state beyond the DOM is the
 * session id, the last seen query id, and a single in-flight submit flag.
 */

import type { Api, PendingQuery, QueryView, StateView } from "./api.js";
import { ApiError } from "./api.js";
import {
  drawBoundCurve,
  drawExample,
  renderFeatureTable,
  renderLeaves,
} from "./render.js";

export interface ConsoleOptions {
  /** Poll interval; 500 ms is plenty at human labeling cadence. */
  pollMs?: number;
  /** Receives the finalized CSV; defaults to a browser download. */
  deliver?: (filename: string, text: string) => void;
}

const DEFAULT_POLL_MS = 500;

const LAYOUT = `
<div class="console">
  <header>
    <span class="status" data-el="status">connecting</span>
    <span class="step" data-el="step"></span>
    <span class="gauge"><span class="gauge-fill" data-el="gauge-fill"></span></span>
    <span data-el="budget-text"></span>
    <button data-el="finalize">Finish &amp; download labels</button>
  </header>
  <main>
    <section class="query-pane">
      <h2>Current query</h2>
      <p data-el="query-meta"></p>
      <div data-el="query-body"></div>
      <div class="classes" data-el="classes"></div>
      <p class="hint">click a class or press its number key</p>
    </section>
    <aside>
      <h2>Leaves</h2>
      <div class="leaves" data-el="leaves"></div>
      <h2>Bound <small>(current <span data-el="total-bound"></span>)</small></h2>
      <canvas data-el="curve" width="320" height="120"></canvas>
    </aside>
  </main>
</div>`;

function browserDownload(filename: string, text: string): void {
  const url = URL.createObjectURL(new Blob([text], { type: "text/csv" }));
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

export class LabelingConsole {
  private lastQueryId = 0;
  private submitting = false;
  private stopped = true;
  private timer: ReturnType<typeof setTimeout> | null = null;

  private readonly onKey = (event: KeyboardEvent): void => {
    if (/^[0-9]$/.test(event.key)) {
      void this.submit(Number(event.key));
    }
  };

  constructor(
    private readonly api: Api,
    readonly sessionId: string,
    private readonly root: HTMLElement,
    private readonly options: ConsoleOptions = {},
  ) {
    this.root.innerHTML = LAYOUT;
    this.el("finalize").addEventListener("click", () => {
      void this.finalizeAndDownload();
    });
  }

  start(): void {
    this.stopped = false;
    document.addEventListener("keydown", this.onKey);
    void this.refresh();
  }

  stop(): void {
    this.stopped = true;
    document.removeEventListener("keydown", this.onKey);
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** Poll query + state once and re-render; reschedules itself. */
  async refresh(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.stopped) {
      return;
    }
    let finished = false;
    try {
      const [query, state] = await Promise.all([
        this.api.getQuery(this.sessionId),
        this.api.getState(this.sessionId),
      ]);
      this.render(query, state);
      finished = state.status === "finished";
    } catch {
      // transient fetch or server hiccup: the next poll retries
    }
    if (!this.stopped && !finished) {
      this.timer = setTimeout(
        () => void this.refresh(),
        this.options.pollMs ?? DEFAULT_POLL_MS,
      );
    }
  }

  /** Submit a class for the pending query, fenced by its query id. */
  async submit(label: number): Promise<void> {
    if (this.submitting || this.stopped || this.lastQueryId === 0) {
      return;
    }
    if (this.root.dataset.status !== "awaiting_label") {
      return;
    }
    const buttons = this.classButtons();
    if (label < 0 || label >= buttons.length) {
      return; // out-of-range key: ignore
    }
    this.submitting = true;
    this.setClassesEnabled(false);
    try {
      await this.api.submitLabel(this.sessionId, this.lastQueryId, label);
    } catch (error) {
      // A stale fence (409) means the engine moved on; refresh silently
      // rather than retrying blindly. Anything else is shown.
      if (!(error instanceof ApiError && error.status === 409)) {
        this.el("status").textContent = String(error);
      }
    } finally {
      this.submitting = false;
    }
    await this.refresh();
  }

  async finalizeAndDownload(): Promise<void> {
    const text = await this.api.finalize(this.sessionId);
    const deliver = this.options.deliver ?? browserDownload;
    deliver(`labels_${this.sessionId}.csv`, text);
    await this.refresh();
  }

  private render(query: QueryView, state: StateView): void {
    this.root.dataset.status = query.status;
    this.el("status").textContent = query.status.replace("_", " ");
    this.el("step").textContent = `step ${state.step_index}`;
    const spent = state.budget - state.budget_remaining;
    this.el("budget-text").textContent =
      `${state.budget_remaining} of ${state.budget} queries left`;
    this.el("gauge-fill").style.width =
      state.budget > 0 ? `${(100 * spent) / state.budget}%` : "100%";
    this.el("total-bound").textContent = state.total_bound.toFixed(1);
    renderLeaves(this.el("leaves"), state.leaves);
    drawBoundCurve(this.el("curve") as HTMLCanvasElement, state.bound_curve);

    if (query.status === "awaiting_label") {
      if (query.query_id !== this.lastQueryId) {
        this.lastQueryId = query.query_id;
        this.renderQuery(query);
      }
      this.setClassesEnabled(!this.submitting);
    } else {
      this.lastQueryId = 0;
      this.el("query-meta").textContent = "";
      this.el("classes").innerHTML = "";
      this.el("query-body").innerHTML =
        query.status === "finished"
          ? '<p class="idle">Session finished. Download the labels above.</p>'
          : '<p class="idle">Engine is choosing its next action…</p>';
    }
  }

  private renderQuery(query: PendingQuery): void {
    this.el("query-meta").textContent =
      `example #${query.example_id} (query ${query.query_id})`;
    const body = this.el("query-body");
    body.innerHTML = "";
    body.dataset.queryId = String(query.query_id);
    if (query.render_hint !== null) {
      const canvas = document.createElement("canvas");
      canvas.className = "example-raster";
      drawExample(canvas, query.features, query.render_hint);
      body.appendChild(canvas);
    } else {
      renderFeatureTable(body, query.features);
    }
    const classes = this.el("classes");
    classes.innerHTML = "";
    for (let cls = 0; cls < query.num_classes; cls++) {
      const button = document.createElement("button");
      button.className = "class-btn";
      button.textContent = String(cls);
      button.addEventListener("click", () => void this.submit(cls));
      classes.appendChild(button);
    }
  }

  private classButtons(): HTMLButtonElement[] {
    return [...this.root.querySelectorAll<HTMLButtonElement>(".class-btn")];
  }

  private setClassesEnabled(enabled: boolean): void {
    for (const button of this.classButtons()) {
      button.disabled = !enabled;
    }
  }

  private el(name: string): HTMLElement {
    const found = this.root.querySelector<HTMLElement>(`[data-el="${name}"]`);
    if (found === null) {
      throw new Error(`console layout is missing element ${name}`);
    }
    return found;
  }
}
