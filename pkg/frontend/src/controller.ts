// State machine behind the review screen. One controller per (session,
// rater) browser tab; every mutation goes straight to the service, which
// enforces write-once, so the worst a stale tab can do is hit a duplicate
// error and skip forward.

import { PanelServiceError, type PanelApi } from "./api.js";
import { diffHunks, type DiffHunk } from "./diff.js";
import { VERDICT_CHOICES, type Diagnostic, type RaterItem, type VerdictCategory } from "./types.js";

export type ItemView = {
  itemId: string;
  buggySource: string;
  compilerMessage: string;
  fixedSource: string;
  compileStatus: string;
  diagnostics: Diagnostic[];
  diffHunks: DiffHunk[];
  position: number; // 1-based: "position of total"
  total: number;
};

export type ReviewState =
  | { kind: "loading" }
  | { kind: "item"; view: ItemView; selected: VerdictCategory | null; notice: string | null }
  | { kind: "done"; annotated: number; total: number }
  | { kind: "error"; message: string; retryable: boolean };

// Only the listed fields cross into the view; anything else a response
// might carry (today or after a service change) is dropped here.
export function itemViewFrom(raw: RaterItem): ItemView {
  return {
    itemId: raw.item_id,
    buggySource: raw.buggy_source,
    compilerMessage: raw.compiler_message,
    fixedSource: raw.fixed_source,
    compileStatus: raw.compile_status,
    diagnostics: raw.diagnostics.map((d) => ({ ...d })),
    diffHunks: diffHunks(raw.buggy_source, raw.fixed_source),
    position: raw.position,
    total: raw.total,
  };
}

export class ReviewController {
  private current: ReviewState = { kind: "loading" };
  private listeners: Array<(state: ReviewState) => void> = [];

  constructor(
    private readonly client: PanelApi,
    readonly sessionId: string,
    readonly raterId: string,
  ) {}

  get state(): ReviewState {
    return this.current;
  }

  onChange(listener: (state: ReviewState) => void): void {
    this.listeners.push(listener);
  }

  async start(): Promise<void> {
    this.setState({ kind: "loading" });
    await this.advance(null);
  }

  // Retry after a network failure banner; same fetch as start().
  async refresh(): Promise<void> {
    await this.start();
  }

  select(category: VerdictCategory): void {
    if (this.current.kind !== "item") return;
    this.setState({ ...this.current, selected: category, notice: null });
  }

  selectByKey(key: string): boolean {
    if (this.current.kind !== "item") return false;
    for (const choice of VERDICT_CHOICES) {
      if (choice.key === key) {
        this.select(choice.category);
        return true;
      }
    }
    return false;
  }

  async submit(): Promise<void> {
    if (this.current.kind !== "item") return;
    const { view, selected } = this.current;
    if (selected === null) {
      this.setState({ ...this.current, notice: "Select a category before submitting." });
      return;
    }
    try {
      await this.client.submitAnnotation(this.sessionId, this.raterId, view.itemId, selected);
    } catch (err) {
      if (err instanceof PanelServiceError && err.status === 409) {
        // Already annotated (another tab, a reload race): nothing to save,
        // skip forward so the rater is never stuck.
        await this.advance(`Item ${view.itemId} was already annotated; skipped forward.`);
        return;
      }
      if (err instanceof PanelServiceError && err.status === 422) {
        this.setState({ ...this.current, notice: `Submission rejected: ${err.detail}` });
        return;
      }
      this.fail(err);
      return;
    }
    await this.advance(null);
  }

  private async advance(notice: string | null): Promise<void> {
    let next;
    try {
      next = await this.client.fetchNext(this.sessionId, this.raterId);
    } catch (err) {
      this.fail(err);
      return;
    }
    if (next.done) {
      this.setState({ kind: "done", annotated: next.annotated, total: next.total });
    } else {
      this.setState({ kind: "item", view: itemViewFrom(next.item), selected: null, notice });
    }
  }

  private fail(err: unknown): void {
    if (err instanceof PanelServiceError) {
      // Unknown session/rater cannot be fixed by retrying from this tab.
      const retryable = err.status !== 404;
      this.setState({ kind: "error", message: err.message, retryable });
      return;
    }
    const message = err instanceof Error ? err.message : String(err);
    this.setState({ kind: "error", message: `Cannot reach the panel service: ${message}`, retryable: true });
  }

  private setState(state: ReviewState): void {
    this.current = state;
    for (const listener of this.listeners) listener(state);
  }
}
