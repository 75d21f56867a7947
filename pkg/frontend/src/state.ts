/**
 * The workbench view state: a session id, a cursor, and whatever the service
 * last returned. Every displayed fact is fetched; nothing is derived by
 * mutating problems locally, so reloading from sessionId+cursor reproduces
 * the view exactly.
 */

import { Api, ApiError, DiagramView, SessionView } from "./api.js";

export interface MergeCandidate {
  from: string;
  into: string;
  valid: boolean | null; // null until checked against the engine
  reason?: string;
}

export interface ViewState {
  session: SessionView | null;
  lastSummary: Record<string, unknown> | null;
  fixedPoint: boolean;
  diagram: DiagramView | null;
  error: string | null;
  busy: boolean;
}

export class Workbench {
  state: ViewState = {
    session: null,
    lastSummary: null,
    fixedPoint: false,
    diagram: null,
    error: null,
    busy: false,
  };
  listeners: Array<(s: ViewState) => void> = [];

  constructor(private api: Api) {}

  onChange(listener: (s: ViewState) => void) {
    this.listeners.push(listener);
  }

  private emit() {
    for (const listener of this.listeners) listener(this.state);
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T | null> {
    this.state.busy = true;
    this.state.error = null;
    this.emit();
    try {
      return await work();
    } catch (err) {
      this.state.error =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      return null;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  get snapshot(): string {
    return this.state.session?.snapshot ?? "";
  }

  async createFromText(text: string, name = "") {
    await this.guarded(async () => {
      this.state.session = await this.api.createFromText(text, name);
      this.state.fixedPoint = false;
      this.state.diagram = null;
    });
  }

  async createFamily(delta: number, z: number[], name = "") {
    await this.guarded(async () => {
      this.state.session = await this.api.createFamily(delta, z, name);
      this.state.fixedPoint = false;
      this.state.diagram = null;
    });
  }

  async load(sessionId: string) {
    await this.guarded(async () => {
      this.state.session = await this.api.getSession(sessionId);
      this.state.fixedPoint = false;
      this.state.diagram = null;
    });
  }

  private async refresh() {
    if (this.state.session) {
      this.state.session = await this.api.getSession(this.state.session.id);
    }
  }

  async act(op: string, params: Record<string, unknown>) {
    await this.guarded(async () => {
      const id = this.state.session!.id;
      const result = await this.api.applyAction(id, op, params);
      this.state.lastSummary = result.summary;
      this.state.fixedPoint = result.summary["fixed_point"] === true;
      await this.refresh();
    });
  }

  async step(renameRe: string | null, renameRere: string | null) {
    await this.act("step", {
      rename_re: renameRe,
      rename_rere: renameRere,
    });
  }

  async seek(cursor: number) {
    await this.guarded(async () => {
      const id = this.state.session!.id;
      this.state.session = await this.api.seek(id, cursor);
      this.state.fixedPoint = false;
      this.state.diagram = null;
    });
  }

  async fork(): Promise<string | null> {
    const forked = await this.guarded(async () => {
      const id = this.state.session!.id;
      const clone = await this.api.fork(id);
      this.state.session = clone;
      return clone.id;
    });
    return forked;
  }

  async loadDiagram(side: "node" | "edge") {
    await this.guarded(async () => {
      const id = this.state.session!.id;
      this.state.diagram = await this.api.diagram(id, side);
      await this.refresh(); // the diagram query is itself a history event
    });
  }

  /**
   * Merge candidates come from the diagram only (weaker label into a
   * stronger one) and each is validated by the engine's dry run; a merge is
   * offered for applying only when the engine accepted it.
   */
  async mergeCandidates(): Promise<MergeCandidate[]> {
    const diagram = this.state.diagram;
    const session = this.state.session;
    if (!diagram || !session) return [];
    const out: MergeCandidate[] = [];
    for (const [weak, strong] of diagram.edges) {
      const candidate: MergeCandidate = { from: weak, into: strong, valid: null };
      const verdict = await this.api.checkRelaxation(session.id, [
        { kind: "merge_labels", labels: [weak], into: strong },
      ]);
      candidate.valid = verdict.valid;
      candidate.reason = verdict.reason;
      out.push(candidate);
    }
    return out;
  }

  async applyMerge(candidate: MergeCandidate) {
    if (candidate.valid !== true) {
      this.state.error = "merge rejected by the engine";
      this.emit();
      return;
    }
    await this.act("relax", {
      actions: [{ kind: "merge_labels", labels: [candidate.from], into: candidate.into }],
    });
  }

  /** Per-history-entry label counts for the timeline sparkline. */
  labelCounts(countOf: (problem: string) => number): number[] {
    const session = this.state.session;
    if (!session) return [];
    return session.history.map((entry) => countOf(entry.problem));
  }
}
