/** Workbench bootstrap: wires the fetch-only state to the panels. */

import { Api } from "./api.js";
import { countLabels } from "./problem.js";
import { renderDiagram, renderProblem, renderTimeline } from "./render.js";
import { MergeCandidate, Workbench } from "./state.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function start() {
  const baseInput = byId<HTMLInputElement>("base-url");
  let workbench = new Workbench(new Api(baseInput.value));
  let compactSets = true;

  const problemPanel = byId<HTMLDivElement>("problem-panel");
  const diagramPanel = byId<HTMLDivElement>("diagram-panel");
  const timelinePanel = byId<HTMLDivElement>("timeline-panel");
  const consoleOut = byId<HTMLPreElement>("console-out");
  const badge = byId<HTMLSpanElement>("fixed-point-badge");
  const errorBar = byId<HTMLDivElement>("error-bar");
  const hoverOut = byId<HTMLDivElement>("hover-out");
  const mergeList = byId<HTMLDivElement>("merge-list");

  function redraw() {
    const state = workbench.state;
    errorBar.textContent = state.error ?? "";
    errorBar.style.display = state.error ? "block" : "none";
    badge.style.display = state.fixedPoint ? "inline-block" : "none";
    if (state.session) {
      try {
        renderProblem(problemPanel, state.session.snapshot, compactSets);
      } catch {
        // fall back to the raw text rather than hiding the snapshot
        problemPanel.innerHTML = "";
        const pre = document.createElement("pre");
        pre.textContent = state.session.snapshot;
        problemPanel.appendChild(pre);
      }
      renderTimeline(
        timelinePanel,
        state.session.history.map((entry) => ({
          op: entry.action.op,
          labels: countLabels(entry.problem),
        })),
        state.session.cursor,
        null,
        (index) => void workbench.seek(index),
      );
    }
    if (state.diagram) {
      renderDiagram(diagramPanel, state.diagram, (closure) => {
        hoverOut.textContent = closure.length
          ? `gen: ${closure.join(" ")}`
          : "";
      });
    } else {
      diagramPanel.innerHTML = "";
    }
    consoleOut.textContent = state.lastSummary
      ? JSON.stringify(state.lastSummary, null, 1)
      : "";
  }

  workbench.onChange(redraw);

  baseInput.addEventListener("change", () => {
    workbench = new Workbench(new Api(baseInput.value));
    workbench.onChange(redraw);
  });

  byId<HTMLButtonElement>("create-text").addEventListener("click", () => {
    const text = byId<HTMLTextAreaElement>("problem-text").value;
    void workbench.createFromText(text);
  });
  byId<HTMLButtonElement>("create-family").addEventListener("click", () => {
    const delta = parseInt(byId<HTMLInputElement>("family-delta").value, 10);
    const z = byId<HTMLInputElement>("family-z")
      .value.replace(/[[\]]/g, "")
      .split(",")
      .map((value) => parseInt(value.trim(), 10));
    void workbench.createFamily(delta, z);
  });
  byId<HTMLButtonElement>("load-session").addEventListener("click", () => {
    void workbench.load(byId<HTMLInputElement>("session-id").value.trim());
  });

  byId<HTMLButtonElement>("do-step").addEventListener("click", () => {
    const renameRe = byId<HTMLSelectElement>("rename-re").value || null;
    const renameRere = byId<HTMLSelectElement>("rename-rere").value || null;
    void workbench.step(renameRe, renameRere);
  });
  byId<HTMLButtonElement>("do-zero-round").addEventListener("click", () => {
    void workbench.act("zero-round", {});
  });
  byId<HTMLButtonElement>("do-fork").addEventListener("click", () => {
    void workbench.fork();
  });
  for (const side of ["node", "edge"] as const) {
    byId<HTMLButtonElement>(`diagram-${side}`).addEventListener("click", () => {
      void workbench.loadDiagram(side);
    });
  }
  byId<HTMLButtonElement>("do-simulate").addEventListener("click", () => {
    void workbench.act("simulate", {
      algorithm: "sweep",
      beta: 1,
      instance: {
        kind: "random-tree",
        delta: 3,
        n: 40,
        ports: "random",
        coloring: { proper: 4 },
        seed: 7,
      },
    });
  });
  byId<HTMLButtonElement>("toggle-sets").addEventListener("click", () => {
    compactSets = !compactSets;
    redraw();
  });

  byId<HTMLButtonElement>("load-merges").addEventListener("click", async () => {
    mergeList.innerHTML = "loading...";
    const candidates = await workbench.mergeCandidates();
    mergeList.innerHTML = "";
    for (const candidate of candidates) {
      const button = document.createElement("button");
      button.textContent = `${candidate.from} -> ${candidate.into}`;
      button.disabled = candidate.valid !== true;
      button.title = candidate.valid ? "apply merge" : candidate.reason ?? "rejected";
      button.addEventListener("click", () => {
        void applyMerge(candidate);
      });
      mergeList.appendChild(button);
    }
    if (!candidates.length) mergeList.textContent = "no diagram-valid merges";
  });

  async function applyMerge(candidate: MergeCandidate) {
    await workbench.applyMerge(candidate);
  }
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
