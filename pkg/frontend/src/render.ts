/** DOM rendering: constraint tables, the diagram SVG, and the timeline. */

import { genPreview, layout } from "./diagram.js";
import type { DiagramView } from "./api.js";
import { labelKind, parseProblem, ProblemView, Row, setMembers } from "./problem.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function labelChip(token: string, compactSets: boolean): HTMLElement {
  const kind = labelKind(token);
  const chip = el("span", `chip chip-${kind}`);
  const members = setMembers(token);
  if (members && compactSets) {
    chip.textContent = `⟨${members.length}⟩`;
    chip.title = members.join(", ");
  } else {
    chip.textContent = token;
  }
  return chip;
}

function renderRow(row: Row, compactSets: boolean): HTMLElement {
  const cell = el("div", "row");
  for (const slot of row.slots) {
    const slotEl = el("span", slot.labels.length > 1 ? "slot disjunction" : "slot");
    for (const token of slot.labels) slotEl.appendChild(labelChip(token, compactSets));
    if (slot.reps > 1) slotEl.appendChild(el("sup", "reps", `${slot.reps}`));
    cell.appendChild(slotEl);
  }
  return cell;
}

export function renderProblem(
  container: HTMLElement,
  problemText: string,
  compactSets: boolean,
): ProblemView {
  const problem = parseProblem(problemText);
  container.innerHTML = "";
  const grid = el("div", "problem-grid");
  for (const [title, rows, unsat] of [
    [`nodes (degree ${problem.deltaN})`, problem.nodeRows, problem.nodeUnsatisfiable],
    [`edges (rank ${problem.deltaE})`, problem.edgeRows, problem.edgeUnsatisfiable],
  ] as const) {
    const column = el("div", "constraint");
    column.appendChild(el("h3", "", title));
    if (unsat) {
      column.appendChild(el("div", "badge badge-bad", "unsatisfiable"));
    }
    for (const row of rows) column.appendChild(renderRow(row, compactSets));
    grid.appendChild(column);
  }
  container.appendChild(grid);
  return problem;
}

const LAYER_H = 70;
const COL_W = 110;

export function renderDiagram(
  container: HTMLElement,
  diagram: DiagramView,
  onHover: (closure: string[]) => void,
): void {
  container.innerHTML = "";
  const placed = layout(diagram);
  if (placed.broken) {
    container.appendChild(
      el("div", "badge badge-bad", "cycle among strength classes (engine bug)"),
    );
    return;
  }
  const cols = Math.max(1, ...placed.classes.map((c) => c.column + 1));
  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("width", `${cols * COL_W + 40}`);
  svg.setAttribute("height", `${placed.layers * LAYER_H + 40}`);
  const pos = new Map<string, [number, number]>();
  for (const cls of placed.classes) {
    pos.set(cls.id, [
      cls.column * COL_W + 60,
      (placed.layers - 1 - cls.layer) * LAYER_H + 30,
    ]);
  }
  for (const edge of placed.edges) {
    const [x1, y1] = pos.get(edge.from)!;
    const [x2, y2] = pos.get(edge.to)!;
    const line = document.createElementNS(svgNs, "line");
    line.setAttribute("x1", `${x1}`);
    line.setAttribute("y1", `${y1 - 12}`);
    line.setAttribute("x2", `${x2}`);
    line.setAttribute("y2", `${y2 + 12}`);
    line.setAttribute("class", "diagram-edge");
    svg.appendChild(line);
  }
  for (const cls of placed.classes) {
    const [x, y] = pos.get(cls.id)!;
    const group = document.createElementNS(svgNs, "g");
    const box = document.createElementNS(svgNs, "rect");
    const label = cls.members.join(" = ");
    const width = Math.max(40, label.length * 7 + 12);
    box.setAttribute("x", `${x - width / 2}`);
    box.setAttribute("y", `${y - 12}`);
    box.setAttribute("width", `${width}`);
    box.setAttribute("height", "24");
    box.setAttribute(
      "class",
      cls.members.length > 1 ? "diagram-class equal" : "diagram-class",
    );
    const text = document.createElementNS(svgNs, "text");
    text.setAttribute("x", `${x}`);
    text.setAttribute("y", `${y + 4}`);
    text.setAttribute("text-anchor", "middle");
    text.textContent = label;
    group.appendChild(box);
    group.appendChild(text);
    group.addEventListener("mouseenter", () =>
      onHover(genPreview(diagram, cls.members[0])),
    );
    group.addEventListener("mouseleave", () => onHover([]));
    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export function renderTimeline(
  container: HTMLElement,
  entries: { op: string; labels: number }[],
  cursor: number,
  bound: number | null,
  onSeek: (index: number) => void,
): void {
  container.innerHTML = "";
  const maxLabels = Math.max(1, ...entries.map((e) => e.labels), bound ?? 0);
  for (const [index, entry] of entries.entries()) {
    const item = el(
      "button",
      index === cursor ? "timeline-entry current" : "timeline-entry",
    );
    const bar = el("span", "spark");
    bar.style.height = `${Math.round((entry.labels / maxLabels) * 28) + 2}px`;
    if (bound !== null && entry.labels > bound) bar.classList.add("over-bound");
    item.appendChild(bar);
    item.appendChild(el("span", "op", `${index}: ${entry.op} (${entry.labels})`));
    item.addEventListener("click", () => onSeek(index));
    container.appendChild(item);
  }
}
