/**
 * Parse the canonical problem text into a view model. The format:
 *
 *   delta 3 2
 *   nodes:
 *   M^3
 *   P U^2
 *   edges:
 *   M [P U]
 *   U^2
 *
 * Slots are single tokens or [a b] disjunctions, with an optional ^k
 * repetition. Labels: plain identifiers, X, L{level.index,...} color sets,
 * P1/U2 pointers, <tok,...> set-labels.
 */

export interface Slot {
  labels: string[];
  reps: number;
}

export interface Row {
  slots: Slot[];
  text: string;
}

export interface ProblemView {
  deltaN: number;
  deltaE: number;
  nodeRows: Row[];
  edgeRows: Row[];
  labels: string[];
  nodeUnsatisfiable: boolean;
  edgeUnsatisfiable: boolean;
}

export type LabelKind = "wildcard" | "colors" | "pointer" | "set" | "plain";

export function labelKind(token: string): LabelKind {
  if (token === "X") return "wildcard";
  if (token.startsWith("L{")) return "colors";
  if (token.startsWith("<")) return "set";
  if (/^[PU][0-9]+$/.test(token)) return "pointer";
  return "plain";
}

/** Members of a set-label token, or null for anything else. */
export function setMembers(token: string): string[] | null {
  if (!token.startsWith("<") || !token.endsWith(">")) return null;
  const body = token.slice(1, -1);
  const parts: string[] = [];
  let depth = 0;
  let current = "";
  for (const ch of body) {
    if (ch === "<") depth += 1;
    if (ch === ">") depth -= 1;
    if (ch === "," && depth === 0) {
      parts.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  if (current) parts.push(current);
  return parts;
}

function tokenizeRow(line: string): Slot[] {
  const slots: Slot[] = [];
  let i = 0;
  const n = line.length;
  while (i < n) {
    const ch = line[i];
    if (ch === " " || ch === "\t") {
      i += 1;
      continue;
    }
    let labels: string[];
    if (ch === "[") {
      const end = line.indexOf("]", i);
      if (end < 0) throw new Error(`unclosed '[' in row: ${line}`);
      labels = line
        .slice(i + 1, end)
        .split(/\s+/)
        .filter((t) => t.length > 0);
      i = end + 1;
    } else {
      let j = i;
      let depth = 0;
      while (j < n) {
        const c = line[j];
        if (c === "<" || c === "{") depth += 1;
        if (c === ">" || c === "}") depth -= 1;
        if (depth === 0 && (c === " " || c === "^")) break;
        j += 1;
      }
      labels = [line.slice(i, j)];
      i = j;
    }
    let reps = 1;
    if (line[i] === "^") {
      let j = i + 1;
      while (j < n && /[0-9]/.test(line[j])) j += 1;
      reps = parseInt(line.slice(i + 1, j), 10);
      i = j;
    }
    slots.push({ labels, reps });
  }
  return slots;
}

export function parseProblem(text: string): ProblemView {
  let deltaN = 0;
  let deltaE = 0;
  const nodeRows: Row[] = [];
  const edgeRows: Row[] = [];
  let section: Row[] | null = null;
  for (const raw of text.split("\n")) {
    const line = raw.split("#")[0].trim();
    if (!line) continue;
    if (line.startsWith("delta ")) {
      const [, a, b] = line.split(/\s+/);
      deltaN = parseInt(a, 10);
      deltaE = parseInt(b, 10);
      continue;
    }
    if (line === "nodes:") {
      section = nodeRows;
      continue;
    }
    if (line === "edges:") {
      section = edgeRows;
      continue;
    }
    if (!section) throw new Error(`row outside a section: ${line}`);
    section.push({ slots: tokenizeRow(line), text: line });
  }
  const labels = new Set<string>();
  for (const row of [...nodeRows, ...edgeRows]) {
    for (const slot of row.slots) {
      for (const token of slot.labels) labels.add(token);
    }
  }
  return {
    deltaN,
    deltaE,
    nodeRows,
    edgeRows,
    labels: [...labels].sort(),
    nodeUnsatisfiable: nodeRows.length === 0,
    edgeUnsatisfiable: edgeRows.length === 0,
  };
}

export function countLabels(text: string): number {
  return parseProblem(text).labels.length;
}
