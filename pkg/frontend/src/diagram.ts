/**
 * Layered layout for the label-strength diagram. Nodes are equal-strength
 * classes; the layer of a class is its longest path distance from a source,
 * so arrows always point upward one or more layers. A cycle among classes
 * marks the layout as broken (surfaced as an error banner, never hidden).
 */

import type { DiagramView } from "./api.js";

export interface PlacedClass {
  id: string;
  members: string[];
  layer: number;
  column: number;
}

export interface PlacedEdge {
  from: string;
  to: string;
}

export interface Layout {
  classes: PlacedClass[];
  edges: PlacedEdge[];
  layers: number;
  broken: boolean;
}

function classIdOf(members: string[]): string {
  return [...members].sort()[0];
}

export function layout(diagram: DiagramView): Layout {
  const classes = diagram.classes.map((members) => ({
    id: classIdOf(members),
    members: [...members].sort(),
  }));
  const byLabel = new Map<string, string>();
  for (const cls of classes) {
    for (const member of cls.members) byLabel.set(member, cls.id);
  }
  const successors = new Map<string, Set<string>>();
  for (const cls of classes) successors.set(cls.id, new Set());
  for (const [weak, strong] of diagram.edges) {
    const a = byLabel.get(weak);
    const b = byLabel.get(strong);
    if (a === undefined || b === undefined || a === b) continue;
    successors.get(a)!.add(b);
  }

  // longest-path layering with cycle detection
  const layer = new Map<string, number>();
  const visiting = new Set<string>();
  let broken = false;

  function depth(id: string): number {
    if (layer.has(id)) return layer.get(id)!;
    if (visiting.has(id)) {
      broken = true;
      return 0;
    }
    visiting.add(id);
    let best = 0;
    for (const prev of classes.map((c) => c.id)) {
      if (successors.get(prev)!.has(id)) {
        best = Math.max(best, depth(prev) + 1);
      }
    }
    visiting.delete(id);
    layer.set(id, best);
    return best;
  }

  for (const cls of classes) depth(cls.id);

  const columns = new Map<number, number>();
  const placed: PlacedClass[] = classes
    .slice()
    .sort((a, b) => (a.id < b.id ? -1 : 1))
    .map((cls) => {
      const l = layer.get(cls.id) ?? 0;
      const column = columns.get(l) ?? 0;
      columns.set(l, column + 1);
      return { id: cls.id, members: cls.members, layer: l, column };
    });
  const edges: PlacedEdge[] = [];
  for (const [from, targets] of successors) {
    for (const to of targets) edges.push({ from, to });
  }
  edges.sort((a, b) => (a.from + a.to < b.from + b.to ? -1 : 1));
  return {
    classes: placed,
    edges,
    layers: Math.max(0, ...placed.map((c) => c.layer)) + 1,
    broken,
  };
}

/** Labels at least as strong as the given one: its class plus everything
 * reachable in the class graph (the closure shown on hover). */
export function genPreview(diagram: DiagramView, label: string): string[] {
  const placed = layout(diagram);
  const byLabel = new Map<string, PlacedClass>();
  for (const cls of placed.classes) {
    for (const member of cls.members) byLabel.set(member, cls);
  }
  const start = byLabel.get(label);
  if (!start) return [];
  const adjacency = new Map<string, string[]>();
  for (const edge of placed.edges) {
    const list = adjacency.get(edge.from) ?? [];
    list.push(edge.to);
    adjacency.set(edge.from, list);
  }
  const seen = new Set<string>([start.id]);
  const queue = [start.id];
  while (queue.length) {
    const current = queue.shift()!;
    for (const next of adjacency.get(current) ?? []) {
      if (!seen.has(next)) {
        seen.add(next);
        queue.push(next);
      }
    }
  }
  const out = new Set<string>();
  for (const cls of placed.classes) {
    if (seen.has(cls.id)) for (const member of cls.members) out.add(member);
  }
  return [...out].sort();
}
