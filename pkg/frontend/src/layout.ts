// Grid-with-hierarchy auto-layout: a step's dashed children sit one
// column right of their parent, chain successors go down the same
// column. Stored geometry (document layout blob) overrides computed
// positions; the tree is always the source of truth for edges.

import { DocumentWire, ModuleWire, StepWire, rootOf } from "./model.js";

export interface NodeView {
  id: string;
  kind: string;
  col: number;
  row: number;
  order: number; // document order, used for canvas numbering
}

export interface EdgeView {
  from: string;
  to: string;
  kind: "solid" | "dashed";
  groupTag?: string;
}

export interface Scene {
  nodes: NodeView[];
  edges: EdgeView[];
}

export function layoutModule(
  mod: ModuleWire,
  stored?: Record<string, { col: number; row: number }>,
): Scene {
  const byId = new Map(mod.steps.map((s) => [s.id, s]));
  const nodes: NodeView[] = [];
  const edges: EdgeView[] = [];
  const seen = new Set<string>();
  let row = 0;
  let order = 0;

  function place(id: string | null, col: number): void {
    while (id !== null) {
      if (seen.has(id)) return;
      const step = byId.get(id);
      if (!step) return;
      seen.add(id);
      order += 1;
      nodes.push({ id, kind: step.kind, col, row, order });
      row += 1;
      for (const g of step.children) {
        if (g.entry) {
          edges.push({ from: id, to: g.entry, kind: "dashed",
                       groupTag: g.tag });
          place(g.entry, col + 1);
        }
      }
      if (step.next) {
        edges.push({ from: id, to: step.next, kind: "solid" });
      }
      id = step.next;
    }
  }

  let root: StepWire;
  try {
    root = rootOf(mod);
  } catch {
    return { nodes, edges };
  }
  place(root.id, 0);

  // orphans (mid-edit) park in a column right of everything
  const maxCol = nodes.reduce((m, n) => Math.max(m, n.col), 0);
  for (const s of mod.steps) {
    if (!seen.has(s.id)) {
      order += 1;
      nodes.push({ id: s.id, kind: s.kind, col: maxCol + 2, row,
                   order });
      row += 1;
    }
  }

  if (stored) {
    for (const n of nodes) {
      const hit = stored[n.id];
      if (hit) {
        n.col = hit.col;
        n.row = hit.row;
      }
    }
  }
  return { nodes, edges };
}

export function layoutEntry(doc: DocumentWire): Scene {
  const mod = doc.modules.find(
    (m) => m.name.toLowerCase() === doc.entry.toLowerCase(),
  );
  if (!mod) return { nodes: [], edges: [] };
  const stored = (doc.layout as Record<
    string, Record<string, { col: number; row: number }>
  > | undefined)?.[mod.name];
  return layoutModule(mod, stored);
}
