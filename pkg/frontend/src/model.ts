// Document model and gesture engine for the Patch canvas editor.
//
// The types mirror the .patch.json wire format. Gestures mutate a
// document only after passing the same drawing-rule checks the service
// enforces, under the same rule ids, so anything the editor builds
// validates server-side with an empty report.

export type TypeWire =
  | "integer"
  | "real"
  | "boolean"
  | "string"
  | { list: TypeWire | null }
  | { set: TypeWire | null }
  | { tuple: { name: string; type: TypeWire }[] };

export interface ExprWire {
  expr: "lit" | "var" | "index" | "field" | "unary" | "binary";
  [key: string]: unknown;
}

export interface ChildGroupWire {
  tag: "body" | "then" | "else" | "arm" | "default";
  entry: string | null;
  label?: unknown;
  labelType?: TypeWire;
}

export interface StepWire {
  id: string;
  kind: string;
  payload: Record<string, unknown>;
  next: string | null;
  children: ChildGroupWire[];
  [extra: string]: unknown;
}

export interface DeclWire {
  name: string;
  type: TypeWire;
  binding: "caller" | "console" | "repository";
}

export interface ModuleWire {
  name: string;
  inputs: DeclWire[];
  outputs: DeclWire[];
  steps: StepWire[];
  [extra: string]: unknown;
}

export interface DocumentWire {
  formatVersion: number;
  entry: string;
  modules: ModuleWire[];
  layout?: unknown;
  [extra: string]: unknown;
}

export const CONTAINER_KINDS = new Set([
  "module-root", "by-pass", "either-or", "labeled",
  "counter-loop", "conditional-loop", "sentinel-loop",
]);

export const TERMINAL_KINDS = new Set(["exit", "stop"]);

export const STEP_KINDS = [
  "assign", "transform", "read", "display", "by-pass", "either-or",
  "labeled", "counter-loop", "conditional-loop", "sentinel-loop",
  "call", "exit", "stop",
] as const;

export interface Rejection {
  rule: string;
  message: string;
}

export class GestureError extends Error {
  constructor(public rejection: Rejection) {
    super(`${rejection.rule}: ${rejection.message}`);
  }
}

function reject(rule: string, message: string): never {
  throw new GestureError({ rule, message });
}

export function stepById(mod: ModuleWire, id: string): StepWire {
  const s = mod.steps.find((x) => x.id === id);
  if (!s) reject("unknown-step", `no step ${id}`);
  return s;
}

export function rootOf(mod: ModuleWire): StepWire {
  const roots = mod.steps.filter((s) => s.kind === "module-root");
  if (roots.length !== 1) reject("module-root-unique", "need one root");
  return roots[0];
}

/** Incoming edge accounting over the whole module. */
function incomingEdges(mod: ModuleWire): Map<string, { solid: string[]; dashed: string[] }> {
  const incoming = new Map<string, { solid: string[]; dashed: string[] }>();
  const slot = (id: string) => {
    let e = incoming.get(id);
    if (!e) {
      e = { solid: [], dashed: [] };
      incoming.set(id, e);
    }
    return e;
  };
  for (const s of mod.steps) {
    if (s.next) slot(s.next).solid.push(s.id);
    for (const g of s.children) {
      if (g.entry) slot(g.entry).dashed.push(s.id);
    }
  }
  return incoming;
}

/** Would adding edge from->to (solid or dashed) break the drawing rules? */
function checkNewEdge(
  mod: ModuleWire,
  from: string,
  to: string,
  dashed: boolean,
): void {
  const target = stepById(mod, to);
  if (target.kind === "module-root") {
    reject("tree-shape", "the module root takes no incoming edges");
  }
  const incoming = incomingEdges(mod).get(to) ?? { solid: [], dashed: [] };
  if (!dashed && incoming.solid.length > 0) {
    reject("tree-shape",
      `step ${to} already has an incoming solid edge from ${incoming.solid[0]}`);
  }
  if (dashed && incoming.dashed.length > 0) {
    reject("tree-shape",
      `step ${to} already has an incoming dashed edge from ${incoming.dashed[0]}`);
  }
  if ((dashed && incoming.solid.length > 0) ||
      (!dashed && incoming.dashed.length > 0)) {
    reject("tree-shape",
      `step ${to} cannot take both a solid and a dashed edge`);
  }
  // adding from->to must not close a cycle: `to` must not reach `from`
  const seen = new Set<string>();
  const stack = [to];
  while (stack.length) {
    const cur = stack.pop()!;
    if (cur === from) reject("tree-shape", "edge would close a cycle");
    if (seen.has(cur)) continue;
    seen.add(cur);
    const step = mod.steps.find((s) => s.id === cur);
    if (!step) continue;
    if (step.next) stack.push(step.next);
    for (const g of step.children) if (g.entry) stack.push(g.entry);
  }
}

function defaultChildren(kind: string): ChildGroupWire[] {
  switch (kind) {
    case "module-root":
    case "by-pass":
    case "counter-loop":
    case "conditional-loop":
    case "sentinel-loop":
      return [{ tag: "body", entry: null }];
    case "either-or":
      return [{ tag: "then", entry: null }, { tag: "else", entry: null }];
    case "labeled":
      return [];
    default:
      return [];
  }
}

export function lit(value: unknown, type: TypeWire): ExprWire {
  return { expr: "lit", type, value };
}

export function varRef(name: string): ExprWire {
  return { expr: "var", name };
}

export function defaultPayload(kind: string): Record<string, unknown> {
  switch (kind) {
    case "assign":
    case "transform":
      return { target: varRef("x"), source: lit(0, "integer") };
    case "read":
      return { target: "x", type: "integer" };
    case "display":
      return { value: lit(0, "integer") };
    case "by-pass":
    case "either-or":
    case "conditional-loop":
      return { condition: lit(true, "boolean") };
    case "labeled":
      return { scrutinee: lit(0, "integer") };
    case "counter-loop":
      return {
        var: "i",
        start: lit(1, "integer"),
        end: lit(1, "integer"),
        direction: "auto",
      };
    case "sentinel-loop":
      return {
        var: "e",
        collection: lit([], { list: "integer" }),
        marker: lit(0, "integer"),
      };
    case "call":
      return { module: "", args: [], results: [] };
    default:
      return {};
  }
}

/**
 * Gesture engine: every mutation checks the drawing rules before it
 * lands. Rejected gestures throw GestureError carrying the rule id the
 * diagnostics panel shows inline.
 */
export class GestureEngine {
  constructor(public doc: DocumentWire, public moduleName?: string) {}

  get module(): ModuleWire {
    const name = this.moduleName ?? this.doc.entry;
    const mod = this.doc.modules.find(
      (m) => m.name.toLowerCase() === name.toLowerCase(),
    );
    if (!mod) reject("entry-exists", `no module ${name}`);
    return mod;
  }

  /** Place a new icon on the canvas (no edges yet). */
  placeIcon(kind: string, id?: string): StepWire {
    if (!(STEP_KINDS as readonly string[]).includes(kind)) {
      reject("payload-shape", `unknown icon ${kind}`);
    }
    const mod = this.module;
    const stepId = id ?? this.freshId();
    if (mod.steps.some((s) => s.id === stepId)) {
      reject("duplicate-step-id", `step id ${stepId} already used`);
    }
    const step: StepWire = {
      id: stepId,
      kind,
      payload: defaultPayload(kind),
      next: null,
      children: defaultChildren(kind),
    };
    mod.steps.push(step);
    return step;
  }

  /** Connect a solid (control flow) arrow from -> to. */
  connectSolid(from: string, to: string): void {
    const mod = this.module;
    const src = stepById(mod, from);
    if (TERMINAL_KINDS.has(src.kind)) {
      reject("terminal-shape", `${src.kind} ends its chain`);
    }
    if (src.kind === "module-root") {
      reject("tree-shape", "the module root has no solid successor");
    }
    if (src.next !== null) {
      reject("tree-shape", `step ${from} already has a solid successor`);
    }
    checkNewEdge(mod, from, to, false);
    src.next = to;
  }

  /** Connect a dashed (membership) arrow into a child group. */
  connectDashed(from: string, to: string, groupIndex = 0): void {
    const mod = this.module;
    const src = stepById(mod, from);
    if (!CONTAINER_KINDS.has(src.kind)) {
      reject("child-arity", `${src.kind} steps take no child groups`);
    }
    const group = src.children[groupIndex];
    if (!group) reject("child-arity", `no group ${groupIndex} on ${from}`);
    if (group.entry !== null) {
      reject("tree-shape",
        `group ${group.tag} of ${from} already has an entry`);
    }
    checkNewEdge(mod, from, to, true);
    group.entry = to;
  }

  /** Add a labeled arm (or default group) to a labeled branch. */
  addArm(on: string, label: unknown, labelType: TypeWire | null): void {
    const mod = this.module;
    const step = stepById(mod, on);
    if (step.kind !== "labeled") {
      reject("child-arity", "arms belong to labeled branches");
    }
    if (labelType === null) {
      if (step.children.some((g) => g.tag === "default")) {
        reject("child-arity", "only one default group");
      }
      step.children.push({ tag: "default", entry: null });
      return;
    }
    const duplicate = step.children.some(
      (g) => g.tag === "arm" && JSON.stringify(g.label) === JSON.stringify(label),
    );
    if (duplicate) reject("label-unique", `duplicate label ${label}`);
    step.children.push({ tag: "arm", entry: null, label, labelType });
  }

  /** Fill a step's form (right-click form submit). */
  setPayload(id: string, payload: Record<string, unknown>): void {
    const step = stepById(this.module, id);
    step.payload = { ...step.payload, ...payload };
  }

  /** Edit the module's declared data objects (the module form). */
  setDecls(inputs: DeclWire[], outputs: DeclWire[]): void {
    for (const decls of [inputs, outputs]) {
      const seen = new Set<string>();
      for (const d of decls) {
        const n = d.name.toLowerCase();
        if (seen.has(n)) {
          reject("decl-name-unique", `duplicate name ${d.name}`);
        }
        seen.add(n);
      }
    }
    this.module.inputs = inputs;
    this.module.outputs = outputs;
  }

  /** Delete a step and its whole dashed/solid subtree. */
  deleteSubtree(id: string): void {
    const mod = this.module;
    const victim = stepById(mod, id);
    if (victim.kind === "module-root") {
      reject("module-root-unique", "the module root cannot be deleted");
    }
    const doomed = new Set<string>();
    const stack = [id];
    while (stack.length) {
      const cur = stack.pop()!;
      if (doomed.has(cur)) continue;
      doomed.add(cur);
      const step = mod.steps.find((s) => s.id === cur);
      if (!step) continue;
      if (step.next) stack.push(step.next);
      for (const g of step.children) if (g.entry) stack.push(g.entry);
    }
    for (const s of mod.steps) {
      if (s.next && doomed.has(s.next)) s.next = null;
      for (const g of s.children) {
        if (g.entry && doomed.has(g.entry)) g.entry = null;
      }
    }
    mod.steps = mod.steps.filter((s) => !doomed.has(s.id));
  }

  freshId(): string {
    const used = new Set(this.module.steps.map((s) => s.id));
    let n = 1;
    while (used.has(`n${n}`)) n += 1;
    return `n${n}`;
  }
}

export function emptyDocument(moduleName = "Main"): DocumentWire {
  return {
    formatVersion: 1,
    entry: moduleName,
    modules: [
      {
        name: moduleName,
        inputs: [],
        outputs: [],
        steps: [
          {
            id: "root",
            kind: "module-root",
            payload: {},
            next: null,
            children: [{ tag: "body", entry: null }],
          },
        ],
      },
    ],
  };
}
