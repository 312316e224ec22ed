import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import {
  DocumentWire, GestureEngine, GestureError, emptyDocument,
} from "../src/model.js";

const FIXTURE = fileURLToPath(
  new URL("../fixtures/bubble_sort.patch.json", import.meta.url));

function loadReference(): DocumentWire {
  return JSON.parse(readFileSync(FIXTURE, "utf-8")) as DocumentWire;
}

function rejection(fn: () => void): { rule: string; message: string } {
  try {
    fn();
  } catch (e) {
    if (e instanceof GestureError) return e.rejection;
    throw e;
  }
  throw new Error("gesture unexpectedly accepted");
}

describe("gesture engine drawing rules", () => {
  it("builds a chain under the module root", () => {
    const eng = new GestureEngine(emptyDocument());
    const a = eng.placeIcon("assign");
    const b = eng.placeIcon("display");
    eng.connectDashed("root", a.id);
    eng.connectSolid(a.id, b.id);
    expect(eng.module.steps).toHaveLength(3);
    expect(eng.module.steps.find((s) => s.id === a.id)!.next).toBe(b.id);
  });

  it("rejects a second incoming solid edge with rule tree-shape", () => {
    const eng = new GestureEngine(loadReference(), "BubbleSort");
    // step 7 already follows step 6; a second solid arrow must bounce
    const r = rejection(() => eng.connectSolid("5", "7"));
    expect(r.rule).toBe("tree-shape");
  });

  it("rejects a solid edge into a dashed-entered node", () => {
    const eng = new GestureEngine(loadReference(), "BubbleSort");
    const extra = eng.placeIcon("display");
    // step 3 is the dashed entry of loop 2
    const r = rejection(() => eng.connectSolid(extra.id, "3"));
    expect(r.rule).toBe("tree-shape");
  });

  it("rejects an edge that closes a cycle", () => {
    const eng = new GestureEngine(emptyDocument());
    const a = eng.placeIcon("assign");
    const b = eng.placeIcon("display");
    eng.connectDashed("root", a.id);
    eng.connectSolid(a.id, b.id);
    const r = rejection(() => eng.connectSolid(b.id, a.id));
    expect(r.rule).toBe("tree-shape");
  });

  it("rejects edges into the module root", () => {
    const eng = new GestureEngine(emptyDocument());
    const a = eng.placeIcon("assign");
    eng.connectDashed("root", a.id);
    const r = rejection(() => eng.connectSolid(a.id, "root"));
    expect(r.rule).toBe("tree-shape");
  });

  it("rejects successors on exit and stop", () => {
    const eng = new GestureEngine(emptyDocument());
    const halt = eng.placeIcon("stop");
    const a = eng.placeIcon("assign");
    eng.connectDashed("root", halt.id);
    const r = rejection(() => eng.connectSolid(halt.id, a.id));
    expect(r.rule).toBe("terminal-shape");
  });

  it("rejects dashed children on plain steps", () => {
    const eng = new GestureEngine(emptyDocument());
    const a = eng.placeIcon("assign");
    const b = eng.placeIcon("display");
    eng.connectDashed("root", a.id);
    const r = rejection(() => eng.connectDashed(a.id, b.id));
    expect(r.rule).toBe("child-arity");
  });

  it("rejects a second entry into one child group", () => {
    const eng = new GestureEngine(emptyDocument());
    const loop = eng.placeIcon("counter-loop");
    const a = eng.placeIcon("assign");
    const b = eng.placeIcon("assign");
    eng.connectDashed("root", loop.id);
    eng.connectDashed(loop.id, a.id);
    const r = rejection(() => eng.connectDashed(loop.id, b.id));
    expect(r.rule).toBe("tree-shape");
  });

  it("rejects duplicate labels on a labeled branch", () => {
    const eng = new GestureEngine(emptyDocument());
    const match = eng.placeIcon("labeled");
    eng.connectDashed("root", match.id);
    expect(match.children).toHaveLength(0);  // arms arrive one by one
    eng.addArm(match.id, 1, "integer");
    const r = rejection(() => eng.addArm(match.id, 1, "integer"));
    expect(r.rule).toBe("label-unique");
  });

  it("deletes a whole subtree and detaches its edges", () => {
    const eng = new GestureEngine(loadReference(), "BubbleSort");
    eng.deleteSubtree("4");
    const ids = eng.module.steps.map((s) => s.id).sort();
    expect(ids).toEqual(["1", "2", "3", "8"]);
    const loop3 = eng.module.steps.find((s) => s.id === "3")!;
    expect(loop3.children[0].entry).toBeNull();
  });

  it("never deletes the module root", () => {
    const eng = new GestureEngine(emptyDocument());
    const r = rejection(() => eng.deleteSubtree("root"));
    expect(r.rule).toBe("module-root-unique");
  });
});
