// DOM rendering for the editor's five regions: command bar, icon bank,
// canvas, display/input console, diagnostics. Rendering is driven by
// plain data (Scene, Frame) so the logic stays testable headless.

import { Scene } from "./layout.js";
import { Frame, barHeights } from "./animation.js";
import { ValidationFinding } from "./api.js";

export const CELL_W = 130;
export const CELL_H = 64;

const ICON_LABELS: Record<string, string> = {
  "module-root": "module",
  "assign": "assign",
  "transform": "compute",
  "read": "read",
  "display": "show",
  "by-pass": "if",
  "either-or": "if/else",
  "labeled": "match",
  "counter-loop": "count loop",
  "conditional-loop": "while loop",
  "sentinel-loop": "marker loop",
  "call": "call",
  "exit": "exit",
  "stop": "stop",
};

export function iconLabel(kind: string): string {
  return ICON_LABELS[kind] ?? kind;
}

export function renderCanvas(
  svg: SVGSVGElement,
  scene: Scene,
  selected: string | null,
  activeStep: string | null,
  onSelect: (id: string) => void,
  onForm: (id: string) => void,
): void {
  const ns = "http://www.w3.org/2000/svg";
  svg.innerHTML = "";
  const pos = new Map(scene.nodes.map((n) => [n.id, n]));
  const centerX = (c: number) => c * CELL_W + CELL_W / 2 + 10;
  const centerY = (r: number) => r * CELL_H + CELL_H / 2 + 10;

  const maxCol = scene.nodes.reduce((m, n) => Math.max(m, n.col), 0);
  const maxRow = scene.nodes.reduce((m, n) => Math.max(m, n.row), 0);
  svg.setAttribute("width", String((maxCol + 1) * CELL_W + 40));
  svg.setAttribute("height", String((maxRow + 1) * CELL_H + 40));

  for (const e of scene.edges) {
    const a = pos.get(e.from);
    const b = pos.get(e.to);
    if (!a || !b) continue;
    const line = document.createElementNS(ns, "line");
    line.setAttribute("x1", String(centerX(a.col)));
    line.setAttribute("y1", String(centerY(a.row)));
    line.setAttribute("x2", String(centerX(b.col)));
    line.setAttribute("y2", String(centerY(b.row)));
    line.setAttribute("class",
      e.kind === "dashed" ? "edge dashed" : "edge solid");
    svg.appendChild(line);
  }

  for (const n of scene.nodes) {
    const g = document.createElementNS(ns, "g");
    g.setAttribute("class",
      "node" + (n.id === selected ? " selected" : "") +
      (n.id === activeStep ? " active" : ""));
    g.setAttribute("data-step", n.id);
    const rect = document.createElementNS(ns, "rect");
    rect.setAttribute("x", String(centerX(n.col) - 52));
    rect.setAttribute("y", String(centerY(n.row) - 22));
    rect.setAttribute("width", "104");
    rect.setAttribute("height", "44");
    rect.setAttribute("rx", "9");
    g.appendChild(rect);
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", String(centerX(n.col)));
    label.setAttribute("y", String(centerY(n.row) - 2));
    label.setAttribute("text-anchor", "middle");
    label.textContent = iconLabel(n.kind);
    g.appendChild(label);
    const num = document.createElementNS(ns, "text");
    num.setAttribute("x", String(centerX(n.col)));
    num.setAttribute("y", String(centerY(n.row) + 15));
    num.setAttribute("text-anchor", "middle");
    num.setAttribute("class", "ordinal");
    num.textContent = `${n.order}`;
    g.appendChild(num);
    g.addEventListener("click", (ev) => {
      ev.stopPropagation();
      onSelect(n.id);
    });
    g.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      onForm(n.id);
    });
    svg.appendChild(g);
  }
}

export function renderBars(
  container: HTMLElement,
  frame: Frame | null,
  maxHeight = 160,
): void {
  container.innerHTML = "";
  if (!frame || frame.bars.length === 0) return;
  const heights = barHeights(frame.bars, maxHeight);
  frame.bars.forEach((v, i) => {
    const bar = document.createElement("div");
    bar.className = "bar";
    if (frame.comparing && (frame.comparing[0] === i ||
                            frame.comparing[1] === i)) {
      bar.classList.add("comparing");
    }
    if (frame.swapped && (frame.swapped[0] === i ||
                          frame.swapped[1] === i)) {
      bar.classList.add("swapped");
    }
    bar.style.height = `${heights[i]}px`;
    bar.title = String(v);
    const tag = document.createElement("span");
    tag.textContent = String(v);
    bar.appendChild(tag);
    container.appendChild(bar);
  });
}

export function renderDiagnostics(
  panel: HTMLElement,
  findings: ValidationFinding[],
  note?: string,
): void {
  panel.innerHTML = "";
  if (note) {
    const line = document.createElement("div");
    line.className = "note";
    line.textContent = note;
    panel.appendChild(line);
  }
  if (findings.length === 0 && !note) {
    const ok = document.createElement("div");
    ok.className = "ok";
    ok.textContent = "no findings";
    panel.appendChild(ok);
    return;
  }
  for (const f of findings) {
    const line = document.createElement("div");
    line.className = "finding";
    line.textContent = `step=${f.step || "-"} rule=${f.rule} ${f.message}`;
    panel.appendChild(line);
  }
}

export function renderConsoleLines(panel: HTMLElement,
                                   lines: string[]): void {
  panel.innerHTML = "";
  for (const text of lines) {
    const line = document.createElement("div");
    line.textContent = text;
    panel.appendChild(line);
  }
}
