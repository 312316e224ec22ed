// Application boot: wires the gesture engine, the service client, and
// the trace player into the five panels.

import {
  DocumentWire, GestureEngine, GestureError, STEP_KINDS, emptyDocument,
} from "./model.js";
import { layoutEntry } from "./layout.js";
import { PatchApi, ValidationFinding } from "./api.js";
import { Frame, WireEvent, buildFrames } from "./animation.js";
import {
  iconLabel, renderBars, renderCanvas, renderConsoleLines,
  renderDiagnostics,
} from "./ui.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

type Mode = { kind: "idle" } | { kind: "connect"; dashed: boolean;
              from: string; group: number };

class EditorApp {
  api = new PatchApi(
    (document.body.dataset.service ?? "http://127.0.0.1:7341"));
  docId = "scratch";
  engine = new GestureEngine(emptyDocument());
  selected: string | null = null;
  mode: Mode = { kind: "idle" };
  findings: ValidationFinding[] = [];
  frames: Frame[] = [];
  cursor = 0;
  playing: number | null = null;
  session: string | null = null;
  watching = "list";

  boot(): void {
    this.buildIconBank();
    $("btn-run").addEventListener("click", () => this.run());
    $("btn-stop").addEventListener("click", () => this.stop());
    $("btn-save").addEventListener("click", () => this.save());
    $("btn-load").addEventListener("click", () => this.load());
    $("btn-emit").addEventListener("click", () => this.emit());
    $("btn-play").addEventListener("click", () => this.play());
    $("btn-pause").addEventListener("click", () => this.pause());
    $("btn-solid").addEventListener("click", () => this.armConnect(false));
    $("btn-dashed").addEventListener("click", () => this.armConnect(true));
    $("btn-delete").addEventListener("click", () => this.deleteSelected());
    const scrub = $("scrub") as HTMLInputElement;
    scrub.addEventListener("input", () => {
      this.pause();
      this.cursor = Number(scrub.value);
      this.showFrame();
    });
    ($("doc-id") as HTMLInputElement).value = this.docId;
    this.redraw();
  }

  buildIconBank(): void {
    const bank = $("icon-bank");
    for (const kind of STEP_KINDS) {
      const btn = document.createElement("button");
      btn.textContent = iconLabel(kind);
      btn.title = kind;
      btn.addEventListener("click", () => this.gesture(() => {
        const step = this.engine.placeIcon(kind);
        this.selected = step.id;
      }));
      bank.appendChild(btn);
    }
  }

  gesture(fn: () => void): void {
    try {
      fn();
      this.note("");
    } catch (e) {
      if (e instanceof GestureError) {
        this.note(`rejected: rule=${e.rejection.rule} ` +
                  e.rejection.message);
      } else {
        this.note(String(e));
      }
    }
    this.redraw();
  }

  armConnect(dashed: boolean): void {
    if (!this.selected) {
      this.note("select the source step first");
      return;
    }
    const group = dashed
      ? Number((prompt("child group index (0-based)", "0") ?? "0"))
      : 0;
    this.mode = { kind: "connect", dashed, from: this.selected, group };
    this.note(`pick the ${dashed ? "dashed" : "solid"} target of ` +
              this.selected);
  }

  onSelect(id: string): void {
    if (this.mode.kind === "connect") {
      const m = this.mode;
      this.mode = { kind: "idle" };
      this.gesture(() => {
        if (m.dashed) this.engine.connectDashed(m.from, id, m.group);
        else this.engine.connectSolid(m.from, id);
      });
      return;
    }
    this.selected = id;
    this.redraw();
  }

  onForm(id: string): void {
    const step = this.engine.module.steps.find((s) => s.id === id);
    if (!step) return;
    const text = prompt(`payload for ${step.kind} ${id}`,
                        JSON.stringify(step.payload));
    if (text === null) return;
    this.gesture(() => {
      this.engine.setPayload(id, JSON.parse(text));
    });
  }

  deleteSelected(): void {
    if (!this.selected) return;
    const id = this.selected;
    this.selected = null;
    this.gesture(() => this.engine.deleteSubtree(id));
  }

  async save(): Promise<void> {
    this.docId = ($("doc-id") as HTMLInputElement).value || "scratch";
    try {
      this.findings = await this.api.putDocument(this.docId,
                                                 this.engine.doc);
      this.note(this.findings.length ? "" : "saved; report empty");
    } catch (e) {
      this.note(String(e));
    }
    this.redraw();
  }

  async load(): Promise<void> {
    this.docId = ($("doc-id") as HTMLInputElement).value || "scratch";
    try {
      const doc = await this.api.getDocument(this.docId);
      this.engine = new GestureEngine(doc as DocumentWire);
      this.selected = null;
      this.findings = [];
      this.note(`loaded ${this.docId}`);
    } catch (e) {
      this.note(String(e));
    }
    this.redraw();
  }

  async run(): Promise<void> {
    await this.save();
    if (this.findings.length) {
      this.note("fix the findings before running");
      return;
    }
    const inputsText =
      ($("run-inputs") as HTMLInputElement).value.trim();
    const inputs: Record<string, string> = {};
    if (inputsText) {
      for (const pair of inputsText.split(";")) {
        const eq = pair.indexOf("=");
        if (eq > 0) {
          inputs[pair.slice(0, eq).trim()] = pair.slice(eq + 1).trim();
        }
      }
    }
    this.watching = ($("watch-var") as HTMLInputElement).value || "list";
    const events: WireEvent[] = [];
    try {
      this.session = await this.api.startRun(this.docId, inputs);
      const status = await this.api.streamEvents(this.session, (ev) => {
        events.push(ev);
      });
      this.frames = buildFrames(events, this.watching);
      this.cursor = 0;
      ($("scrub") as HTMLInputElement).max =
        String(Math.max(0, this.frames.length - 1));
      this.note(`run ${status.status}; ${events.length} events` +
        (status.outputs ? "; outputs " + JSON.stringify(status.outputs)
                        : ""));
      this.play();
    } catch (e) {
      this.note(String(e));
    }
  }

  async stop(): Promise<void> {
    if (this.session) await this.api.stopRun(this.session);
  }

  async emit(): Promise<void> {
    await this.save();
    try {
      const text = await this.api.emit(this.docId, "py3");
      const pane = $("emitted");
      pane.textContent = text;
      pane.style.display = "block";
    } catch (e) {
      this.note(String(e));
    }
  }

  play(): void {
    this.pause();
    this.playing = window.setInterval(() => {
      if (this.cursor >= this.frames.length - 1) {
        this.pause();
        return;
      }
      this.cursor += 1;
      this.showFrame();
    }, 40);
  }

  pause(): void {
    if (this.playing !== null) {
      window.clearInterval(this.playing);
      this.playing = null;
    }
  }

  showFrame(): void {
    const frame = this.frames[this.cursor] ?? null;
    renderBars($("bars"), frame);
    renderConsoleLines($("console-lines"), frame ? frame.displays : []);
    ($("scrub") as HTMLInputElement).value = String(this.cursor);
    $("frame-info").textContent = frame
      ? `seq ${frame.seq} · ${frame.kind}` +
        (frame.step ? ` @ step ${frame.step}` : "")
      : "";
    this.redrawCanvas(frame ? frame.step : null);
  }

  note(text: string): void {
    renderDiagnostics($("diagnostics"), this.findings, text || undefined);
  }

  redrawCanvas(active: string | null): void {
    renderCanvas(
      $("canvas") as unknown as SVGSVGElement,
      layoutEntry(this.engine.doc),
      this.selected,
      active,
      (id) => this.onSelect(id),
      (id) => this.onForm(id),
    );
  }

  redraw(): void {
    this.redrawCanvas(null);
    renderDiagnostics($("diagnostics"), this.findings);
  }
}

const app = new EditorApp();
app.boot();
