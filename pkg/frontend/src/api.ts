// Client for the local patchlang service: documents, runs, the live
// event stream, preview, and code emission.

import { DocumentWire } from "./model.js";
import { WireEvent } from "./animation.js";

export interface ValidationFinding {
  module: string;
  step: string;
  rule: string;
  message: string;
}

export interface RunStatus {
  session: string;
  status: "running" | "finished" | "failed" | "stopped";
  events: number;
  outputs?: Record<string, string>;
  error?: string;
}

export class PatchApi {
  constructor(public base: string) {}

  async putDocument(id: string, doc: DocumentWire):
      Promise<ValidationFinding[]> {
    const resp = await fetch(`${this.base}/documents/${id}`, {
      method: "PUT",
      body: JSON.stringify(doc),
    });
    if (!resp.ok) throw new Error(`PUT failed: ${resp.status}`);
    const body = await resp.json();
    return body.report as ValidationFinding[];
  }

  async getDocument(id: string): Promise<DocumentWire> {
    const resp = await fetch(`${this.base}/documents/${id}`);
    if (!resp.ok) throw new Error(`document ${id}: ${resp.status}`);
    return (await resp.json()) as DocumentWire;
  }

  async startRun(id: string, inputs: Record<string, string>,
                 module?: string): Promise<string> {
    const resp = await fetch(`${this.base}/documents/${id}/runs`, {
      method: "POST",
      body: JSON.stringify({ inputs, module }),
    });
    if (!resp.ok) {
      const body = await resp.json().catch(() => ({ error: resp.status }));
      throw new Error(`run failed: ${body.error ?? resp.status}`);
    }
    return (await resp.json()).session as string;
  }

  async stopRun(session: string): Promise<void> {
    await fetch(`${this.base}/runs/${session}/stop`, { method: "POST" });
  }

  async runStatus(session: string): Promise<RunStatus> {
    const resp = await fetch(`${this.base}/runs/${session}`);
    return (await resp.json()) as RunStatus;
  }

  async preview(id: string, inputs: Record<string, string>,
                prefixStep: string): Promise<Record<string, string>> {
    const resp = await fetch(`${this.base}/documents/${id}/preview`, {
      method: "POST",
      body: JSON.stringify({ inputs, prefixStep }),
    });
    if (!resp.ok) throw new Error(`preview failed: ${resp.status}`);
    return (await resp.json()).variables as Record<string, string>;
  }

  async emit(id: string, dialect: string): Promise<string> {
    const resp = await fetch(`${this.base}/documents/${id}/emit`, {
      method: "POST",
      body: JSON.stringify({ dialect }),
    });
    if (!resp.ok) throw new Error(`emit failed: ${resp.status}`);
    return (await resp.json()).text as string;
  }

  /**
   * Subscribe to a run's server-sent events. onEvent fires per trace
   * event; resolves with the terminal status.
   */
  streamEvents(session: string,
               onEvent: (ev: WireEvent) => void): Promise<RunStatus> {
    return new Promise((resolve, reject) => {
      const source = new EventSource(
        `${this.base}/runs/${session}/events?from=1`);
      source.onmessage = (msg) => {
        onEvent(JSON.parse(msg.data) as WireEvent);
      };
      source.addEventListener("status", (msg) => {
        source.close();
        resolve(JSON.parse((msg as MessageEvent).data) as RunStatus);
      });
      source.onerror = () => {
        source.close();
        reject(new Error("event stream dropped"));
      };
    });
  }
}
