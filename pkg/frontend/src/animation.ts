// Trace-driven animation: a pure fold from the wire event stream to
// render frames. Replaying the same events always produces the same
// frames; the player just scrubs an index over them. Execution truth
// stays server-side, the client never re-runs the program.

export interface WireEvent {
  seq: number;
  module: string;
  step: string | null;
  kind: string;
  data: Record<string, unknown>;
  snapshot?: Record<string, string>;
}

export type Value = number | boolean | string | Value[];

/** Parse a canonical literal (integer, real, TRUE/FALSE, string, and
 * bracketed collections, which all render as arrays here). */
export function parseLiteral(text: string): Value {
  let pos = 0;

  function ws() {
    while (pos < text.length && " \t\r\n".includes(text[pos])) pos += 1;
  }

  function value(): Value {
    ws();
    const ch = text[pos];
    if (ch === "[" || ch === "{" || ch === "<") {
      const close = ch === "[" ? "]" : ch === "{" ? "}" : ">";
      pos += 1;
      const items: Value[] = [];
      ws();
      if (text[pos] === close) {
        pos += 1;
        return items;
      }
      for (;;) {
        items.push(value());
        ws();
        if (text[pos] === ",") {
          pos += 1;
          continue;
        }
        if (text[pos] === close) {
          pos += 1;
          return items;
        }
        throw new Error(`bad literal at ${pos}: ${text}`);
      }
    }
    if (ch === '"') {
      pos += 1;
      let out = "";
      while (pos < text.length) {
        const c = text[pos];
        if (c === '"') {
          pos += 1;
          return out;
        }
        if (c === "\\") {
          const n = text[pos + 1];
          const map: Record<string, string> = {
            n: "\n", t: "\t", r: "\r", '"': '"', "\\": "\\",
          };
          if (n === "u") {
            out += String.fromCharCode(
              parseInt(text.slice(pos + 2, pos + 6), 16));
            pos += 6;
            continue;
          }
          out += map[n] ?? n;
          pos += 2;
          continue;
        }
        out += c;
        pos += 1;
      }
      throw new Error("unterminated string");
    }
    if (text.startsWith("TRUE", pos)) {
      pos += 4;
      return true;
    }
    if (text.startsWith("FALSE", pos)) {
      pos += 5;
      return false;
    }
    const m = /^[+-]?\d+(\.\d+)?([eE][+-]?\d+)?/.exec(text.slice(pos));
    if (!m) throw new Error(`bad literal at ${pos}: ${text}`);
    pos += m[0].length;
    return Number(m[0]);
  }

  const v = value();
  ws();
  if (pos !== text.length) throw new Error(`trailing text: ${text}`);
  return v;
}

export interface Frame {
  seq: number;
  step: string | null;
  kind: string;
  bars: number[];
  comparing: [number, number] | null; // 0-based positions, best effort
  swapped: [number, number] | null;   // 0-based positions from the event
  vars: Record<string, string>;
  displays: string[];
}

function asNumbers(v: Value): number[] {
  if (!Array.isArray(v)) return [];
  return v.map((e) => (typeof e === "number" ? e : 0));
}

/**
 * Fold the event stream into one frame per event, watching one
 * list-valued variable for the bar chart.
 */
export function buildFrames(events: WireEvent[], watchVar: string): Frame[] {
  const frames: Frame[] = [];
  let bars: number[] = [];
  const vars: Record<string, string> = {};
  const displays: string[] = [];
  const watch = watchVar.toLowerCase();

  for (const ev of events) {
    let comparing: [number, number] | null = null;
    let swapped: [number, number] | null = null;

    if (ev.kind === "enter" && ev.snapshot) {
      for (const [k, v] of Object.entries(ev.snapshot)) {
        vars[k] = v;
        if (k === watch) bars = asNumbers(parseLiteral(v));
      }
    } else if (ev.kind === "assign" || ev.kind === "transform") {
      const name = ev.data["var"] as string;
      const text = ev.data["new"] as string;
      vars[name] = text;
      if (name === watch) bars = asNumbers(parseLiteral(text));
    } else if (ev.kind === "read" || ev.kind === "loop-iter") {
      const name = ev.data["var"] as string | undefined;
      if (name !== undefined) {
        const text = ev.data["value"] as string;
        vars[name] = text;
        if (name === watch) bars = asNumbers(parseLiteral(text));
      }
    } else if (ev.kind === "display") {
      displays.push(ev.data["value"] as string);
    } else if (ev.kind === "compare") {
      comparing = findPair(bars, ev.data["lhs"] as string,
                           ev.data["rhs"] as string);
    } else if (ev.kind === "swap") {
      if (ev.data["container"] === watch) {
        swapped = [(ev.data["i"] as number) - 1,
                   (ev.data["j"] as number) - 1];
      }
    }

    frames.push({
      seq: ev.seq,
      step: ev.step,
      kind: ev.kind,
      bars: bars.slice(),
      comparing,
      swapped,
      vars: { ...vars },
      displays: displays.slice(),
    });
  }
  return frames;
}

function findPair(bars: number[], lhsText: string,
                  rhsText: string): [number, number] | null {
  let lhs: Value, rhs: Value;
  try {
    lhs = parseLiteral(lhsText);
    rhs = parseLiteral(rhsText);
  } catch {
    return null;
  }
  if (typeof lhs !== "number" || typeof rhs !== "number") return null;
  const i = bars.indexOf(lhs);
  if (i < 0) return null;
  let j = bars.indexOf(rhs, i + 1);
  if (j < 0) j = bars.indexOf(rhs);
  if (j < 0) return null;
  return [i, j];
}

/**
 * Bar heights in pixels, proportional to absolute values. The tallest
 * bar gets maxHeight; zero values keep a visible sliver.
 */
export function barHeights(values: number[], maxHeight: number): number[] {
  const maxAbs = values.reduce((m, v) => Math.max(m, Math.abs(v)), 0);
  if (maxAbs === 0) return values.map(() => 2);
  return values.map((v) =>
    Math.max(2, Math.round((Math.abs(v) / maxAbs) * maxHeight)));
}
