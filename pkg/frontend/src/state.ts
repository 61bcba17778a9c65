// Node coloring derived purely from server trace events. The UI computes no
// tick semantics: a color changes only because an event said so, and folding
// the full event log from scratch must land on the same picture.

import type { TraceEvent } from "./types.js";

export type NodeColor = "idle" | "running" | "success" | "failure" | "halted";

export type ColorMap = Map<string, NodeColor>;

export function emptyColors(): ColorMap {
  return new Map();
}

export function applyEvents(colors: ColorMap, events: TraceEvent[]): ColorMap {
  for (const event of events) {
    if (event.phase === "enter") {
      colors.set(event.node, "running");
    } else if (event.phase === "exit") {
      colors.set(event.node, (event.status ?? "running") as NodeColor);
    } else {
      colors.set(event.node, "halted");
    }
  }
  return colors;
}

export function replayColors(events: TraceEvent[]): ColorMap {
  return applyEvents(emptyColors(), events);
}

export function sameColoring(a: ColorMap, b: ColorMap): boolean {
  if (a.size !== b.size) return false;
  for (const [node, color] of a) {
    if (b.get(node) !== color) return false;
  }
  return true;
}
