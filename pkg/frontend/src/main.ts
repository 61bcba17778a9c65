// Session controller: wires the API client, the event-fold coloring, and the
// DOM views together. One browser tab drives one session.

import { ApiClient } from "./client.js";
import { applyEvents, emptyColors, replayColors, sameColoring } from "./state.js";
import type { ColorMap } from "./state.js";
import { renderBanner, renderPrompt, renderTree, setColors } from "./view.js";
import type { Answer, Prompt, TraceEvent } from "./types.js";

export class SessionApp {
  private rows = new Map<string, HTMLElement>();
  private colors: ColorMap = emptyColors();
  private eventLog: TraceEvent[] = [];
  private sessionId = "";
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    private readonly els: {
      tree: HTMLElement;
      prompt: HTMLElement;
      banner: HTMLElement;
      title: HTMLElement;
    },
  ) {}

  async start(): Promise<void> {
    const info = await this.api.tree();
    this.els.title.textContent = info.name;
    this.rows = renderTree(this.els.tree, info.tree);

    const created = await this.api.createSession();
    this.sessionId = created.session_id;
    // the server advanced to the first prompt while creating; collect the
    // events it produced along the way
    const state = await this.api.session(this.sessionId);
    this.absorb(state.events, state.prompt, state.final_status);
  }

  private absorb(events: TraceEvent[], prompt?: Prompt, finalStatus?: string): void {
    this.eventLog.push(...events);
    applyEvents(this.colors, events);
    setColors(this.rows, this.colors);
    renderBanner(this.els.banner, finalStatus);
    renderPrompt(this.els.prompt, prompt, (answer) => {
      this.inflight = this.answer(answer);
    });
  }

  /** Resolves once the last dispatched answer has been absorbed. */
  settle(): Promise<void> {
    return this.inflight;
  }

  private async answer(answer: Answer): Promise<void> {
    const update = await this.api.step(this.sessionId, answer);
    this.absorb(update.events, update.prompt, update.final_status);
  }

  /** Recolor purely from the recorded log; must match the live coloring. */
  replayMatchesLive(): boolean {
    return sameColoring(replayColors(this.eventLog), this.colors);
  }

  get log(): readonly TraceEvent[] {
    return this.eventLog;
  }

  get coloring(): ColorMap {
    return this.colors;
  }
}

export function mount(root: Document = document): SessionApp {
  const app = new SessionApp(new ApiClient(""), {
    tree: root.getElementById("tree")!,
    prompt: root.getElementById("prompt")!,
    banner: root.getElementById("banner")!,
    title: root.getElementById("tree-name")!,
  });
  void app.start();
  return app;
}

declare global {
  interface Window {
    btkitApp?: SessionApp;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" && !("vitest" in globalThis)) {
  window.addEventListener("DOMContentLoaded", () => {
    window.btkitApp = mount();
  });
}
