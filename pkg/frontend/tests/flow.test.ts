// @vitest-environment jsdom
//
// End-to-end: a scripted browser session against the real Python server
// serving the tumor-ablation tree. The script clicks through every prompt,
// answers the 4-option select, and verifies both the server-side blackboard
// and that replaying the event log reproduces the final coloring.

import { spawn, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/client.js";
import { SessionApp } from "../src/main.js";
import { replayColors, sameColoring } from "../src/state.js";

let server: ChildProcess;
let base = "";

function startServer(): Promise<string> {
  return new Promise((resolve, reject) => {
    const python = process.env.PYTHON ?? "python3";
    server = spawn(python, ["-m", "btkit", "serve", "tumor_ablation", "--port", "0"], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let out = "";
    const timer = setTimeout(() => reject(new Error(`server did not start:\n${out}`)), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const match = out.match(/on (http:\/\/[^\s,]+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    server.stderr!.on("data", (chunk: Buffer) => { out += chunk.toString(); });
    server.on("exit", (code) => reject(new Error(`server exited early (${code}):\n${out}`)));
  });
}

beforeAll(async () => {
  base = await startServer();
}, 20000);

afterAll(() => {
  server?.kill("SIGINT");
});

function dom() {
  document.body.innerHTML = `
    <span id="tree-name"></span><div id="banner"></div>
    <div id="tree"></div><div id="prompt"></div>`;
  return {
    tree: document.getElementById("tree")!,
    prompt: document.getElementById("prompt")!,
    banner: document.getElementById("banner")!,
    title: document.getElementById("tree-name")!,
  };
}

describe("scripted browser session on the ablation tree", () => {
  it("answers the 4-option select; chosen_plan matches the clicked option", async () => {
    const els = dom();
    const api = new ApiClient(base);
    const app = new SessionApp(api, els);
    await app.start();

    expect(els.title.textContent).toBe("tumor_ablation");
    expect(els.tree.querySelectorAll(".node").length).toBeGreaterThan(10);

    let clickedOption: string | null = null;
    for (let guard = 0; guard < 40 && !els.banner.textContent; guard++) {
      const buttons = Array.from(els.prompt.querySelectorAll("button")) as HTMLButtonElement[];
      expect(buttons.length).toBeGreaterThan(0);
      const isSelect = buttons.length === 4 && buttons[0].textContent !== "Success";
      if (isSelect) {
        expect(buttons.map((b) => b.textContent)).toEqual([
          "Concentric rings", "Raster sweep", "Ellipsoid fit", "Freeform contour",
        ]);
        clickedOption = buttons[2].textContent;
        buttons[2].click();           // the surgeon picks the third plan
        buttons[2].click();           // a double click must not double-send
      } else {
        buttons[0].click();           // report success for actions/conditions
      }
      await app.settle();
    }

    expect(els.banner.textContent).toContain("success");
    expect(clickedOption).toBe("Ellipsoid fit");

    const state = await api.session((app as unknown as { sessionId: string }).sessionId);
    expect(state.finished).toBe(true);
    expect(state.blackboard["chosen_plan"]).toBe(clickedOption);
  }, 20000);

  it("replaying the recorded event log reproduces the final coloring", async () => {
    const els = dom();
    const api = new ApiClient(base);
    const app = new SessionApp(api, els);
    await app.start();

    // drive to completion, failing the margins check so the recovery runs
    for (let guard = 0; guard < 40 && !els.banner.textContent; guard++) {
      const buttons = Array.from(els.prompt.querySelectorAll("button")) as HTMLButtonElement[];
      const isSelect = buttons.length === 4 && buttons[0].textContent !== "Success";
      if (isSelect) {
        buttons[0].click();
      } else {
        const title = els.prompt.querySelector(".prompt-title")!.textContent ?? "";
        const failHere = title.includes("Margins clear");
        buttons[failHere ? 1 : 0].click();
      }
      await app.settle();
    }

    expect(els.banner.textContent).toContain("success"); // recovery saved the run
    expect(app.replayMatchesLive()).toBe(true);
    const replayed = replayColors([...app.log]);
    expect(sameColoring(replayed, app.coloring)).toBe(true);
    // the fallback branch must show as executed in the final picture
    expect(app.coloring.get("re_scan_cavity")).toBe("success");
    const rows = els.tree.querySelectorAll('[data-status="success"]');
    expect(rows.length).toBeGreaterThan(5);
  }, 20000);
});
