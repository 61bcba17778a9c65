// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import { renderPrompt, renderTree, setColors, renderBanner } from "../src/view.js";
import { replayColors } from "../src/state.js";
import type { TreeNode } from "../src/types.js";

const leaf = (id: string, kind: TreeNode["kind"], label = id): TreeNode =>
  ({ id, kind, label, params: {}, children: [] });

const BLOOD_DRAW_LIKE: TreeNode = {
  id: "root", kind: "root", label: "", params: {}, children: [{
    id: "main", kind: "sequence", label: "", params: {}, children: [
      {
        id: "prep", kind: "sequence", label: "", params: {}, children: [
          leaf("secure_equipment", "action", "Secure equipment"),
          leaf("patient_ready", "condition", "Patient ready"),
        ],
      },
      {
        id: "veins", kind: "selector", label: "", params: {}, children: [
          leaf("left_arm", "condition", "Left arm vein suitable"),
          leaf("right_arm", "condition", "Right arm vein suitable"),
        ],
      },
    ],
  }],
};

describe("tree rendering", () => {
  it("shows every node, with query leaves tinted and glyphs per kind", () => {
    const container = document.createElement("div");
    const rows = renderTree(container, BLOOD_DRAW_LIKE);
    expect(rows.size).toBe(8);
    expect(container.querySelectorAll(".node").length).toBe(8);

    const selectorRow = rows.get("veins")!;
    expect(selectorRow.querySelector(".glyph")!.textContent).toBe("?");
    const conditions = container.querySelectorAll(".kind-condition");
    expect(conditions.length).toBe(3);
    // all idle at the start of a session
    for (const row of rows.values()) expect(row.dataset.status).toBe("idle");
  });

  it("orders a parallel's children with the leftmost branch first", () => {
    const tree: TreeNode = {
      id: "root", kind: "root", label: "", params: {}, children: [{
        id: "par", kind: "parallel", label: "", params: { m: 2, n: 1 }, children: [
          { id: "monitor", kind: "repeat", label: "", params: { until: "spo2 > 93" }, children: [leaf("sample", "condition")] },
          { id: "mainline", kind: "sequence", label: "", params: {}, children: [leaf("work", "action")] },
        ],
      }],
    };
    const container = document.createElement("div");
    renderTree(container, tree);
    const ids = Array.from(container.querySelectorAll(".node"))
      .map((el) => (el as HTMLElement).dataset.node);
    expect(ids.indexOf("monitor")).toBeLessThan(ids.indexOf("mainline"));
    const parGlyph = container.querySelector('[data-node="par"] .glyph')!;
    expect(parGlyph.textContent).toBe("⇉");
  });

  it("colors rows from events and badges halted nodes", () => {
    const container = document.createElement("div");
    const rows = renderTree(container, BLOOD_DRAW_LIKE);
    const colors = replayColors([
      { tick: 0, node: "secure_equipment", phase: "enter" },
      { tick: 0, node: "secure_equipment", phase: "exit", status: "success" },
      { tick: 0, node: "patient_ready", phase: "enter" },
      { tick: 0, node: "left_arm", phase: "halted" },
    ]);
    setColors(rows, colors);
    expect(rows.get("secure_equipment")!.dataset.status).toBe("success");
    expect(rows.get("patient_ready")!.dataset.status).toBe("running");
    expect(rows.get("left_arm")!.dataset.status).toBe("halted");
    expect(rows.get("left_arm")!.querySelector(".badge")!.textContent).toBe("halted");
    expect(rows.get("right_arm")!.dataset.status).toBe("idle");
  });
});

describe("prompt panel", () => {
  it("renders one button per select option", () => {
    const panel = document.createElement("div");
    renderPrompt(panel, {
      leaf: "choose_plan", kind: "select", label: "Choose plan",
      options: ["a", "b", "c", "d"],
    }, () => {});
    const buttons = panel.querySelectorAll("button");
    expect(buttons.length).toBe(4);
    expect(Array.from(buttons).map((b) => b.textContent)).toEqual(["a", "b", "c", "d"]);
  });

  it("renders success/failure buttons for condition prompts", () => {
    const panel = document.createElement("div");
    const seen: unknown[] = [];
    renderPrompt(panel, { leaf: "c", kind: "condition", label: "ready?" },
                 (a) => seen.push(a));
    const [ok, nope] = Array.from(panel.querySelectorAll("button"));
    expect(ok.textContent).toBe("Success");
    nope.click();
    expect(seen).toEqual([{ leaf: "c", status: "failure" }]);
  });

  it("dispatches exactly one answer even when double-clicked", () => {
    const panel = document.createElement("div");
    const onAnswer = vi.fn();
    renderPrompt(panel, {
      leaf: "choose_plan", kind: "select", label: "Choose plan",
      options: ["a", "b"],
    }, onAnswer);
    const button = panel.querySelector("button")!;
    button.click();
    button.click();
    (panel.querySelectorAll("button")[1] as HTMLButtonElement).click();
    expect(onAnswer).toHaveBeenCalledTimes(1);
    expect(onAnswer).toHaveBeenCalledWith({ leaf: "choose_plan", option: 0 });
    for (const b of panel.querySelectorAll("button")) {
      expect((b as HTMLButtonElement).disabled).toBe(true);
    }
  });

  it("clears when there is no prompt and shows the banner at the end", () => {
    const panel = document.createElement("div");
    renderPrompt(panel, { leaf: "c", kind: "action", label: "x" }, () => {});
    renderPrompt(panel, undefined, () => {});
    expect(panel.textContent).toBe("");

    const banner = document.createElement("div");
    renderBanner(banner, "success");
    expect(banner.textContent).toContain("success");
    expect(banner.dataset.status).toBe("success");
  });
});
