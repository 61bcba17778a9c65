// DOM construction: a nested tree listing, a prompt panel, and a run banner.
// All functions are plain DOM manipulation; state lives in main.ts.

import type { NodeColor } from "./state.js";
import type { Prompt, TreeNode, Answer } from "./types.js";

export const KIND_GLYPHS: Record<string, string> = {
  root: "Φ",
  sequence: "→",
  selector: "?",
  parallel: "⇉",
  recovery: "R",
  retry: "↻",
  repeat: "⟳",
  invert: "¬",
  action: "▸",
  condition: "◆",
  select: "☰",
};

function glyphFor(node: TreeNode): string {
  if (node.kind === "retry") return `↻ retry(${node.params["attempts"]})`;
  if (node.kind === "repeat") {
    const until = node.params["until"];
    return until ? `⟳ repeat(until ${until})` : `⟳ repeat(${node.params["count"]})`;
  }
  return KIND_GLYPHS[node.kind] ?? node.kind;
}

export function renderTree(container: HTMLElement, root: TreeNode): Map<string, HTMLElement> {
  container.textContent = "";
  const rows = new Map<string, HTMLElement>();

  const walk = (node: TreeNode, depth: number) => {
    const row = document.createElement("div");
    row.className = `node kind-${node.kind}`;
    row.dataset.node = node.id;
    row.dataset.status = "idle";
    row.style.paddingLeft = `${depth * 1.25}rem`;

    const glyph = document.createElement("span");
    glyph.className = "glyph";
    glyph.textContent = glyphFor(node);
    row.appendChild(glyph);

    const label = document.createElement("span");
    label.className = "label";
    label.textContent = node.label || node.id;
    row.appendChild(label);

    const badge = document.createElement("span");
    badge.className = "badge";
    row.appendChild(badge);

    container.appendChild(row);
    rows.set(node.id, row);
    for (const child of node.children) walk(child, depth + 1);
  };

  walk(root, 0);
  return rows;
}

export function setColors(rows: Map<string, HTMLElement>, colors: Map<string, NodeColor>): void {
  for (const [id, row] of rows) {
    const color = colors.get(id) ?? "idle";
    row.dataset.status = color;
    const badge = row.querySelector(".badge") as HTMLElement;
    badge.textContent = color === "halted" ? "halted" : "";
  }
}

export function renderBanner(el: HTMLElement, status: string | undefined): void {
  if (!status) {
    el.textContent = "";
    el.dataset.status = "";
    return;
  }
  el.dataset.status = status;
  el.textContent = `run finished: ${status}`;
}

/**
 * Show a prompt as buttons. Exactly one answer is dispatched no matter how
 * often the user clicks: the first click disables the panel and later clicks
 * are ignored until the next prompt is rendered.
 */
export function renderPrompt(
  container: HTMLElement,
  prompt: Prompt | undefined,
  onAnswer: (answer: Answer) => void,
): void {
  container.textContent = "";
  delete container.dataset.busy;
  if (!prompt) return;

  const title = document.createElement("div");
  title.className = "prompt-title";
  title.textContent =
    prompt.kind === "select"
      ? `Choose an option for “${prompt.label}”`
      : `Report the outcome of “${prompt.label}” (${prompt.kind})`;
  container.appendChild(title);

  const buttons = document.createElement("div");
  buttons.className = "prompt-buttons";
  container.appendChild(buttons);

  const dispatch = (answer: Answer) => {
    if (container.dataset.busy) return;
    container.dataset.busy = "1";
    for (const b of Array.from(buttons.querySelectorAll("button"))) {
      (b as HTMLButtonElement).disabled = true;
    }
    onAnswer(answer);
  };

  const addButton = (text: string, answer: Answer, cssClass: string) => {
    const button = document.createElement("button");
    button.className = cssClass;
    button.textContent = text;
    button.addEventListener("click", () => dispatch(answer));
    buttons.appendChild(button);
  };

  if (prompt.kind === "select") {
    (prompt.options ?? []).forEach((option, index) => {
      addButton(option, { leaf: prompt.leaf, option: index }, "option");
    });
  } else {
    addButton("Success", { leaf: prompt.leaf, status: "success" }, "success");
    addButton("Failure", { leaf: prompt.leaf, status: "failure" }, "failure");
  }
}
