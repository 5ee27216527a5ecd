// The 3x3 mood entry grid: tap a cell, the exact (pleasance,
// activation) pair of that cell is handed to the submit callback.
// Nothing else is derived here.

import { gridCells } from "../mood.js";
import type { Activation, Pleasance } from "../types.js";

export interface MoodGridHandlers {
  onPick: (pleasance: Pleasance, activation: Activation) => void;
}

export interface MoodGridView {
  root: HTMLElement;
  /** Visually mark one cell (used by the prediction panel). */
  highlight(pleasance: Pleasance, activation: Activation): void;
  clearHighlight(): void;
  /** Move keyboard focus onto a cell (used by the disagree flow). */
  focusCell(pleasance: Pleasance, activation: Activation): void;
}

function cellKey(p: number, a: number): string {
  return `${p},${a}`;
}

export function renderMoodGrid(
  container: HTMLElement,
  handlers: MoodGridHandlers
): MoodGridView {
  const root = document.createElement("div");
  root.className = "mood-grid";
  root.setAttribute("role", "grid");
  root.setAttribute("aria-label", "How do you feel?");

  const buttons = new Map<string, HTMLButtonElement>();
  for (const cell of gridCells()) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "mood-cell";
    button.dataset.pleasance = String(cell.pleasance);
    button.dataset.activation = String(cell.activation);
    button.textContent = cell.word;
    button.addEventListener("click", () => {
      handlers.onPick(cell.pleasance, cell.activation);
    });
    buttons.set(cellKey(cell.pleasance, cell.activation), button);
    root.appendChild(button);
  }
  container.appendChild(root);

  let highlighted: HTMLButtonElement | null = null;
  return {
    root,
    highlight(pleasance, activation) {
      if (highlighted) {
        highlighted.classList.remove("predicted");
      }
      highlighted = buttons.get(cellKey(pleasance, activation)) ?? null;
      if (highlighted) {
        highlighted.classList.add("predicted");
      }
    },
    clearHighlight() {
      if (highlighted) {
        highlighted.classList.remove("predicted");
        highlighted = null;
      }
    },
    focusCell(pleasance, activation) {
      buttons.get(cellKey(pleasance, activation))?.focus();
    },
  };
}
