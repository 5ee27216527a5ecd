// Prediction panel: shows the model's current guess on its own small
// grid, with a scope badge and a "disagree" button that opens the entry
// grid pre-focused on the predicted cell so one tap fixes it.

import { stateWord } from "../mood.js";
import type { PredictedMood } from "../types.js";
import { renderMoodGrid, type MoodGridView } from "./moodGrid.js";

export type PredictionEmpty =
  | { kind: "no_features"; message: string }
  | { kind: "no_model"; message: string };

export interface PredictionHandlers {
  onDisagree: (prediction: PredictedMood) => void;
}

export interface PredictionView {
  root: HTMLElement;
  update(state: PredictedMood | PredictionEmpty): void;
}

function isEmpty(value: PredictedMood | PredictionEmpty): value is PredictionEmpty {
  return "kind" in value && (value.kind === "no_features" || value.kind === "no_model");
}

export function renderPredictionPanel(
  container: HTMLElement,
  handlers: PredictionHandlers
): PredictionView {
  const root = document.createElement("section");
  root.className = "prediction-panel";

  const heading = document.createElement("h2");
  heading.textContent = "Predicted mood";
  root.appendChild(heading);

  const badge = document.createElement("span");
  badge.className = "scope-badge";
  root.appendChild(badge);

  const gridHost = document.createElement("div");
  root.appendChild(gridHost);
  const grid: MoodGridView = renderMoodGrid(gridHost, { onPick: () => {} });
  grid.root.classList.add("readonly");

  const caption = document.createElement("p");
  caption.className = "prediction-caption";
  root.appendChild(caption);

  const emptyState = document.createElement("p");
  emptyState.className = "empty-state";
  root.appendChild(emptyState);

  const disagree = document.createElement("button");
  disagree.type = "button";
  disagree.className = "disagree";
  disagree.textContent = "That's not how I feel";
  root.appendChild(disagree);

  let current: PredictedMood | null = null;
  disagree.addEventListener("click", () => {
    if (current) {
      handlers.onDisagree(current);
    }
  });

  container.appendChild(root);

  return {
    root,
    update(state) {
      if (isEmpty(state)) {
        current = null;
        grid.clearHighlight();
        gridHost.hidden = true;
        caption.hidden = true;
        disagree.hidden = true;
        emptyState.hidden = false;
        emptyState.textContent =
          state.kind === "no_features"
            ? "No recent sensor data. Wear your watch for a bit and check back."
            : state.message;
        badge.textContent = "";
        return;
      }
      current = state;
      gridHost.hidden = false;
      caption.hidden = false;
      disagree.hidden = false;
      emptyState.hidden = true;
      grid.highlight(state.pleasance, state.activation);
      badge.textContent = state.scope === "individual" ? "your model" : "general model";
      badge.dataset.scope = state.scope;
      caption.textContent = `Feeling ${stateWord(state.mood_state)}? (state ${state.mood_state}, as of ${state.as_of})`;
    },
  };
}
