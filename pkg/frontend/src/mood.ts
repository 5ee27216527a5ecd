// Grid geometry and display words for the nine mood cells.
//
// The grid is laid out the way users see it: pleasance increases left
// to right, activation increases bottom to top, so the top-right cell
// is pleasant + energized and the bottom-left is unpleasant + calm.
// The words are cosmetic; every state code shown in the UI comes from
// the API, this module never derives codes from (p, a).

import type { Activation, MoodState, Pleasance } from "./types.js";

export interface GridCell {
  pleasance: Pleasance;
  activation: Activation;
  word: string;
}

/** Display word for an API-provided state code. */
export const STATE_WORDS: Readonly<Record<number, string>> = {
  1: "happy",
  2: "excited",
  3: "angry",
  4: "content",
  5: "neutral",
  6: "tense",
  7: "relaxed",
  8: "tired",
  9: "sad",
};

const WORD_BY_CELL: Readonly<Record<string, string>> = {
  "2,2": "happy",
  "1,2": "excited",
  "0,2": "angry",
  "2,1": "content",
  "1,1": "neutral",
  "0,1": "tense",
  "2,0": "relaxed",
  "1,0": "tired",
  "0,0": "sad",
};

const LEVELS: readonly (0 | 1 | 2)[] = [0, 1, 2];

/**
 * Cells in render order: rows top to bottom (activation 2 down to 0),
 * columns left to right (pleasance 0 up to 2).
 */
export function gridCells(): GridCell[] {
  const cells: GridCell[] = [];
  for (const activation of [...LEVELS].reverse()) {
    for (const pleasance of LEVELS) {
      const word = WORD_BY_CELL[`${pleasance},${activation}`];
      cells.push({ pleasance, activation, word: word ?? "" });
    }
  }
  return cells;
}

export function stateWord(code: MoodState): string {
  return STATE_WORDS[code] ?? `state ${code}`;
}
