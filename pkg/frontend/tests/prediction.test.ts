import { afterAll, afterEach, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { MoodQueue } from "../src/queue.js";
import { encodeMoodState, FIXTURE_TOKEN, FixtureServer } from "./fixture.js";

/** Test-side inverse of the state coding, used to build fixtures. */
function decodeMoodState(code: number): { pleasance: number; activation: number } {
  const pleasance = 2 - ((code - 1) % 3);
  const activation = 2 - Math.floor((code - 1) / 3);
  return { pleasance, activation };
}

describe("prediction panel contract", () => {
  const fixture = new FixtureServer();
  let baseUrl = "";
  let app: App;

  beforeAll(async () => {
    baseUrl = await fixture.start();
  });

  afterAll(async () => {
    await fixture.stop();
  });

  afterEach(() => {
    app?.stop();
    document.body.textContent = "";
    window.localStorage.clear();
  });

  async function mountAndRefresh(): Promise<HTMLElement> {
    const container = document.createElement("div");
    document.body.appendChild(container);
    const api = new ApiClient({ baseUrl, token: FIXTURE_TOKEN });
    app = new App(container, api, new MoodQueue(window.localStorage), {
      pollMs: 3_600_000,
    });
    await app.refresh();
    return container;
  }

  it("highlights exactly the cell matching the API's state code, for all 9 codes", async () => {
    for (let code = 1; code <= 9; code += 1) {
      const { pleasance, activation } = decodeMoodState(code);
      expect(encodeMoodState(pleasance, activation)).toBe(code);
      fixture.set("/api/mood/predicted", {
        pleasance,
        activation,
        mood_state: code,
        scope: "individual",
        as_of: "2017-05-03 12:00:00+00:00",
        distribution: { [String(code)]: 1.0 },
      });

      const root = await mountAndRefresh();
      const highlighted = root.querySelectorAll<HTMLElement>(
        ".prediction-panel .mood-cell.predicted"
      );
      expect(highlighted).toHaveLength(1);
      expect(Number(highlighted[0]!.dataset.pleasance)).toBe(pleasance);
      expect(Number(highlighted[0]!.dataset.activation)).toBe(activation);

      const caption = root.querySelector(".prediction-caption");
      expect(caption?.textContent).toContain(`state ${code}`);

      app.stop();
      document.body.textContent = "";
    }
  });

  it("labels the scope badge for individual vs general models", async () => {
    fixture.set("/api/mood/predicted", {
      pleasance: 2,
      activation: 2,
      mood_state: 1,
      scope: "general",
      as_of: "2017-05-03 12:00:00+00:00",
      distribution: { "1": 1.0 },
    });
    const root = await mountAndRefresh();
    const badge = root.querySelector<HTMLElement>(".scope-badge");
    expect(badge?.dataset.scope).toBe("general");
    expect(badge?.textContent).toContain("general");
  });

  it("renders the wear-your-watch empty state on a features 409", async () => {
    fixture.set(
      "/api/mood/predicted",
      {
        code: "no_current_features",
        message: "cannot build features right now (no sensor samples in window)",
        field_errors: [],
      },
      409
    );
    const root = await mountAndRefresh();
    const empty = root.querySelector<HTMLElement>(".prediction-panel .empty-state");
    expect(empty?.hidden).toBe(false);
    expect(empty?.textContent?.toLowerCase()).toContain("wear your watch");
    expect(
      root.querySelectorAll(".prediction-panel .mood-cell.predicted")
    ).toHaveLength(0);
  });

  it("renders the no-model empty state on a model 409", async () => {
    fixture.set(
      "/api/mood/predicted",
      {
        code: "no_model",
        message: "no trained model yet; run admin retrain",
        field_errors: [],
      },
      409
    );
    const root = await mountAndRefresh();
    const empty = root.querySelector<HTMLElement>(".prediction-panel .empty-state");
    expect(empty?.hidden).toBe(false);
    expect(empty?.textContent).toContain("no trained model yet");
  });

  it("disagree focuses the entry grid on the predicted cell and a tap posts", async () => {
    fixture.set("/api/mood/predicted", {
      pleasance: 0,
      activation: 2,
      mood_state: 3,
      scope: "individual",
      as_of: "2017-05-03 12:00:00+00:00",
      distribution: { "3": 1.0 },
    });
    const root = await mountAndRefresh();
    fixture.moods.length = 0;

    root.querySelector<HTMLButtonElement>(".disagree")!.click();
    const focused = document.activeElement as HTMLElement | null;
    expect(focused?.dataset.pleasance).toBe("0");
    expect(focused?.dataset.activation).toBe("2");
    // the user actually felt differently: one tap on the true cell
    root
      .querySelector<HTMLButtonElement>(
        '.entry-panel .mood-cell[data-pleasance="2"][data-activation="0"]'
      )!
      .click();
    await new Promise((resolve) => setTimeout(resolve, 50));

    expect(fixture.moods).toHaveLength(1);
    expect(fixture.moods[0]!.pleasance).toBe(2);
    expect(fixture.moods[0]!.activation).toBe(0);
    expect(fixture.moods[0]!.source).toBe("manual");
  });
});
