// Assembles the dashboard: mood entry grid, prediction panel, prompt
// banner, friends, stats, and insights, all fed from one poll loop.
// The app owns no business rules; it moves payloads between the API
// client and the views and routes taps back to POST /api/mood.

import { ApiClient, ApiError } from "./api.js";
import { stateWord } from "./mood.js";
import { MoodQueue } from "./queue.js";
import type { Activation, MoodSource, Pleasance, PredictedMood } from "./types.js";
import { renderFriends, type FriendsView } from "./views/friends.js";
import { renderInsights, type InsightsView } from "./views/insights.js";
import { renderMoodGrid, type MoodGridView } from "./views/moodGrid.js";
import {
  renderPredictionPanel,
  type PredictionView,
} from "./views/prediction.js";
import { renderSchedule, type ScheduleView } from "./views/schedule.js";
import { renderStats, type StatsView } from "./views/stats.js";

const POLL_MS = 60_000;

export interface AppOptions {
  pollMs?: number;
}

export class App {
  private readonly grid: MoodGridView;
  private readonly prediction: PredictionView;
  private readonly schedule: ScheduleView;
  private readonly friends: FriendsView;
  private readonly stats: StatsView;
  private readonly insights: InsightsView;
  private readonly confirmation: HTMLElement;
  private readonly pollMs: number;
  private source: MoodSource = "manual";
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    container: HTMLElement,
    private readonly api: ApiClient,
    private readonly queue: MoodQueue,
    options: AppOptions = {}
  ) {
    this.pollMs = options.pollMs ?? POLL_MS;

    this.schedule = renderSchedule(container, {
      onAnswerPrompt: () => this.beginPromptedEntry(),
    });

    const entry = document.createElement("section");
    entry.className = "entry-panel";
    const entryHeading = document.createElement("h2");
    entryHeading.textContent = "How do you feel?";
    entry.appendChild(entryHeading);
    container.appendChild(entry);

    this.grid = renderMoodGrid(entry, {
      onPick: (p, a) => {
        void this.submitMood(p, a);
      },
    });

    this.confirmation = document.createElement("p");
    this.confirmation.className = "confirmation";
    this.confirmation.setAttribute("role", "status");
    entry.appendChild(this.confirmation);

    this.prediction = renderPredictionPanel(container, {
      onDisagree: (predicted) => this.beginCorrection(predicted),
    });
    this.friends = renderFriends(container);
    this.stats = renderStats(container);
    this.insights = renderInsights(container);
  }

  /** One tap on the grid: deliver or queue, then tell the user which. */
  async submitMood(pleasance: Pleasance, activation: Activation): Promise<void> {
    const source = this.source;
    this.source = "manual";
    let result;
    try {
      result = await this.queue.submit(this.api, { pleasance, activation, source });
    } catch (err) {
      if (err instanceof ApiError) {
        const details = err.fieldErrors
          .map((fe) => `${fe.field}: ${fe.error}`)
          .join("; ");
        this.confirmation.textContent = details || err.message;
        this.confirmation.dataset.tone = "error";
        return;
      }
      throw err;
    }
    if (result.outcome === "queued") {
      this.confirmation.textContent = "Offline; saved and will send later.";
      this.confirmation.dataset.tone = "queued";
      return;
    }
    const word = stateWord(result.ack.mood_state);
    this.confirmation.textContent = result.ack.answered_prompt
      ? `Recorded: ${word}. Check-in answered.`
      : `Recorded: ${word}.`;
    this.confirmation.dataset.tone = "ok";
    await this.refresh();
  }

  beginPromptedEntry(): void {
    this.source = "prompted";
    this.grid.focusCell(1, 1);
  }

  beginCorrection(predicted: PredictedMood): void {
    this.source = "manual";
    this.grid.focusCell(predicted.pleasance, predicted.activation);
  }

  async refresh(): Promise<void> {
    await Promise.all([
      this.refreshPrediction(),
      this.refreshSection(() => this.api.scheduleToday(), (p) => this.schedule.update(p)),
      this.refreshSection(() => this.api.friendsMoods(), (p) => this.friends.update(p)),
      this.refreshSection(
        () => this.api.statsDescriptive(),
        (p) => this.stats.updateDescriptive(p)
      ),
      this.refreshSection(() => this.api.statsHourly(), (p) => this.stats.updateHourly(p)),
      this.refreshSection(() => this.api.insights(), (p) => this.insights.update(p)),
    ]);
  }

  private async refreshPrediction(): Promise<void> {
    try {
      this.prediction.update(await this.api.predictedMood());
    } catch (err) {
      if (err instanceof ApiError) {
        const kind = err.code === "no_current_features" ? "no_features" : "no_model";
        this.prediction.update({ kind, message: err.message });
      }
      // network errors: keep showing the last known state
    }
  }

  private async refreshSection<T>(
    fetchPayload: () => Promise<T>,
    apply: (payload: T) => void
  ): Promise<void> {
    try {
      apply(await fetchPayload());
    } catch {
      // Sections keep their previous content when a poll fails; the
      // next tick will repaint them.
    }
  }

  start(): void {
    void this.flushAndRefresh();
    this.timer = setInterval(() => void this.flushAndRefresh(), this.pollMs);
    window.addEventListener("online", () => void this.flushAndRefresh());
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private async flushAndRefresh(): Promise<void> {
    try {
      await this.queue.flush(this.api);
    } catch {
      // flush never throws for network errors, but stay defensive
    }
    await this.refresh();
  }
}

export function mountApp(
  container: HTMLElement,
  options: { baseUrl: string; token: string; pollMs?: number }
): App {
  const api = new ApiClient({ baseUrl: options.baseUrl, token: options.token });
  const queue = new MoodQueue(window.localStorage);
  const app = new App(container, api, queue, { pollMs: options.pollMs });
  app.start();
  return app;
}
