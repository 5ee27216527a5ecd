// Prompt banner driven by GET /api/schedule/today: when a prompt is
// due, show a banner whose button opens the mood grid in "prompted"
// mode. Also renders the day's prompt times with answered ticks.

import type { ScheduleToday } from "../types.js";

export interface ScheduleHandlers {
  onAnswerPrompt: () => void;
}

export interface ScheduleView {
  root: HTMLElement;
  update(payload: ScheduleToday): void;
}

function localTime(iso: string): string {
  const parsed = new Date(iso);
  if (Number.isNaN(parsed.getTime())) {
    return iso;
  }
  return parsed.toLocaleTimeString([], { hour: "2-digit", minute: "2-digit" });
}

export function renderSchedule(
  container: HTMLElement,
  handlers: ScheduleHandlers
): ScheduleView {
  const root = document.createElement("section");
  root.className = "schedule-panel";

  const banner = document.createElement("div");
  banner.className = "prompt-banner";
  banner.hidden = true;
  const bannerText = document.createElement("span");
  bannerText.textContent = "Mood check-in due.";
  const answer = document.createElement("button");
  answer.type = "button";
  answer.textContent = "Answer now";
  answer.addEventListener("click", handlers.onAnswerPrompt);
  banner.appendChild(bannerText);
  banner.appendChild(answer);
  root.appendChild(banner);

  const heading = document.createElement("h2");
  heading.textContent = "Today's check-ins";
  root.appendChild(heading);

  const list = document.createElement("ul");
  list.className = "prompt-list";
  root.appendChild(list);

  container.appendChild(root);

  return {
    root,
    update(payload) {
      banner.hidden = payload.due === null;
      list.textContent = "";
      for (const prompt of payload.prompts) {
        const item = document.createElement("li");
        item.dataset.promptId = prompt.id;
        item.dataset.answered = String(prompt.answered);
        const when = localTime(prompt.fire_at);
        item.textContent = prompt.answered ? `${when} answered` : when;
        if (prompt.id === payload.due) {
          item.classList.add("due");
        }
        list.appendChild(item);
      }
    },
  };
}
