// Friends list: one row per friend the server chose to show us. The
// server already applied the privacy rules, so this renders exactly
// what came back and nothing else - no placeholders for hidden people.

import { stateWord } from "../mood.js";
import type { FriendsMoods } from "../types.js";

export interface FriendsView {
  root: HTMLElement;
  update(payload: FriendsMoods): void;
}

export function renderFriends(container: HTMLElement): FriendsView {
  const root = document.createElement("section");
  root.className = "friends-panel";
  const heading = document.createElement("h2");
  heading.textContent = "Friends";
  root.appendChild(heading);

  const list = document.createElement("ul");
  list.className = "friends-list";
  root.appendChild(list);

  const empty = document.createElement("p");
  empty.className = "empty-state";
  empty.textContent = "No friends sharing with you yet.";
  root.appendChild(empty);

  container.appendChild(root);

  return {
    root,
    update(payload) {
      list.textContent = "";
      empty.hidden = payload.friends.length > 0;
      for (const entry of payload.friends) {
        const item = document.createElement("li");
        item.className = "friend-row";
        item.dataset.user = entry.user;

        const name = document.createElement("span");
        name.className = "friend-name";
        name.textContent = entry.user;
        item.appendChild(name);

        const mood = document.createElement("span");
        mood.className = "friend-mood";
        if (entry.mood === null) {
          mood.textContent = "no data yet";
          mood.classList.add("missing");
        } else {
          mood.textContent = stateWord(entry.mood.mood_state);
          mood.dataset.kind = entry.mood.kind;
          if (entry.mood.kind === "predicted") {
            const hint = document.createElement("em");
            hint.textContent = " (predicted)";
            mood.appendChild(hint);
          }
        }
        item.appendChild(mood);
        list.appendChild(item);
      }
    },
  };
}
