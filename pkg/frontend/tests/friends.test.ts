import { afterEach, describe, expect, it } from "vitest";

import { renderFriends } from "../src/views/friends.js";
import type { FriendsMoods } from "../src/types.js";

describe("friends view", () => {
  afterEach(() => {
    document.body.textContent = "";
  });

  it("renders exactly the friends the server returned, nothing more", () => {
    const view = renderFriends(document.body);
    const payload: FriendsMoods = {
      friends: [
        {
          user: "bob",
          mood: {
            kind: "input",
            pleasance: 0,
            activation: 1,
            mood_state: 6,
            timestamp_utc: "2017-05-03 11:40:00+00:00",
          },
        },
        { user: "carol", mood: null },
      ],
    };
    view.update(payload);

    const rows = [...document.querySelectorAll(".friend-row")] as HTMLElement[];
    expect(rows.map((r) => r.dataset.user)).toEqual(["bob", "carol"]);
    // no placeholder rows for anyone the server chose not to include
    expect(document.querySelectorAll(".friend-row")).toHaveLength(2);
  });

  it("shows the mood word for an input and flags predictions", () => {
    const view = renderFriends(document.body);
    view.update({
      friends: [
        {
          user: "bob",
          mood: {
            kind: "predicted",
            pleasance: 2,
            activation: 2,
            mood_state: 1,
            timestamp_utc: "2017-05-03 12:00:00+00:00",
          },
        },
      ],
    });
    const mood = document.querySelector<HTMLElement>(".friend-mood");
    expect(mood?.textContent).toContain("happy");
    expect(mood?.textContent).toContain("predicted");
    expect(mood?.dataset.kind).toBe("predicted");
  });

  it("renders a friend without data as such", () => {
    const view = renderFriends(document.body);
    view.update({ friends: [{ user: "dave", mood: null }] });
    const mood = document.querySelector<HTMLElement>(".friend-mood");
    expect(mood?.textContent).toBe("no data yet");
  });

  it("shows the empty state only when the list is empty", () => {
    const view = renderFriends(document.body);
    view.update({ friends: [] });
    const empty = document.querySelector<HTMLElement>(".friends-panel .empty-state");
    expect(empty?.hidden).toBe(false);

    view.update({ friends: [{ user: "bob", mood: null }] });
    expect(empty?.hidden).toBe(true);
  });
});
