// Offline queue for mood entries.
//
// When a POST fails at the network level the entry is parked in
// localStorage, stamped with the submission time, and replayed later in
// order. Replays keep the original timestamp, and the server treats
// (user, timestamp) resubmissions as last-write-wins, so flushing more
// than once is harmless: delivery is at-least-once, storage is
// exactly-once.

import { ApiError, type ApiClient } from "./api.js";
import type { MoodAck, MoodPost } from "./types.js";

const STORAGE_KEY = "happimeter.mood_queue";

export interface QueuedMood extends MoodPost {
  timestamp_utc: string;
}

export type SubmitResult =
  | { outcome: "sent"; ack: MoodAck }
  | { outcome: "queued"; entry: QueuedMood };

function load(storage: Storage): QueuedMood[] {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) {
    return [];
  }
  try {
    const parsed = JSON.parse(raw);
    return Array.isArray(parsed) ? (parsed as QueuedMood[]) : [];
  } catch {
    return [];
  }
}

function save(storage: Storage, entries: QueuedMood[]): void {
  if (entries.length === 0) {
    storage.removeItem(STORAGE_KEY);
  } else {
    storage.setItem(STORAGE_KEY, JSON.stringify(entries));
  }
}

export class MoodQueue {
  constructor(
    private readonly storage: Storage,
    private readonly now: () => Date = () => new Date()
  ) {}

  pending(): QueuedMood[] {
    return load(this.storage);
  }

  /**
   * Try to deliver a mood entry, queueing it when the server is
   * unreachable. Server-side rejections (ApiError) are the caller's
   * problem and are rethrown, not queued: an invalid entry stays
   * invalid on retry.
   */
  async submit(api: ApiClient, mood: MoodPost): Promise<SubmitResult> {
    const entry: QueuedMood = {
      ...mood,
      timestamp_utc: mood.timestamp_utc ?? this.now().toISOString(),
    };
    try {
      const ack = await api.postMood(entry);
      return { outcome: "sent", ack };
    } catch (err) {
      if (err instanceof ApiError) {
        throw err;
      }
      save(this.storage, [...load(this.storage), entry]);
      return { outcome: "queued", entry };
    }
  }

  /**
   * Replay queued entries in FIFO order. Stops at the first network
   * failure, keeping that entry and everything behind it. Entries the
   * server rejects outright are dropped; they will never succeed.
   * Returns the number delivered.
   */
  async flush(api: ApiClient): Promise<number> {
    let remaining = load(this.storage);
    let delivered = 0;
    while (remaining.length > 0) {
      const entry = remaining[0];
      if (entry === undefined) {
        break;
      }
      try {
        await api.postMood(entry);
        delivered += 1;
      } catch (err) {
        if (!(err instanceof ApiError)) {
          break;
        }
        // The server looked at it and said no; retrying cannot help.
      }
      remaining = remaining.slice(1);
    }
    save(this.storage, remaining);
    return delivered;
  }
}
