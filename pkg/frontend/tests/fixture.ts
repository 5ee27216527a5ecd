// In-process fixture server for contract tests.
//
// Speaks just enough of the happimeter HTTP API for the dashboard:
// bearer auth, the uniform error shape, POST /api/mood with recorded
// bodies, and canned GET payloads the tests can swap per scenario. The
// mood-state encoding lives here as the test-side oracle; the client
// under test must never compute it.

import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import type { AddressInfo } from "node:net";

export const FIXTURE_TOKEN = "fixture-token";
export const FIXTURE_USER = "alice";

/** Contract oracle: grid pair -> state code, mirroring the server. */
export function encodeMoodState(pleasance: number, activation: number): number {
  return 1 + (2 - pleasance) + 3 * (2 - activation);
}

export interface RecordedMood {
  pleasance: unknown;
  activation: unknown;
  source: unknown;
  timestamp_utc?: unknown;
}

interface CannedResponse {
  status: number;
  body: unknown;
}

type GetPath =
  | "/api/mood/predicted"
  | "/api/friends/moods"
  | "/api/insights"
  | "/api/stats/descriptive"
  | "/api/stats/hourly"
  | "/api/stats/correlations"
  | "/api/schedule/today";

const DEFAULT_GETS: Record<GetPath, unknown> = {
  "/api/mood/predicted": {
    pleasance: 1,
    activation: 1,
    mood_state: 5,
    scope: "general",
    as_of: "2017-05-03 12:00:00+00:00",
    distribution: { "5": 1.0 },
  },
  "/api/friends/moods": { friends: [] },
  "/api/insights": {
    importance: {
      scope: null,
      fallback: false,
      by_decrease: [],
      by_nodes: [],
      reason: "no trained model yet",
    },
    influencers: { items: [], reason: "no friends sharing mood data" },
  },
  "/api/stats/descriptive": { available: false, reason: "no joinable mood inputs yet" },
  "/api/stats/hourly": { hours: [] },
  "/api/stats/correlations": { available: false, reason: "no joinable mood inputs yet", cells: [] },
  "/api/schedule/today": { date: "2017-05-03", zone: "UTC", prompts: [], due: null },
};

function errorBody(code: string, message: string, fieldErrors: unknown[] = []) {
  return { code, message, field_errors: fieldErrors };
}

function isLevel(value: unknown): value is 0 | 1 | 2 {
  return value === 0 || value === 1 || value === 2;
}

export interface RecordedFriendAction {
  action: string;
  target: unknown;
  share?: unknown;
}

export class FixtureServer {
  readonly moods: RecordedMood[] = [];
  readonly friendActions: RecordedFriendAction[] = [];
  /** Next answered_prompt value returned by POST /api/mood. */
  answeredPrompt: string | null = null;
  /** Force POST /api/mood to fail with this canned response. */
  moodFailure: CannedResponse | null = null;

  private readonly gets = new Map<GetPath, CannedResponse>();
  private server: Server | null = null;
  private url = "";

  set(path: GetPath, body: unknown, status = 200): void {
    this.gets.set(path, { status, body });
  }

  baseUrl(): string {
    if (!this.url) {
      throw new Error("fixture server is not running");
    }
    return this.url;
  }

  async start(port = 0): Promise<string> {
    this.server = createServer((req, res) => this.handle(req, res));
    await new Promise<void>((resolve) => {
      this.server!.listen(port, "127.0.0.1", resolve);
    });
    const addr = this.server.address() as AddressInfo;
    this.url = `http://127.0.0.1:${addr.port}`;
    return this.url;
  }

  port(): number {
    const addr = this.server?.address() as AddressInfo | null;
    if (!addr) {
      throw new Error("fixture server is not running");
    }
    return addr.port;
  }

  async stop(): Promise<void> {
    const server = this.server;
    if (!server) {
      return;
    }
    this.server = null;
    this.url = "";
    await new Promise<void>((resolve, reject) => {
      server.close((err) => (err ? reject(err) : resolve()));
    });
  }

  private async handle(req: IncomingMessage, res: ServerResponse): Promise<void> {
    const send = (status: number, body: unknown) => {
      res.writeHead(status, { "content-type": "application/json" });
      res.end(JSON.stringify(body));
    };

    const auth = req.headers.authorization;
    if (auth !== `Bearer ${FIXTURE_TOKEN}`) {
      send(401, errorBody("unauthorized", "missing or unknown token"));
      return;
    }

    const path = (req.url ?? "").split("?")[0] ?? "";

    if (req.method === "POST" && path === "/api/mood") {
      let parsed: Record<string, unknown>;
      try {
        parsed = JSON.parse(await readBody(req)) as Record<string, unknown>;
      } catch {
        send(400, errorBody("malformed_body", "body is not valid JSON"));
        return;
      }
      if (this.moodFailure) {
        send(this.moodFailure.status, this.moodFailure.body);
        return;
      }
      const fieldErrors: { field: string; error: string }[] = [];
      // stricter than the real server, which ignores extras: catching an
      // undocumented field here means the client drifted off the contract
      const known = new Set(["pleasance", "activation", "source", "timestamp_utc"]);
      for (const key of Object.keys(parsed)) {
        if (!known.has(key)) {
          fieldErrors.push({ field: key, error: "not a documented mood field" });
        }
      }
      if (!isLevel(parsed.pleasance)) {
        fieldErrors.push({ field: "pleasance", error: "must be 0, 1 or 2" });
      }
      if (!isLevel(parsed.activation)) {
        fieldErrors.push({ field: "activation", error: "must be 0, 1 or 2" });
      }
      if (parsed.source !== "manual" && parsed.source !== "prompted") {
        fieldErrors.push({ field: "source", error: "must be manual or prompted" });
      }
      if (fieldErrors.length > 0) {
        send(400, errorBody("validation_error", "invalid mood", fieldErrors));
        return;
      }
      this.moods.push({
        pleasance: parsed.pleasance,
        activation: parsed.activation,
        source: parsed.source,
        timestamp_utc: parsed.timestamp_utc,
      });
      const ts =
        typeof parsed.timestamp_utc === "string"
          ? parsed.timestamp_utc
          : "2017-05-03 12:00:00+00:00";
      send(200, {
        id: `${FIXTURE_USER}/${ts}`,
        mood_state: encodeMoodState(parsed.pleasance as number, parsed.activation as number),
        joined: true,
        drop_reason: null,
        answered_prompt: this.answeredPrompt,
      });
      return;
    }

    if (req.method === "POST" && path.startsWith("/api/friends/")) {
      let parsed: Record<string, unknown>;
      try {
        parsed = JSON.parse(await readBody(req)) as Record<string, unknown>;
      } catch {
        send(400, errorBody("malformed_body", "body is not valid JSON"));
        return;
      }
      const action = path.slice("/api/friends/".length);
      // same body contract as the real server: `target`, never `user`
      if (typeof parsed.target !== "string" || parsed.target === "") {
        send(400, errorBody("validation_error", "missing friend target", [
          { field: "target", error: "required string" },
        ]));
        return;
      }
      if (action === "set_sharing" && typeof parsed.share !== "boolean") {
        send(400, errorBody("validation_error", "missing share flag", [
          { field: "share", error: "required boolean" },
        ]));
        return;
      }
      this.friendActions.push({ action, target: parsed.target, share: parsed.share });
      send(200, {
        a: FIXTURE_USER,
        b: parsed.target,
        status: action === "request" ? "pending" : "accepted",
        share_mood_a_to_b: true,
        share_mood_b_to_a: true,
        requested_by: FIXTURE_USER,
      });
      return;
    }

    if (req.method === "GET" && path in DEFAULT_GETS) {
      const key = path as GetPath;
      const canned = this.gets.get(key) ?? { status: 200, body: DEFAULT_GETS[key] };
      send(canned.status, canned.body);
      return;
    }

    send(404, errorBody("not_found", `no route for ${req.method} ${path}`));
  }
}

function readBody(req: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk as Buffer));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf8")));
    req.on("error", reject);
  });
}
