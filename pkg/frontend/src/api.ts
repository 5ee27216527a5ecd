// Thin typed client for the happimeter JSON API.
//
// Every call sends the bearer token and decodes the server's uniform
// error shape {code, message, field_errors} into an ApiError. Network
// failures (server unreachable, connection dropped) are NOT ApiErrors;
// fetch's TypeError is allowed to propagate so callers can tell "the
// server said no" apart from "the server never answered".

import type {
  ApiErrorBody,
  CorrelationStats,
  DescriptiveStats,
  FieldError,
  FriendAction,
  FriendsMoods,
  HourlyStats,
  Insights,
  MoodAck,
  MoodPost,
  PredictedMood,
  ScheduleToday,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly fieldErrors: FieldError[];

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.fieldErrors = body.field_errors ?? [];
  }
}

export interface ApiClientOptions {
  baseUrl: string;
  token: string;
  fetchImpl?: typeof fetch;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchImpl: typeof fetch;

  constructor(options: ApiClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.token = options.token;
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {
      authorization: `Bearer ${this.token}`,
    };
    let payload: string | undefined;
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: payload,
    });
    if (!response.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = {
          code: "unexpected",
          message: `request failed with status ${response.status}`,
          field_errors: [],
        };
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  postMood(mood: MoodPost): Promise<MoodAck> {
    return this.request<MoodAck>("POST", "/api/mood", mood);
  }

  predictedMood(): Promise<PredictedMood> {
    return this.request<PredictedMood>("GET", "/api/mood/predicted");
  }

  friendsMoods(): Promise<FriendsMoods> {
    return this.request<FriendsMoods>("GET", "/api/friends/moods");
  }

  friendAction(
    action: FriendAction,
    body: { target: string; share?: boolean }
  ): Promise<unknown> {
    return this.request("POST", `/api/friends/${action}`, body);
  }

  insights(): Promise<Insights> {
    return this.request<Insights>("GET", "/api/insights");
  }

  statsDescriptive(): Promise<DescriptiveStats> {
    return this.request<DescriptiveStats>("GET", "/api/stats/descriptive");
  }

  statsHourly(): Promise<HourlyStats> {
    return this.request<HourlyStats>("GET", "/api/stats/hourly");
  }

  statsCorrelations(): Promise<CorrelationStats> {
    return this.request<CorrelationStats>("GET", "/api/stats/correlations");
  }

  scheduleToday(): Promise<ScheduleToday> {
    return this.request<ScheduleToday>("GET", "/api/schedule/today");
  }
}
