// Payload types for the happimeter JSON API. These mirror the server's
// responses field for field; the dashboard never invents values of its
// own, it only renders what arrives.

export type Pleasance = 0 | 1 | 2;
export type Activation = 0 | 1 | 2;

/** State codes 1..9; always produced by the server, never computed here. */
export type MoodState = number;

export type MoodSource = "manual" | "prompted";

export interface FieldError {
  field: string;
  error: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field_errors: FieldError[];
}

export interface MoodPost {
  pleasance: Pleasance;
  activation: Activation;
  source: MoodSource;
  timestamp_utc?: string;
}

export interface MoodAck {
  id: string;
  mood_state: MoodState;
  joined: boolean;
  drop_reason: string | null;
  answered_prompt: string | null;
}

export interface PredictedMood {
  pleasance: Pleasance;
  activation: Activation;
  mood_state: MoodState;
  scope: "individual" | "general";
  as_of: string;
  distribution: Record<string, number>;
}

export interface FriendMood {
  kind: "input" | "predicted";
  pleasance: Pleasance;
  activation: Activation;
  mood_state: MoodState;
  timestamp_utc: string;
}

export interface FriendEntry {
  user: string;
  mood: FriendMood | null;
}

export interface FriendsMoods {
  friends: FriendEntry[];
}

export interface ImportanceItem {
  feature: string;
  value: number;
}

export interface NodeCountItem {
  feature: string;
  count: number;
}

export interface InfluencerItem {
  friend: string;
  r: number;
  n_events: number;
  direction: "positive" | "negative";
}

export interface Insights {
  importance: {
    scope: "individual" | "general" | null;
    fallback: boolean;
    by_decrease: ImportanceItem[];
    by_nodes: NodeCountItem[];
    reason: string | null;
  };
  influencers: {
    items: InfluencerItem[];
    reason: string | null;
  };
}

export interface DescriptiveBlock {
  counts: Record<string, number>;
  percentages: Record<string, number>;
  mean: number;
  sd: number;
  n: number;
}

export interface DescriptiveStats {
  available: boolean;
  reason?: string;
  pleasance?: DescriptiveBlock;
  activation?: DescriptiveBlock;
  n?: number;
}

export interface HourlyPoint {
  hour: number;
  mean_pleasance: number;
  mean_activation: number;
  n: number;
}

export interface HourlyStats {
  hours: HourlyPoint[];
}

export interface CorrelationCell {
  a: string;
  b: string;
  r: number;
  stars: string;
  n: number;
}

export interface CorrelationStats {
  available: boolean;
  reason?: string;
  variables?: string[];
  cells: CorrelationCell[];
}

export interface PromptEntry {
  id: string;
  fire_at: string;
  expires_at: string;
  answered: boolean;
}

export interface ScheduleToday {
  date: string;
  zone: string;
  prompts: PromptEntry[];
  due: string | null;
}

export type FriendAction = "request" | "accept" | "unfriend" | "set_sharing";
