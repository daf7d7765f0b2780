// Shapes returned by the control-service HTTP API. The console renders these
// values verbatim; it never derives new numbers from them.

export interface NodeSummary {
  device_id: string;
  lat: number;
  lon: number;
  profile: string;
  sampling_period_s: number;
  phase: string;
  gps_mode: string;
  cycles: number;
  charge_mas: number;
  energy_j: number;
  gps_energy_j: number;
  last_seen: number | null;
  last_values: Record<string, number>;
  battery_remaining: number;
  fix_position: [number, number] | null;
}

export interface TelemetryResponse {
  device_id: string;
  series: string;
  agg: string;
  points: [number, number][];
}

export interface DownlinkEntry {
  device_id: string;
  fport: number;
  payload_b64: string;
  enqueued_at: number;
  delivered_at: number | null;
}

export interface ScenarioStatus {
  state: "idle" | "ready" | "running" | "done" | "stopped";
  sim_time?: number;
  duration_s?: number;
  progress?: number;
  speedup?: number | string;
  wall_s?: number;
}

export interface TopicMessage {
  topic: string;
  device_id: string;
  time: number;
  payload_b64: string;
  decoded: Record<string, number>;
  cleartext: string;
  error: string;
}

/** One journal entry from GET /api/stream; `kind` discriminates. */
export interface JournalEntry {
  kind: string;
  t: number;
  [field: string]: unknown;
}

export interface MessageEntry extends JournalEntry, TopicMessage {
  kind: "message";
}

export function isMessageEntry(entry: JournalEntry): entry is MessageEntry {
  return entry.kind === "message";
}
