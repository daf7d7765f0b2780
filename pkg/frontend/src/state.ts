// Console-side mirror of what the API has published: per-series point
// buffers, last GPS fixes, and the error feed. Values are stored exactly as
// received — the reducer only routes and caps, it never transforms numbers.

import type { JournalEntry, TopicMessage } from "./types.js";
import { isMessageEntry } from "./types.js";

export const WATER_SERIES = [
  "ph",
  "ec",
  "turbidity",
  "do",
  "liquid_level",
  "temperature",
] as const;

export const GPS_SERIES = ["gps_lat", "gps_lon", "gps_alt"] as const;

export interface SeriesBuffer {
  times: number[];
  values: number[];
}

export type EntryEffect = "points" | "fix" | "error" | "other";

function key(device: string, series: string): string {
  return `${device}|${series}`;
}

export class ConsoleState {
  private readonly buffers = new Map<string, SeriesBuffer>();

  readonly fixes = new Map<string, [number, number]>();
  readonly errors: TopicMessage[] = [];
  /** Wall-clock ms of the last stream entry; null until the first one. */
  lastEntryAtMs: number | null = null;

  constructor(
    readonly capacity = 500,
    readonly errorCapacity = 100,
  ) {}

  seriesOf(device: string, series: string): SeriesBuffer {
    let buffer = this.buffers.get(key(device, series));
    if (!buffer) {
      buffer = { times: [], values: [] };
      this.buffers.set(key(device, series), buffer);
    }
    return buffer;
  }

  /** Append one point, dropping out-of-order duplicates and capping length. */
  push(device: string, series: string, time: number, value: number): void {
    const buffer = this.seriesOf(device, series);
    const lastTime = buffer.times[buffer.times.length - 1];
    if (lastTime !== undefined && time <= lastTime) return;
    buffer.times.push(time);
    buffer.values.push(value);
    if (buffer.times.length > this.capacity) {
      buffer.times.shift();
      buffer.values.shift();
    }
  }

  /** Backfill from a telemetry query (points arrive time-ascending). */
  seed(device: string, series: string, points: [number, number][]): void {
    for (const [time, value] of points) this.push(device, series, time, value);
  }

  /** Route one journal entry; returns what kind of display it affects. */
  applyEntry(entry: JournalEntry, nowMs: number = Date.now()): EntryEffect {
    this.lastEntryAtMs = nowMs;
    if (!isMessageEntry(entry)) return "other";
    if (entry.error) {
      this.errors.unshift(entry);
      if (this.errors.length > this.errorCapacity) this.errors.pop();
      return "error";
    }
    for (const [series, value] of Object.entries(entry.decoded)) {
      this.push(entry.device_id, series, entry.time, value);
    }
    const lat = entry.decoded["gps_lat"];
    const lon = entry.decoded["gps_lon"];
    if (lat !== undefined && lon !== undefined) {
      this.fixes.set(entry.device_id, [lat, lon]);
      return "fix";
    }
    return "points";
  }

  /** True when a live stream has gone quiet for longer than `thresholdMs`. */
  isStale(nowMs: number, thresholdMs: number): boolean {
    return (
      this.lastEntryAtMs !== null && nowMs - this.lastEntryAtMs > thresholdMs
    );
  }

  /** Replace the error feed wholesale (polling refresh from GET /api/errors). */
  replaceErrors(messages: TopicMessage[]): void {
    this.errors.length = 0;
    // Feed shows newest first; the API returns oldest first.
    for (const message of messages) this.errors.unshift(message);
    if (this.errors.length > this.errorCapacity) {
      this.errors.length = this.errorCapacity;
    }
  }

  /** Drop everything (a new scenario replaced the run). */
  clear(): void {
    this.buffers.clear();
    this.fixes.clear();
    this.errors.length = 0;
    this.lastEntryAtMs = null;
  }
}
