// Thin typed client over the control-service API. Every console mutation and
// query goes through these calls — there is no other channel to the backend.

import type {
  DownlinkEntry,
  NodeSummary,
  ScenarioStatus,
  TelemetryResponse,
  TopicMessage,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body: unknown = await response.json().catch(() => null);
  if (!response.ok) {
    const detail =
      body !== null &&
      typeof body === "object" &&
      typeof (body as { error?: unknown }).error === "string"
        ? (body as { error: string }).error
        : `${response.status} ${response.statusText}`;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export interface TelemetryQuery {
  from?: number;
  to?: number;
  agg?: "raw" | "mean" | "min" | "max";
  bucket?: number;
}

export class Client {
  constructor(readonly base: string = "") {}

  getNodes(): Promise<NodeSummary[]> {
    return request(`${this.base}/api/nodes`);
  }

  getTelemetry(
    device: string,
    series: string,
    query: TelemetryQuery = {},
  ): Promise<TelemetryResponse> {
    const params = new URLSearchParams({ device, series });
    if (query.from !== undefined) params.set("from", String(query.from));
    if (query.to !== undefined) params.set("to", String(query.to));
    if (query.agg !== undefined) params.set("agg", query.agg);
    if (query.bucket !== undefined) params.set("bucket", String(query.bucket));
    return request(`${this.base}/api/telemetry?${params}`);
  }

  sendDownlink(
    device_id: string,
    fport: number,
    payload_b64: string,
  ): Promise<DownlinkEntry> {
    return request(`${this.base}/api/downlink`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ device_id, fport, payload_b64 }),
    });
  }

  getQueue(): Promise<DownlinkEntry[]> {
    return request(`${this.base}/api/downlink/queue`);
  }

  getStatus(): Promise<ScenarioStatus> {
    return request(`${this.base}/api/scenario/status`);
  }

  getErrors(): Promise<TopicMessage[]> {
    return request(`${this.base}/api/errors`);
  }

  startScenario(document: unknown): Promise<ScenarioStatus> {
    return request(`${this.base}/api/scenario`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(document),
    });
  }

  streamUrl(): string {
    return `${this.base}/api/stream`;
  }
}
