import { afterEach, describe, expect, test, vi } from "vitest";

import { ApiError, Client } from "../src/api.js";

interface Call {
  url: string;
  init: RequestInit | undefined;
}

function stubFetch(
  status: number,
  body: unknown,
  { json = true }: { json?: boolean } = {},
): Call[] {
  const calls: Call[] = [];
  vi.stubGlobal(
    "fetch",
    async (url: string, init?: RequestInit) => {
      calls.push({ url, init });
      return {
        ok: status >= 200 && status < 300,
        status,
        statusText: "Status Text",
        json: async () => {
          if (!json) throw new Error("not json");
          return body;
        },
      };
    },
  );
  return calls;
}

afterEach(() => vi.unstubAllGlobals());

describe("Client request plumbing", () => {
  test("getNodes hits /api/nodes under the base URL", async () => {
    const calls = stubFetch(200, [{ device_id: "buoy-01" }]);
    const client = new Client("http://127.0.0.1:9999");
    const nodes = await client.getNodes();
    expect(calls.map((c) => c.url)).toEqual(["http://127.0.0.1:9999/api/nodes"]);
    expect(nodes).toEqual([{ device_id: "buoy-01" }]);
  });

  test("getTelemetry encodes every query knob", async () => {
    const calls = stubFetch(200, { points: [] });
    await new Client().getTelemetry("buoy-01", "ph", {
      from: 0,
      to: 3600,
      agg: "mean",
      bucket: 600,
    });
    expect(calls[0]?.url).toBe(
      "/api/telemetry?device=buoy-01&series=ph&from=0&to=3600&agg=mean&bucket=600",
    );
  });

  test("getTelemetry omits unset knobs", async () => {
    const calls = stubFetch(200, { points: [] });
    await new Client().getTelemetry("buoy-01", "temperature");
    expect(calls[0]?.url).toBe("/api/telemetry?device=buoy-01&series=temperature");
  });

  test("sendDownlink posts the JSON body", async () => {
    const calls = stubFetch(200, { queued: true });
    await new Client().sendDownlink("buoy-01", 1, "Z3Bz");
    const init = calls[0]?.init;
    expect(calls[0]?.url).toBe("/api/downlink");
    expect(init?.method).toBe("POST");
    expect(init?.headers).toEqual({ "content-type": "application/json" });
    expect(JSON.parse(String(init?.body))).toEqual({
      device_id: "buoy-01",
      fport: 1,
      payload_b64: "Z3Bz",
    });
  });

  test("startScenario posts the document verbatim", async () => {
    const calls = stubFetch(200, { state: "running" });
    const doc = { seed: 7, duration_s: 60, nodes: [] };
    await new Client().startScenario(doc);
    expect(calls[0]?.url).toBe("/api/scenario");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual(doc);
  });

  test("streamUrl is a plain string, not a request", () => {
    stubFetch(200, null);
    expect(new Client("http://h").streamUrl()).toBe("http://h/api/stream");
  });
});

describe("Client error handling", () => {
  test("service error bodies surface as ApiError with the server's text", async () => {
    stubFetch(400, { error: "Base64Error: invalid padding" });
    const failure = await new Client()
      .sendDownlink("buoy-01", 1, "@@@")
      .then(() => null)
      .catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(400);
    expect((failure as ApiError).message).toBe("Base64Error: invalid padding");
  });

  test("non-JSON failure bodies fall back to status text", async () => {
    stubFetch(503, null, { json: false });
    const failure = await new Client()
      .getNodes()
      .then(() => null)
      .catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).message).toBe("503 Status Text");
  });

  test("JSON error bodies without an error field also fall back", async () => {
    stubFetch(404, { detail: "not here" });
    const failure = await new Client()
      .getNodes()
      .then(() => null)
      .catch((e: unknown) => e);
    expect((failure as ApiError).message).toBe("404 Status Text");
  });

  test("ApiError is an Error with a useful name", () => {
    const error = new ApiError(409, "NoScenario: no scenario is loaded");
    expect(error).toBeInstanceOf(Error);
    expect(error.name).toBe("ApiError");
    expect(error.status).toBe(409);
  });
});
