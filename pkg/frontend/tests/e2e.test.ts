/**
 * End-to-end console flow against a real control service.
 *
 * Spawns the Python service, starts the paced demo scenario (speedup 60)
 * through the console's own button, and then walks the operator path in the
 * DOM: watch the six series panels fill as uplinks land, queue the GPS
 * preset downlink, see it pending in the queue feed, and — after the node's
 * next uplink delivers the command and the fix completes — watch the filled
 * marker appear on the fleet map and the queue drain.
 *
 * The DOM here has no EventSource, so the console runs in its polling
 * fallback mode; the SSE client is covered by unit tests and the stream
 * endpoint by the service's own suite.
 *
 * @vitest-environment happy-dom
 * @vitest-environment-options {"url": "http://127.0.0.1:8741"}
 */
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, expect, test, vi } from "vitest";

import { GPS_PRESET_B64 } from "../src/base64.js";
import { bootConsole, type ConsoleHandle } from "../src/main.js";

const PORT = 8741;
const BASE = `http://127.0.0.1:${PORT}`;

const SERVER_CODE = [
  "from senswich.service import create_app",
  "import uvicorn",
  `uvicorn.run(create_app(), host="127.0.0.1", port=${PORT}, log_level="warning")`,
].join("\n");

let server: ChildProcess | null = null;
let serverLog = "";
let handle: ConsoleHandle | null = null;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function panelCounts(root: HTMLElement): number[] {
  return [...root.querySelectorAll(".panel .count")].map((el) => {
    const match = /^(\d+) points?$/.exec(el.textContent ?? "");
    return match ? Number(match[1]) : 0;
  });
}

beforeAll(async () => {
  // Force the deterministic degraded path: no SSE in this DOM.
  vi.stubGlobal("EventSource", undefined);

  server = spawn("python3", ["-c", SERVER_CODE], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  server.stdout?.on("data", (chunk: Buffer) => (serverLog += String(chunk)));
  server.stderr?.on("data", (chunk: Buffer) => (serverLog += String(chunk)));

  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/api/scenario/status`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`control service did not come up:\n${serverLog}`);
    }
    await sleep(200);
  }
}, 60_000);

afterAll(() => {
  handle?.close();
  server?.kill("SIGKILL");
  vi.unstubAllGlobals();
});

test(
  "operator flow: panels fill, GPS preset queues, fix lands on the map",
  { timeout: 150_000 },
  async () => {
    const root = document.createElement("div");
    document.body.append(root);
    handle = await bootConsole(root, BASE);

    // Fresh service: no scenario yet, stream degraded to polling.
    const runBadge = root.querySelector("#run-state")!;
    const streamBadge = root.querySelector("#stream-state")!;
    expect(runBadge.textContent).toBe("idle");
    expect(streamBadge.textContent).toBe("polling");

    // The operator starts the paced demo scenario.
    root.querySelector("#start-demo")!.dispatchEvent(new Event("click"));
    await vi.waitFor(
      () => expect(runBadge.textContent ?? "").toMatch(/^running/),
      { timeout: 10_000, interval: 100 },
    );

    // The fleet shows up: device picker plus hollow position markers.
    await vi.waitFor(
      () => {
        const ids = [...root.querySelectorAll("#device-pick option")].map(
          (option) => option.getAttribute("value"),
        );
        expect(ids).toEqual(["buoy-01", "buoy-02"]);
        expect(root.querySelectorAll("circle.node-marker").length).toBe(2);
      },
      { timeout: 10_000, interval: 100 },
    );
    expect(handle.selectedDevice()).toBe("buoy-01");

    // Six series panels fill once the first uplink lands (~3.6 s wall).
    await vi.waitFor(
      () => {
        const counts = panelCounts(root);
        expect(counts.length).toBe(6);
        for (const n of counts) expect(n).toBeGreaterThanOrEqual(1);
      },
      { timeout: 30_000, interval: 250 },
    );

    // The node only runs its GPS on command, so no fix marker can exist yet.
    expect(root.querySelector('circle[data-fix="buoy-01"]')).toBeNull();

    // Queue the GPS preset through the form.
    const payload = root.querySelector("#dl-payload") as HTMLInputElement;
    const submit = root.querySelector("#dl-submit") as HTMLButtonElement;
    root.querySelector("#dl-preset")!.dispatchEvent(new Event("click"));
    expect(payload.value).toBe(GPS_PRESET_B64);
    expect(submit.disabled).toBe(false);
    root
      .querySelector("form.downlink")!
      .dispatchEvent(new Event("submit", { cancelable: true }));

    // The pending command appears in the queue feed.
    await vi.waitFor(
      () => {
        const rows = [...root.querySelectorAll("#queue li.mono")].map(
          (li) => li.textContent,
        );
        expect(rows).toContain(`buoy-01  fport 1  ${GPS_PRESET_B64}`);
      },
      { timeout: 5_000, interval: 100 },
    );

    // Panels keep updating: the following uplink lands (~13.6 s wall).
    await vi.waitFor(
      () => {
        for (const n of panelCounts(root)) expect(n).toBeGreaterThanOrEqual(2);
      },
      { timeout: 30_000, interval: 250 },
    );

    // That uplink's receive window delivered the command; once the fix
    // completes, the filled marker appears on the map.
    await vi.waitFor(
      () =>
        expect(root.querySelector('circle[data-fix="buoy-01"]')).not.toBeNull(),
      { timeout: 60_000, interval: 250 },
    );
    const fix = handle.state.fixes.get("buoy-01");
    expect(fix).toBeDefined();
    expect(Math.abs(fix![0] - 45.438)).toBeLessThan(0.05);
    expect(Math.abs(fix![1] - 12.33)).toBeLessThan(0.05);

    // Delivered commands leave the pending queue.
    await vi.waitFor(
      () => {
        const rows = [...root.querySelectorAll("#queue li")].map(
          (li) => li.textContent,
        );
        expect(rows).toEqual(["queue empty"]);
      },
      { timeout: 10_000, interval: 250 },
    );

    // Clean scenario: the error feed stayed empty.
    const errorRows = [...root.querySelectorAll("#errors li")].map(
      (li) => li.textContent,
    );
    expect(errorRows).toEqual(["no errors"]);
  },
);
