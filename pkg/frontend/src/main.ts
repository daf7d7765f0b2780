// Console bootstrap: builds the dashboard into #app, backfills from the API,
// then follows the live journal stream (or falls back to polling). One
// default dashboard: six series panels for the selected buoy, fleet map,
// downlink form with pending queue, and the error feed.

import { Client } from "./api.js";
import { DownlinkForm } from "./form.js";
import { FleetMap } from "./map.js";
import { DashboardPanel, PANEL_SPECS } from "./panels.js";
import { ConsoleState } from "./state.js";
import { subscribeJournal } from "./stream.js";
import type { StreamHandle, StreamState } from "./stream.js";
import type { JournalEntry, NodeSummary, ScenarioStatus } from "./types.js";

const POLL_INTERVAL_MS = 2000;
const STALE_CHECK_MS = 5000;
const STALE_AFTER_MS = 15000;

/** Paced demo posted by the "start demo" button. */
const DEMO_SCENARIO = {
  seed: 42,
  duration_s: 7200,
  speedup: 60,
  nodes: [
    {
      device_id: "buoy-01",
      lat: 45.438,
      lon: 12.33,
      gps: { fix_time: { kind: "fixed", value: 60 } },
    },
    { device_id: "buoy-02", lat: 45.35, lon: 12.3 },
  ],
  gateways: [
    { gateway_id: "gw-lido", lat: 45.415, lon: 12.375 },
    { gateway_id: "gw-chioggia", lat: 45.23, lon: 12.27 },
  ],
};

export interface ConsoleHandle {
  readonly state: ConsoleState;
  selectedDevice(): string;
  refresh(): Promise<void>;
  close(): void;
}

export async function bootConsole(
  root: HTMLElement,
  baseUrl = "",
): Promise<ConsoleHandle> {
  const client = new Client(baseUrl);
  const state = new ConsoleState();
  let nodes: NodeSummary[] = [];
  let closed = false;

  // --- static layout ---------------------------------------------------------

  root.replaceChildren();

  const topbar = document.createElement("div");
  topbar.className = "topbar";
  const title = document.createElement("h1");
  title.textContent = "senswich console";
  const runBadge = document.createElement("span");
  runBadge.className = "badge";
  runBadge.id = "run-state";
  runBadge.textContent = "idle";
  const streamBadge = document.createElement("span");
  streamBadge.className = "badge";
  streamBadge.id = "stream-state";
  streamBadge.textContent = "connecting";
  const devicePick = document.createElement("select");
  devicePick.className = "device-pick";
  devicePick.id = "device-pick";
  const controls = document.createElement("div");
  controls.className = "controls";
  const demoButton = document.createElement("button");
  demoButton.id = "start-demo";
  demoButton.textContent = "start demo scenario";
  controls.append(demoButton);
  topbar.append(title, runBadge, streamBadge, devicePick, controls);

  const layout = document.createElement("div");
  layout.className = "layout";
  const panelGrid = document.createElement("div");
  panelGrid.className = "panel-grid";
  const panels = PANEL_SPECS.map((spec) => new DashboardPanel(spec));
  panelGrid.append(...panels.map((panel) => panel.element));

  const side = document.createElement("div");
  side.className = "side";

  const mapCard = card("fleet map");
  const map = new FleetMap();
  mapCard.append(map.element);

  const downlinkCard = card("downlink");
  const form = new DownlinkForm(client, () => void refreshQueue());
  const queueList = document.createElement("ul");
  queueList.className = "feed";
  queueList.id = "queue";
  downlinkCard.append(form.element, queueList);

  const errorCard = card("decode errors");
  const errorList = document.createElement("ul");
  errorList.className = "feed";
  errorList.id = "errors";
  errorCard.append(errorList);

  side.append(mapCard, downlinkCard, errorCard);
  layout.append(panelGrid, side);
  root.append(topbar, layout);

  // --- rendering -------------------------------------------------------------

  const selectedDevice = (): string => devicePick.value;

  function renderPanels(): void {
    const device = selectedDevice();
    if (!device) return;
    for (const panel of panels) {
      panel.update(state.seriesOf(device, panel.spec.series));
    }
  }

  function renderMap(): void {
    map.update(nodes, state.fixes);
  }

  function renderStatus(status: ScenarioStatus): void {
    runBadge.textContent =
      status.state === "running" && status.sim_time !== undefined
        ? `running · t=${Math.floor(status.sim_time)} s`
        : status.state;
  }

  function renderQueue(entries: { device_id: string; fport: number; payload_b64: string }[]): void {
    queueList.replaceChildren(
      ...entries.map((entry) => {
        const row = document.createElement("li");
        row.className = "mono";
        row.textContent = `${entry.device_id}  fport ${entry.fport}  ${entry.payload_b64}`;
        return row;
      }),
    );
    if (entries.length === 0) {
      const row = document.createElement("li");
      row.className = "empty";
      row.textContent = "queue empty";
      queueList.append(row);
    }
  }

  function renderErrors(): void {
    errorList.replaceChildren(
      ...state.errors.map((message) => {
        const row = document.createElement("li");
        row.className = "error-row";
        row.textContent = `t=${message.time}  ${message.device_id}: ${message.error}`;
        return row;
      }),
    );
    if (state.errors.length === 0) {
      const row = document.createElement("li");
      row.className = "empty";
      row.textContent = "no errors";
      errorList.append(row);
    }
  }

  function setStreamBadge(text: string, tone: string): void {
    streamBadge.textContent = text;
    streamBadge.dataset["tone"] = tone;
  }

  // --- data flows ------------------------------------------------------------

  async function refreshNodes(): Promise<void> {
    nodes = await client.getNodes();
    const ids = nodes.map((node) => node.device_id);
    const previous = selectedDevice();
    devicePick.replaceChildren(
      ...ids.map((id) => {
        const option = document.createElement("option");
        option.value = id;
        option.textContent = id;
        return option;
      }),
    );
    if (ids.length > 0) {
      // Select explicitly; an unset select reads as "" in some DOMs.
      devicePick.value = ids.includes(previous) ? previous : ids[0]!;
    }
    form.setDevices(ids);
    for (const node of nodes) {
      if (node.fix_position && !state.fixes.has(node.device_id)) {
        state.fixes.set(node.device_id, node.fix_position);
      }
    }
    renderMap();
  }

  async function backfill(): Promise<void> {
    const device = selectedDevice();
    if (!device) return;
    await Promise.all(
      PANEL_SPECS.map(async (spec) => {
        const telemetry = await client.getTelemetry(device, spec.series);
        state.seed(device, spec.series, telemetry.points);
      }),
    );
    renderPanels();
  }

  async function refreshQueue(): Promise<void> {
    renderQueue(await client.getQueue());
  }

  async function refreshErrors(): Promise<void> {
    state.replaceErrors(await client.getErrors());
    renderErrors();
  }

  async function refreshStatus(): Promise<void> {
    renderStatus(await client.getStatus());
  }

  async function refresh(): Promise<void> {
    const status = await client.getStatus();
    renderStatus(status);
    // An idle service has no scenario to query; the status poll alone will
    // notice when a run appears.
    if (status.state === "idle") return;
    await refreshNodes();
    await Promise.all([backfill(), refreshQueue(), refreshErrors()]);
  }

  // --- live stream with polling fallback --------------------------------------

  let pollTimer: ReturnType<typeof setInterval> | null = null;

  function setPolling(enabled: boolean): void {
    if (enabled && pollTimer === null) {
      pollTimer = setInterval(() => {
        void refresh().catch(() => {});
      }, POLL_INTERVAL_MS);
    }
    if (!enabled && pollTimer !== null) {
      clearInterval(pollTimer);
      pollTimer = null;
    }
  }

  function onEntry(entry: JournalEntry): void {
    const effect = state.applyEntry(entry);
    if (effect === "points" || effect === "fix") {
      if (entry["device_id"] === selectedDevice()) renderPanels();
      if (effect === "fix") renderMap();
    } else if (effect === "error") {
      renderErrors();
    }
    if (entry.kind === "downlink_queued" || entry.kind === "downlink") {
      void refreshQueue();
    }
    if (entry.kind === "cycle_start" || entry.kind === "run_end") {
      void refreshStatus();
      void refreshNodes().catch(() => {});
    }
  }

  function onStreamState(streamState: StreamState): void {
    if (closed) return;
    if (streamState === "live") {
      setStreamBadge("live", "live");
      setPolling(false);
    } else if (streamState === "polling") {
      setStreamBadge("polling", "polling");
      setPolling(true);
    } else {
      setStreamBadge("reconnecting", "stale");
    }
  }

  let stream: StreamHandle = { close() {} };

  function openStream(): void {
    stream.close();
    stream = subscribeJournal(client.streamUrl(), onEntry, onStreamState);
  }

  const staleTimer = setInterval(() => {
    if (
      pollTimer === null &&
      state.isStale(Date.now(), STALE_AFTER_MS) &&
      streamBadge.dataset["tone"] === "live"
    ) {
      setStreamBadge("stale", "stale");
      openStream(); // resubscribe; the server tap may have gone away
    }
  }, STALE_CHECK_MS);

  // --- wiring ----------------------------------------------------------------

  devicePick.addEventListener("change", () => {
    void backfill();
  });

  demoButton.addEventListener("click", () => {
    void (async () => {
      try {
        renderStatus(await client.startScenario(DEMO_SCENARIO));
        state.clear();
        await refresh();
        openStream();
      } catch {
        runBadge.textContent = "scenario rejected";
      }
    })();
  });

  await refresh().catch(() => {});
  openStream();

  return {
    state,
    selectedDevice,
    async refresh() {
      await refresh();
    },
    close() {
      closed = true;
      clearInterval(staleTimer);
      setPolling(false);
      stream.close();
    },
  };
}

function card(heading: string): HTMLElement {
  const element = document.createElement("section");
  element.className = "card";
  const h = document.createElement("h2");
  h.textContent = heading;
  element.append(h);
  return element;
}

const appRoot =
  typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot) {
  void bootConsole(appRoot);
}
