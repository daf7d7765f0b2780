"""Deterministic event loop tying nodes, transport, and pipeline together.

The simulation advances a single heap of timed events:

    wake     a node starts its acquisition cycle (phases journaled, the
             radio transmission is scheduled at its in-cycle offset)
    tx       the 2 s uplink happens: gateway coverage decides Delivered or
             Dropped, delivered frames are ingested, and the device's
             post-uplink receive window flushes at most one queued downlink
    gps      a running GPS search resolves (fix posted or give-up)

Identical config and seed replay the identical event sequence, so the export
files (points.csv, events.jsonl, summary.json) are byte-identical between
runs.  In paced mode each event waits until wall time reaches
event_time / speedup; "max" mode never sleeps.

Downlinks can be enqueued at any time from other threads (the HTTP service);
the queue itself serializes mutations, and commands only reach the device in
a receive window following a *delivered* uplink — a dropped frame was never
heard, so nothing can answer it.
"""

from __future__ import annotations

import base64
import heapq
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy import BatteryPack, DischargeBasis, PROFILES, Phase, energy_report
from .link import DownlinkCommand, LoraLink, UplinkFrame, duty_cycle
from .lpp import decode_downlink, encode_sampleset
from .node import Node
from .pipeline import Pipeline, SeriesStore, TOPIC_DATA, UnknownDevice
from .scenario import ScenarioConfig, build_environment

_WAKE, _TX, _GPS = "wake", "tx", "gps"


class EventTap:
    """Order-preserving feed of journal entries for live consumers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: list[dict] = []

    def _offer(self, entry: dict) -> None:
        with self._lock:
            self._entries.append(entry)

    def drain(self) -> list[dict]:
        with self._lock:
            out = self._entries
            self._entries = []
        return out


@dataclass
class _NodeTracker:
    last_seen: float | None = None
    last_values: dict | None = None
    last_fix: tuple[float, float] | None = None
    drained_events: int = 0


class Simulation:
    """One scenario run; state is advanced only by run() on a single thread."""

    def __init__(self, config: ScenarioConfig, out_dir: str | Path | None = None):
        self.config = config
        self.out_dir = Path(out_dir) if out_dir else None
        if self.out_dir:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        self.env = build_environment(config)
        root = np.random.SeedSequence(config.seed)
        link_seq, *node_seqs = root.spawn(1 + len(config.nodes))
        self.link = LoraLink(
            list(config.gateways),
            rx_delay_s=config.rx_delay_s,
            loss_probability=config.loss_probability,
            corruption_probability=config.corruption_probability,
            rng=np.random.default_rng(link_seq),
        )
        self.nodes = {
            cfg.device_id: Node(cfg, self.env, seq)
            for cfg, seq in zip(config.nodes, node_seqs)
        }
        store = SeriesStore(
            retention=config.retention,
            persist_path=self.out_dir / "points.csv" if self.out_dir else None,
        )
        self.pipeline = Pipeline(store=store)
        # The fleet is known from the start; silent nodes are queryable as
        # empty series rather than unknown devices.
        for device_id in self.nodes:
            store.register_device(device_id)
        self.journal: list[dict] = []
        self.sim_time = 0.0
        self.state = "ready"
        self.wall_started: float | None = None
        self.wall_elapsed = 0.0
        self.counters = {
            "cycles": 0, "uplinks_delivered": 0, "uplinks_dropped": 0,
            "messages_data": 0, "messages_error": 0, "downlinks_delivered": 0,
            "points_expired": 0,
        }
        self._taps: list[EventTap] = []
        self._trackers = {d: _NodeTracker() for d in self.nodes}
        self._frames: list[UplinkFrame] = []
        self._heap: list[tuple] = []
        self._seq = 0
        for device_id in self.nodes:
            self._push(0.0, _WAKE, device_id)

    # --- plumbing ------------------------------------------------------------

    def _push(self, t: float, kind: str, device_id: str, data=None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (t, self._seq, kind, device_id, data))

    def _emit(self, entry: dict) -> None:
        self.journal.append(entry)
        for tap in list(self._taps):
            tap._offer(entry)

    def tap(self) -> EventTap:
        tap = EventTap()
        self._taps.append(tap)
        return tap

    def untap(self, tap: EventTap) -> None:
        if tap in self._taps:
            self._taps.remove(tap)

    def _drain_node_events(self, node: Node) -> None:
        tracker = self._trackers[node.device_id]
        for event in node.events[tracker.drained_events:]:
            self._emit({
                "kind": "node_event", "t": event.t, "device_id": event.device_id,
                "event": event.kind, "detail": event.detail,
            })
        tracker.drained_events = len(node.events)

    # --- command channel (thread-safe entry point) ----------------------------

    def enqueue_downlink(self, device_id: str, fport: int,
                         payload_b64: str) -> DownlinkCommand:
        if device_id not in self.nodes:
            raise UnknownDevice(device_id)
        decode_downlink(fport, payload_b64)  # validates fport and base64
        cmd = self.link.queue.enqueue(device_id, fport, payload_b64,
                                      t=self.sim_time)
        self._emit({
            "kind": "downlink_queued", "t": cmd.enqueued_at,
            "device_id": device_id, "fport": fport, "payload_b64": payload_b64,
        })
        return cmd

    # --- event handlers --------------------------------------------------------

    def _on_wake(self, t: float, node: Node) -> None:
        if t + node.config.sampling_period_s > self.config.duration_s:
            return  # the full cycle would not fit in the run
        expired = self.pipeline.store.expire(t)
        if expired:
            self.counters["points_expired"] += expired
            self._emit({"kind": "expired", "t": t, "count": expired})
        sample, phase_events = node.run_cycle(t)
        self.counters["cycles"] += 1
        self._emit({"kind": "cycle_start", "t": t, "device_id": node.device_id,
                    "cycle": node.ledger.cycles})
        for event in phase_events:
            self._emit({
                "kind": "phase", "t": event.start_s, "device_id": node.device_id,
                "phase": event.phase.value, "start_s": event.start_s,
                "end_s": event.end_s,
                "relays": [[op.relay, op.closed] for op in event.relay_ops],
            })
        tx = next(e for e in phase_events if e.phase is Phase.LORA_TX)
        self._push(tx.start_s, _TX, node.device_id, sample)
        self._push(t + node.config.sampling_period_s, _WAKE, node.device_id)

    def _on_tx(self, t: float, node: Node, sample) -> None:
        frame = UplinkFrame(
            device_id=node.device_id,
            payload=encode_sampleset(sample),
            tx_start=t,
            frame_id=len(self._frames) + 1,
        )
        self._frames.append(frame)
        result = self.link.deliver_uplink(frame, node.position)
        self._emit({
            "kind": "uplink", "t": t, "device_id": node.device_id,
            "frame_id": frame.frame_id, "bytes": len(frame.payload),
            "delivered": result.delivered,
            "received_by": list(frame.received_by),
        })
        if not result.delivered:
            self.counters["uplinks_dropped"] += 1
            return
        self.counters["uplinks_delivered"] += 1
        tracker = self._trackers[node.device_id]
        tracker.last_seen = frame.tx_end
        tracker.last_values = sample.as_dict()
        if sample.gps is not None:
            tracker.last_fix = (sample.gps[0], sample.gps[1])
        message = self.pipeline.ingest(
            frame, t=frame.tx_end,
            payload_b64=base64.b64encode(result.payload).decode("ascii"),
        )
        key = "messages_data" if message.topic == TOPIC_DATA else "messages_error"
        self.counters[key] += 1
        self._emit({"kind": "message", "t": message.time, **message.as_dict()})
        for cmd in self.link.queue.flush(node.device_id, frame.tx_end):
            self.counters["downlinks_delivered"] += 1
            command = decode_downlink(cmd.fport, cmd.payload_b64)
            node.handle_downlink(command, cmd.delivered_at)
            self._emit({"kind": "downlink", "t": cmd.delivered_at,
                        **cmd.as_dict()})
            self._drain_node_events(node)
            resolve_at = node.gps.resolve_at
            if resolve_at is not None:
                self._push(resolve_at, _GPS, node.device_id)

    def _on_gps(self, t: float, node: Node) -> None:
        node.step_gps(t)
        self._drain_node_events(node)

    # --- run loop ----------------------------------------------------------------

    def run(self, stop: threading.Event | None = None) -> dict:
        self.state = "running"
        self.wall_started = time.monotonic()
        handlers = {_WAKE: self._on_wake, _TX: self._on_tx, _GPS: self._on_gps}
        while self._heap:
            t, _, kind, device_id, data = heapq.heappop(self._heap)
            if t > self.config.duration_s:
                continue
            if stop is not None and stop.is_set():
                self.state = "stopped"
                break
            self._pace(t, stop)
            self.sim_time = t
            node = self.nodes[device_id]
            if kind is _TX:
                handlers[kind](t, node, data)
            else:
                handlers[kind](t, node)
        else:
            self.sim_time = self.config.duration_s
            self.state = "done"
        self.wall_elapsed = time.monotonic() - self.wall_started
        summary = self.summary()
        self._emit({"kind": "run_end", "t": self.sim_time, "state": self.state})
        if self.out_dir:
            self._export(summary)
        return summary

    def _pace(self, t: float, stop: threading.Event | None) -> None:
        if not self.config.paced:
            return
        target = self.wall_started + t / float(self.config.speedup)
        while True:
            delay = target - time.monotonic()
            if delay <= 0 or (stop is not None and stop.is_set()):
                return
            time.sleep(min(delay, 0.2))

    # --- reporting -------------------------------------------------------------

    def node_summaries(self) -> list[dict]:
        pack = BatteryPack()
        out = []
        for device_id in sorted(self.nodes):
            node = self.nodes[device_id]
            tracker = self._trackers[device_id]
            consumed_wh = node.ledger.energy_j / 3600.0
            remaining = max(0.0, min(100.0,
                                     100.0 * (1 - consumed_wh / pack.pack_energy_wh)))
            out.append({
                **node.snapshot(self.sim_time),
                "last_seen": tracker.last_seen,
                "last_values": tracker.last_values,
                "battery_remaining": remaining,
                "fix_position": tracker.last_fix,
            })
        return out

    def summary(self) -> dict:
        reports = {}
        for device_id in sorted(self.nodes):
            node = self.nodes[device_id]
            profile = PROFILES[node.config.profile]
            own_frames = [f for f in self._frames if f.device_id == device_id]
            reports[device_id] = {
                # Per-transmitter duty cycle: the regulated quantity.
                "duty_cycle": duty_cycle(own_frames, self.config.duration_s,
                                         at=self.config.duration_s),
                "ledger": {
                    "cycles": node.ledger.cycles,
                    "charge_mas": node.ledger.charge_mas,
                    "energy_j": node.ledger.energy_j,
                    "gps_energy_j": node.ledger.gps_energy_j,
                },
                "energy_report": {
                    basis.value: energy_report(profile, BatteryPack(), basis).as_dict()
                    for basis in DischargeBasis
                },
            }
        return {
            "duration_s": self.config.duration_s,
            "seed": self.config.seed,
            "counters": dict(self.counters),
            "points_stored": self.pipeline.stored_points,
            "store_size": len(self.pipeline.store),
            # All transmitters together: the channel's TX airtime fraction.
            "duty_cycle": duty_cycle(self._frames, self.config.duration_s,
                                     at=self.config.duration_s),
            "nodes": reports,
        }

    def status(self) -> dict:
        wall = self.wall_elapsed
        if self.state == "running" and self.wall_started is not None:
            wall = time.monotonic() - self.wall_started
        return {
            "state": self.state,
            "sim_time": self.sim_time,
            "duration_s": self.config.duration_s,
            "progress": min(1.0, self.sim_time / self.config.duration_s),
            "speedup": self.config.speedup,
            "wall_s": wall,
        }

    def _export(self, summary: dict) -> None:
        lines = [json.dumps(entry, sort_keys=True) for entry in self.journal]
        (self.out_dir / "events.jsonl").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
        (self.out_dir / "summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


class RunHandle:
    """A scenario run plus the thread driving it (when backgrounded)."""

    def __init__(self, sim: Simulation):
        self.sim = sim
        self.stop_event = threading.Event()
        self._thread: threading.Thread | None = None

    def run_blocking(self) -> dict:
        return self.sim.run(self.stop_event)

    def start_background(self) -> "RunHandle":
        self._thread = threading.Thread(target=self.run_blocking, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.stop_event.set()

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()


def run_scenario(config: ScenarioConfig,
                 out_dir: str | Path | None = None) -> RunHandle:
    return RunHandle(Simulation(config, out_dir))
