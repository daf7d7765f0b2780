"""HTTP control plane: scenario runner, queries, commands, live stream.

Endpoints (JSON unless noted):

    GET  /api/nodes                     fleet summaries
    GET  /api/telemetry                 ?device&series&from&to&agg&bucket
    POST /api/downlink                  {device_id, fport, payload_b64}
    GET  /api/downlink/queue            pending (undelivered) commands
    GET  /api/energy/report             ?profile=regulator|ideal&basis=capacity|energy
    POST /api/scenario                  scenario config document; (re)starts a run
    GET  /api/scenario/status           run state and progress
    GET  /api/stream                    server-sent events: journal entries
                                        (topic messages, phases, uplinks, ...)
    GET  /api/errors                    ?from&to error-topic history

One scenario runs at a time; posting a new one stops the current run first.
Reads only touch snapshots; every mutation goes through the downlink queue's
serialized channel or the run manager's lock.

Environment variables: SENSWICH_ADDR / SENSWICH_PORT (listen address for
`senswich serve`), SENSWICH_DATA_DIR (per-run export directories),
SENSWICH_FRONTEND_DIR (static console bundle served at /).
"""

from __future__ import annotations

import json
import os
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .energy import BatteryPack, DischargeBasis, PROFILES, energy_report
from .lpp import Base64Error, RangeError
from .node import ConfigError
from .pipeline import BadFilter, QueryError, UnknownDevice, UnknownSeries
from .scenario import parse_scenario
from .sim import RunHandle, Simulation

DEFAULT_ADDR = "127.0.0.1"
DEFAULT_PORT = 8000


class NoScenario(RuntimeError):
    """No scenario has been started yet."""


class RunManager:
    """Owns the single active run; serializes start/stop."""

    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self._lock = threading.Lock()
        self._handle: RunHandle | None = None
        self._run_count = 0

    @property
    def sim(self) -> Simulation:
        if self._handle is None:
            raise NoScenario("no scenario loaded; POST /api/scenario first")
        return self._handle.sim

    @property
    def maybe_sim(self) -> Simulation | None:
        return self._handle.sim if self._handle else None

    def start(self, raw_config: dict) -> dict:
        config = parse_scenario(raw_config)
        with self._lock:
            if self._handle is not None:
                self._handle.stop()
                self._handle.join(timeout=5.0)
            self._run_count += 1
            out_dir = (
                self.data_dir / f"run-{self._run_count:03d}"
                if self.data_dir else None
            )
            self._handle = RunHandle(Simulation(config, out_dir))
            self._handle.start_background()
            return self._handle.sim.status()

    def stop(self) -> None:
        with self._lock:
            if self._handle is not None:
                self._handle.stop()
                self._handle.join(timeout=5.0)


def create_app(data_dir: str | Path | None = None,
               frontend_dir: str | Path | None = None) -> FastAPI:
    manager = RunManager(data_dir)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        manager.stop()  # join any paced run still going

    app = FastAPI(title="senswich control service", lifespan=lifespan)
    app.state.manager = manager

    @app.exception_handler(NoScenario)
    async def _no_scenario(_req: Request, exc: NoScenario):
        return JSONResponse({"error": str(exc)}, status_code=409)

    @app.exception_handler(ConfigError)
    @app.exception_handler(Base64Error)
    @app.exception_handler(RangeError)
    @app.exception_handler(QueryError)
    @app.exception_handler(BadFilter)
    async def _bad_request(_req: Request, exc: Exception):
        return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(UnknownDevice)
    @app.exception_handler(UnknownSeries)
    async def _not_found(_req: Request, exc: Exception):
        return JSONResponse(
            {"error": f"{type(exc).__name__}: {exc}"}, status_code=404
        )

    @app.get("/api/nodes")
    def nodes():
        sim = manager.maybe_sim
        return sim.node_summaries() if sim else []

    @app.get("/api/telemetry")
    def telemetry(
        device: str,
        series: str,
        from_t: float = Query(default=0.0, alias="from"),
        to: float = Query(default=1e18),
        agg: str = "raw",
        bucket: float | None = None,
    ):
        points = manager.sim.pipeline.store.query(
            device, series, from_t, to, agg=agg, bucket_s=bucket
        )
        return {
            "device_id": device, "series": series, "agg": agg,
            "points": [[t, v] for t, v in points],
        }

    @app.post("/api/downlink")
    async def downlink(request: Request):
        try:
            data = await request.json()
        except json.JSONDecodeError as exc:
            raise ConfigError(f"downlink body is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("downlink body must be a JSON object")
        device_id = data.get("device_id")
        fport = data.get("fport", 1)
        payload_b64 = data.get("payload_b64")
        if (
            not isinstance(device_id, str)
            or not isinstance(payload_b64, str)
            or isinstance(fport, bool)
            or not isinstance(fport, int)
        ):
            raise ConfigError(
                "downlink body needs device_id (str), payload_b64 (str), "
                "and optionally fport (int)"
            )
        cmd = manager.sim.enqueue_downlink(device_id, fport, payload_b64)
        return {"queued": True, **cmd.as_dict()}

    @app.get("/api/downlink/queue")
    def downlink_queue():
        return [cmd.as_dict() for cmd in manager.sim.link.queue.pending()]

    @app.get("/api/energy/report")
    def energy(profile: str = "regulator", basis: str = "capacity"):
        if profile not in PROFILES:
            raise ConfigError(f"profile: unknown profile {profile!r}")
        try:
            chosen = DischargeBasis(basis)
        except ValueError:
            raise ConfigError(f"basis: unknown basis {basis!r}") from None
        return energy_report(PROFILES[profile], BatteryPack(), chosen).as_dict()

    @app.post("/api/scenario")
    async def scenario(request: Request):
        try:
            raw = await request.json()
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
        return manager.start(raw)

    @app.get("/api/scenario/status")
    def status():
        sim = manager.maybe_sim
        return sim.status() if sim else {"state": "idle"}

    @app.get("/api/errors")
    def errors(
        from_t: float = Query(default=0.0, alias="from"),
        to: float = Query(default=1e18),
    ):
        sim = manager.maybe_sim
        if sim is None:
            return []
        return [
            msg.as_dict() for msg in list(sim.pipeline.errors)
            if from_t <= msg.time <= to
        ]

    @app.get("/api/stream")
    def stream(max_events: int | None = None):
        sim = manager.sim
        tap = sim.tap()

        def gen():
            sent = 0
            idle_polls = 0
            try:
                while True:
                    entries = tap.drain()
                    for entry in entries:
                        yield f"data: {json.dumps(entry, sort_keys=True)}\n\n"
                        sent += 1
                        if max_events is not None and sent >= max_events:
                            return
                    if entries:
                        idle_polls = 0
                    else:
                        idle_polls += 1
                        if sim.state in ("done", "stopped"):
                            return
                        if idle_polls % 50 == 0:
                            yield ": keepalive\n\n"
                    time.sleep(0.1)
            finally:
                sim.untap(tap)

        return StreamingResponse(gen(), media_type="text/event-stream")

    frontend = frontend_dir or os.environ.get("SENSWICH_FRONTEND_DIR")
    if frontend is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        frontend = candidate if candidate.is_dir() else None
    if frontend and Path(frontend).is_dir():
        app.mount("/", StaticFiles(directory=frontend, html=True), name="console")

    return app


def serve(addr: str | None = None, port: int | None = None,
          data_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(
        data_dir=data_dir or os.environ.get("SENSWICH_DATA_DIR"),
    )
    uvicorn.run(
        app,
        host=addr or os.environ.get("SENSWICH_ADDR", DEFAULT_ADDR),
        port=int(port or os.environ.get("SENSWICH_PORT", DEFAULT_PORT)),
        log_level="warning",
    )
