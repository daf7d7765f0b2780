"""Declarative run configuration: fleet, gateways, water, clock, transport.

A scenario is a JSON document:

    {
      "seed": 42,                  // drives every random draw in the run
      "duration_s": 86400,         // simulated seconds (> 0), required
      "speedup": "max",            // or a number >= wall-clock multiplier
      "retention_days": 90,
      "nodes": [
        {"device_id": "buoy-01", "lat": 45.438, "lon": 12.330,
         "sampling_period_s": 600, "profile": "regulator",
         "calibration": {"ph": {"gain": 1.0, "offset": 0.0}},
         "gps": {"current_ma": 40, "error_deg": 5e-5, "alt_error_m": 1.0,
                  "fix_time": {"kind": "uniform", "lo": 30, "hi": 300}}}
      ],
      "gateways": [
        {"gateway_id": "gw-lido", "lat": 45.415, "lon": 12.375, "range_km": 15}
      ],
      "link": {"rx_delay_s": 1.0, "loss_probability": 0.0,
                "corruption_probability": 0.0},
      "environment": {"preset": "lagoon"}   // or explicit "series"/"noise" maps
    }

Explicit environment series use kinds "constant" {level}, "diurnal"
{mean, amplitude, period_s, phase_s}, and "random_walk" {start, step_sigma,
lo, hi, grid_s}.  Validation failures raise ConfigError naming the exact
field, e.g. "nodes[2].lat: out of range".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .environment import (
    Constant,
    Diurnal,
    EnvironmentModel,
    RandomWalk,
    Signal,
    default_lagoon,
)
from .link import Gateway, LinkError
from .node import Calibration, ConfigError, FixTimeModel, NodeConfig
from .pipeline import RetentionPolicy

SPEEDUP_MAX = "max"

DEFAULT_SCENARIO: dict = {
    "seed": 42,
    "duration_s": 3600.0,
    "speedup": SPEEDUP_MAX,
    "retention_days": 90,
    "nodes": [
        {"device_id": "buoy-01", "lat": 45.438, "lon": 12.330},
        {"device_id": "buoy-02", "lat": 45.350, "lon": 12.300},
        {"device_id": "buoy-03", "lat": 45.260, "lon": 12.290},
    ],
    "gateways": [
        {"gateway_id": "gw-lido", "lat": 45.415, "lon": 12.375, "range_km": 15.0},
        {"gateway_id": "gw-marghera", "lat": 45.470, "lon": 12.235, "range_km": 15.0},
        {"gateway_id": "gw-chioggia", "lat": 45.230, "lon": 12.270, "range_km": 15.0},
    ],
    "environment": {"preset": "lagoon"},
}


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _number(raw: dict, key: str, path: str, default=None, minimum=None,
            maximum=None, required=False):
    if key not in raw:
        if required:
            _fail(f"{path}{key}", "required")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path}{key}", f"expected a number, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(f"{path}{key}", f"must be >= {minimum}")
    if maximum is not None and value > maximum:
        _fail(f"{path}{key}", f"must be <= {maximum}")
    return float(value)


def _text(raw: dict, key: str, path: str, default=None, required=False):
    if key not in raw:
        if required:
            _fail(f"{path}{key}", "required")
        return default
    value = raw[key]
    if not isinstance(value, str) or not value:
        _fail(f"{path}{key}", "expected a non-empty string")
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    duration_s: float
    speedup: float | str
    nodes: tuple[NodeConfig, ...]
    gateways: tuple[Gateway, ...]
    retention: RetentionPolicy
    rx_delay_s: float = 1.0
    loss_probability: float = 0.0
    corruption_probability: float = 0.0
    environment_spec: dict = field(default_factory=lambda: {"preset": "lagoon"})
    raw: dict = field(default_factory=dict)

    @property
    def paced(self) -> bool:
        return self.speedup != SPEEDUP_MAX


def _parse_fix_time(raw: dict, path: str) -> FixTimeModel:
    kind = _text(raw, "kind", path, default="uniform")
    if kind not in ("uniform", "fixed", "never"):
        _fail(f"{path}kind", f"unknown fix-time kind {kind!r}")
    return FixTimeModel(
        kind=kind,
        lo=_number(raw, "lo", path, default=30.0, minimum=0.0),
        hi=_number(raw, "hi", path, default=300.0, minimum=0.0),
        value=_number(raw, "value", path, default=60.0, minimum=0.0),
    )


def _parse_node(raw: dict, path: str) -> NodeConfig:
    if not isinstance(raw, dict):
        _fail(path, "expected an object")
    calibration = {}
    for series, cal in (raw.get("calibration") or {}).items():
        cal_path = f"{path}calibration.{series}."
        try:
            calibration[series] = Calibration(
                gain=_number(cal, "gain", cal_path, default=1.0),
                offset=_number(cal, "offset", cal_path, default=0.0),
            )
        except ConfigError as exc:
            if str(exc).startswith(cal_path.rstrip(".")):
                raise
            _fail(f"{path}calibration.{series}", str(exc))
    gps = raw.get("gps") or {}
    try:
        return NodeConfig(
            device_id=_text(raw, "device_id", path, required=True),
            lat=_number(raw, "lat", path, required=True),
            lon=_number(raw, "lon", path, required=True),
            sampling_period_s=_number(raw, "sampling_period_s", path, default=600.0),
            profile=_text(raw, "profile", path, default="regulator"),
            calibration=calibration,
            gps_current_ma=_number(gps, "current_ma", f"{path}gps.",
                                   default=40.0, minimum=0.0),
            gps_error_deg=_number(gps, "error_deg", f"{path}gps.",
                                  default=5e-5, minimum=0.0),
            gps_alt_error_m=_number(gps, "alt_error_m", f"{path}gps.",
                                    default=1.0, minimum=0.0),
            fix_time=_parse_fix_time(gps.get("fix_time") or {},
                                     f"{path}gps.fix_time."),
        )
    except ConfigError as exc:
        if str(exc).startswith(path):
            raise
        _fail(path.rstrip("."), str(exc))


def _parse_gateway(raw: dict, path: str) -> Gateway:
    if not isinstance(raw, dict):
        _fail(path, "expected an object")
    try:
        return Gateway(
            gateway_id=_text(raw, "gateway_id", path, required=True),
            lat=_number(raw, "lat", path, required=True),
            lon=_number(raw, "lon", path, required=True),
            range_km=_number(raw, "range_km", path, default=15.0),
        )
    except LinkError as exc:
        _fail(path.rstrip("."), str(exc))


def parse_scenario(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        _fail("config", "expected a JSON object")
    duration = _number(raw, "duration_s", "", required=True)
    if duration <= 0:
        _fail("duration_s", "must be > 0")
    seed_f = _number(raw, "seed", "", default=0.0)
    if seed_f != int(seed_f) or seed_f < 0:
        _fail("seed", "must be a non-negative integer")
    speedup = raw.get("speedup", SPEEDUP_MAX)
    if speedup != SPEEDUP_MAX:
        if isinstance(speedup, bool) or not isinstance(speedup, (int, float)) \
                or speedup <= 0:
            _fail("speedup", 'must be a positive number or "max"')
        speedup = float(speedup)

    nodes_raw = raw.get("nodes")
    if not isinstance(nodes_raw, list) or not nodes_raw:
        _fail("nodes", "at least one node is required")
    nodes = tuple(
        _parse_node(n, f"nodes[{i}].") for i, n in enumerate(nodes_raw)
    )
    ids = [n.device_id for n in nodes]
    if len(set(ids)) != len(ids):
        _fail("nodes", "device_id values must be unique")

    gateways_raw = raw.get("gateways")
    if not isinstance(gateways_raw, list) or not gateways_raw:
        _fail("gateways", "at least one gateway is required")
    gateways = tuple(
        _parse_gateway(g, f"gateways[{i}].") for i, g in enumerate(gateways_raw)
    )
    gw_ids = [g.gateway_id for g in gateways]
    if len(set(gw_ids)) != len(gw_ids):
        _fail("gateways", "gateway_id values must be unique")

    retention_days = _number(raw, "retention_days", "", default=90.0)
    if retention_days <= 0:
        _fail("retention_days", "must be > 0")

    link = raw.get("link") or {}
    return ScenarioConfig(
        seed=int(seed_f),
        duration_s=duration,
        speedup=speedup,
        nodes=nodes,
        gateways=gateways,
        retention=RetentionPolicy(max_age_s=retention_days * 86400.0),
        rx_delay_s=_number(link, "rx_delay_s", "link.", default=1.0, minimum=0.0),
        loss_probability=_number(link, "loss_probability", "link.",
                                 default=0.0, minimum=0.0, maximum=1.0),
        corruption_probability=_number(link, "corruption_probability", "link.",
                                       default=0.0, minimum=0.0, maximum=1.0),
        environment_spec=raw.get("environment") or {"preset": "lagoon"},
        raw=raw,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from exc
    return parse_scenario(raw)


def default_scenario(**overrides) -> ScenarioConfig:
    merged = {**DEFAULT_SCENARIO, **overrides}
    return parse_scenario(merged)


_SIGNAL_KINDS = ("constant", "diurnal", "random_walk")


def _parse_signal(series: str, raw: dict, rng: np.random.Generator) -> Signal:
    path = f"environment.series.{series}."
    kind = _text(raw, "kind", path, required=True)
    if kind == "constant":
        return Constant(level=_number(raw, "level", path, required=True))
    if kind == "diurnal":
        return Diurnal(
            mean=_number(raw, "mean", path, required=True),
            amplitude=_number(raw, "amplitude", path, default=0.0),
            period=_number(raw, "period_s", path, default=86400.0, minimum=1.0),
            phase=_number(raw, "phase_s", path, default=0.0),
        )
    if kind == "random_walk":
        lo = _number(raw, "lo", path, required=True)
        hi = _number(raw, "hi", path, required=True)
        if lo > hi:
            _fail(f"{path}lo", "must not exceed hi")
        return RandomWalk(
            start=_number(raw, "start", path, required=True),
            step_sigma=_number(raw, "step_sigma", path, default=0.0, minimum=0.0),
            lo=lo, hi=hi,
            grid_s=_number(raw, "grid_s", path, default=60.0, minimum=1e-3),
            rng=rng,
        )
    _fail(f"{path}kind", f"expected one of {_SIGNAL_KINDS}")


def build_environment(config: ScenarioConfig) -> EnvironmentModel:
    spec = config.environment_spec
    preset = spec.get("preset")
    if preset not in (None, "lagoon"):
        _fail("environment.preset", f"unknown preset {preset!r}")
    env = default_lagoon(seed=config.seed)
    series_spec = spec.get("series") or {}
    if series_spec:
        children = np.random.SeedSequence(config.seed ^ 0x5E1F).spawn(len(series_spec))
        for child, series in zip(children, sorted(series_spec)):
            env.signals[series] = _parse_signal(
                series, series_spec[series], np.random.default_rng(child)
            )
    for series, sigma in (spec.get("noise") or {}).items():
        env.noise_sigma[series] = _number(
            {"sigma": sigma}, "sigma", f"environment.noise.{series}.", minimum=0.0
        )
    return env
