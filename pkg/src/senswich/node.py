"""Duty-cycled buoy firmware: acquisition cycle, GPS-on-demand, energy ledger.

Every `sampling_period_s` (default 600 s) the node wakes and walks the fixed
phase sequence of its power profile.  Three latching relays gate sensor power;
each cycle performs exactly six relay transitions:

    t0          K1 -> set     pH probe + conditioning powered
    t0+80       K2 -> set     pH routed to ADC, turbidity powered
    t0+95.12    K1 -> reset   pH group off; DO probe powered
    t0+175.12   K2 -> reset   DO routed to ADC, liquid-level powered
    t0+190.24   K3 -> set     EC probe powered
    t0+215.36   K3 -> reset   all rails off; radio transmits, then standby

Reads happen in the three 5.12 s ADC windows (256-sample averages): window A
reads pH and turbidity, window B reads DO and liquid level, window C reads EC
and water temperature.  The unused input J6 is never scheduled.

GPS stays off unless an operator downlink requests a fix: the receiver then
searches up to 300 s, posts the fix for the next cycle's payload (channel 7),
or gives up with a no-fix event.  GPS draw is ledgered separately from the
cycle ledger, which accrues exactly per-cycle-constant charge and energy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import Phase, PhasePower, PowerProfile, PROFILES, phase_energy
from .lpp import Command, CommandKind, SampleSet

GPS_SEARCH_LIMIT_S = 300.0
READ_WINDOW_S = 5.12
ADC_SAMPLES = 256

# Relay transitions applied at the start of the named phase.
_RELAY_PLAN: dict[Phase, tuple[tuple[str, bool], ...]] = {
    Phase.PH_STABILIZE: (("K1", True),),
    Phase.PH_PLUS_TB: (("K2", True),),
    Phase.DO_STABILIZE: (("K1", False),),
    Phase.DO_PLUS_LV: (("K2", False),),
    Phase.EC_STABILIZE: (("K3", True),),
    Phase.LORA_TX: (("K3", False),),
}

# Series read in each ADC window, keyed by the window's phase.
_READ_PLAN: dict[Phase, tuple[str, ...]] = {
    Phase.ANALOG_READ_A: ("ph", "turbidity"),
    Phase.ANALOG_READ_B: ("do", "liquid_level"),
    Phase.ANALOG_READ_C: ("ec", "temperature"),
}


class ConfigError(ValueError):
    """A node or scenario parameter is out of its valid range."""


@dataclass(frozen=True)
class Calibration:
    """Affine correction applied to a raw reading: gain*raw + offset."""

    gain: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.gain == 0:
            raise ConfigError("calibration gain must be nonzero")

    def apply(self, raw: float) -> float:
        return self.gain * raw + self.offset


@dataclass(frozen=True)
class FixTimeModel:
    """Distribution of GPS time-to-fix, drawn once per activation.

    kind "uniform": seconds in [lo, hi); "fixed": always `value`;
    "never": the receiver cannot fix (forces the 300 s give-up path).
    """

    kind: str = "uniform"
    lo: float = 30.0
    hi: float = 300.0
    value: float = 60.0

    def draw(self, rng: np.random.Generator) -> float | None:
        if self.kind == "uniform":
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == "fixed":
            return self.value
        if self.kind == "never":
            return None
        raise ConfigError(f"unknown fix-time model {self.kind!r}")


class GpsMode(enum.Enum):
    OFF = "off"
    SEARCHING = "searching"
    FIX_PENDING = "fix_pending"


@dataclass
class GpsState:
    mode: GpsMode = GpsMode.OFF
    started_at: float | None = None
    time_to_fix: float | None = None  # None while searching means never fixes
    fix: tuple[float, float, float] | None = None

    @property
    def resolve_at(self) -> float | None:
        """Absolute time at which the current search fixes or gives up."""
        if self.mode is not GpsMode.SEARCHING:
            return None
        wait = GPS_SEARCH_LIMIT_S
        if self.time_to_fix is not None:
            wait = min(self.time_to_fix, wait)
        return self.started_at + wait


@dataclass(frozen=True)
class RelayOp:
    relay: str
    closed: bool  # True = set position, False = reset position
    at_s: float


@dataclass(frozen=True)
class PhaseEvent:
    phase: Phase
    start_s: float
    end_s: float
    relay_ops: tuple[RelayOp, ...] = ()


@dataclass(frozen=True)
class NodeEvent:
    t: float
    kind: str  # gps_search_started | gps_fix | gps_nofix | downlink_ignored | unknown_command
    device_id: str
    detail: str = ""


@dataclass
class EnergyLedger:
    """Exact per-cycle accounting: totals are cycle counts times constants."""

    cycle_charge_mas: float
    cycle_energy_j: float
    cycles: int = 0
    gps_charge_mas: float = 0.0
    gps_energy_j: float = 0.0

    @property
    def charge_mas(self) -> float:
        return self.cycles * self.cycle_charge_mas + self.gps_charge_mas

    @property
    def energy_j(self) -> float:
        return self.cycles * self.cycle_energy_j + self.gps_energy_j


@dataclass(frozen=True)
class NodeConfig:
    device_id: str
    lat: float
    lon: float
    sampling_period_s: float = 600.0
    profile: str = "regulator"
    calibration: dict[str, Calibration] = field(default_factory=dict)
    gps_current_ma: float = 40.0
    gps_error_deg: float = 5e-5
    gps_alt_error_m: float = 1.0
    fix_time: FixTimeModel = field(default_factory=FixTimeModel)

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown power profile {self.profile!r}")
        if not -90 <= self.lat <= 90 or not -180 <= self.lon <= 180:
            raise ConfigError(f"position out of range for {self.device_id!r}")
        busy_cs = sum(p.duration_cs for p in PROFILES[self.profile].phases
                      if p.phase is not Phase.STANDBY)
        if round(self.sampling_period_s * 100) <= busy_cs:
            raise ConfigError(
                f"sampling_period_s must exceed the {busy_cs / 100} s active window"
            )


class Node:
    """One virtual buoy: firmware state machine plus its energy ledger."""

    def __init__(self, config: NodeConfig, env, seed_seq: np.random.SeedSequence):
        self.config = config
        self.env = env
        noise_seq, gps_seq = seed_seq.spawn(2)
        self._rng_noise = np.random.default_rng(noise_seq)
        self._rng_gps = np.random.default_rng(gps_seq)
        self.gps = GpsState()
        self.relay_states = {"K1": False, "K2": False, "K3": False}
        self.events: list[NodeEvent] = []
        self.last_wake: float | None = None
        self.schedule = self._build_schedule(config)
        self.ledger = EnergyLedger(
            cycle_charge_mas=sum(p.duration_s * p.current_ma for p in self.schedule),
            cycle_energy_j=sum(
                phase_energy(p.duration_s, p.current_ma, self.profile.supply_voltage)
                for p in self.schedule
            ),
        )

    @property
    def profile(self) -> PowerProfile:
        return PROFILES[self.config.profile]

    @property
    def device_id(self) -> str:
        return self.config.device_id

    @property
    def position(self) -> tuple[float, float]:
        return (self.config.lat, self.config.lon)

    @staticmethod
    def _build_schedule(config: NodeConfig) -> tuple[PhasePower, ...]:
        """The profile's phase table with standby stretched to the period."""
        rows = PROFILES[config.profile].phases
        period_cs = round(config.sampling_period_s * 100)
        busy_cs = sum(p.duration_cs for p in rows if p.phase is not Phase.STANDBY)
        return tuple(
            replace(p, duration_cs=period_cs - busy_cs)
            if p.phase is Phase.STANDBY else p
            for p in rows
        )

    # --- acquisition cycle -------------------------------------------------

    def run_cycle(self, t0: float) -> tuple[SampleSet, list[PhaseEvent]]:
        """Execute one full wake-measure-transmit-standby cycle starting at t0."""
        self.last_wake = t0
        events: list[PhaseEvent] = []
        readings: dict[str, float] = {}
        cum_cs = 0
        for row in self.schedule:
            start = t0 + cum_cs / 100
            cum_cs += row.duration_cs
            end = t0 + cum_cs / 100
            ops = tuple(
                RelayOp(relay, closed, start)
                for relay, closed in _RELAY_PLAN.get(row.phase, ())
            )
            for op in ops:
                self.relay_states[op.relay] = op.closed
            events.append(PhaseEvent(row.phase, start, end, ops))
            for series in _READ_PLAN.get(row.phase, ()):
                readings[series] = self.read_sensor(series, start)

        sample = SampleSet(
            ph=readings["ph"],
            ec=readings["ec"],
            turbidity=readings["turbidity"],
            do_mgl=readings["do"],
            liquid_level=readings["liquid_level"] > 0.5,
            temperature_c=readings["temperature"],
            gps=self._consume_fix(),
        )
        self.ledger.cycles += 1
        return sample, events

    def read_sensor(self, series: str, window_start: float,
                    window_len: float = READ_WINDOW_S) -> float:
        """Average of 256 equally spaced noisy samples, then calibration."""
        dt = window_len / ADC_SAMPLES
        ts = window_start + (np.arange(ADC_SAMPLES) + 0.5) * dt
        truth = self.env.truth_values(series, ts)
        noise = self._rng_noise.normal(0.0, self.env.sigma(series), ADC_SAMPLES)
        raw = float(np.mean(truth + noise))
        cal = self.config.calibration.get(series, _IDENTITY)
        return cal.apply(raw)

    def _consume_fix(self) -> tuple[float, float, float] | None:
        if self.gps.mode is not GpsMode.FIX_PENDING:
            return None
        fix = self.gps.fix
        self.gps = GpsState()
        return fix

    def current_phase(self, t: float) -> Phase | None:
        """Phase occupied at simulation time t, or None while idle/unstarted."""
        if self.last_wake is None or t < self.last_wake:
            return None
        offset_cs = round((t - self.last_wake) * 100)
        cum = 0
        for row in self.schedule:
            cum += row.duration_cs
            if offset_cs < cum:
                return row.phase
        return None

    # --- downlink handling and GPS -----------------------------------------

    def handle_downlink(self, cmd: Command, t: float) -> None:
        if cmd.kind is not CommandKind.ACTIVATE_GPS:
            self.events.append(NodeEvent(t, "unknown_command", self.device_id, cmd.text))
            return
        if self.gps.mode is not GpsMode.OFF:
            # already searching or holding a fix: the request is satisfied
            self.events.append(NodeEvent(t, "downlink_ignored", self.device_id,
                                         self.gps.mode.value))
            return
        self.gps = GpsState(
            mode=GpsMode.SEARCHING,
            started_at=t,
            time_to_fix=self.config.fix_time.draw(self._rng_gps),
        )
        self.events.append(NodeEvent(t, "gps_search_started", self.device_id))

    def step_gps(self, t: float) -> None:
        """Resolve a running GPS search once its fix or give-up time passes."""
        if self.gps.mode is not GpsMode.SEARCHING:
            return
        elapsed = t - self.gps.started_at
        ttf = self.gps.time_to_fix
        if ttf is not None and elapsed >= ttf:
            self._charge_gps(ttf)
            lat, lon = self.position
            self.gps = GpsState(
                mode=GpsMode.FIX_PENDING,
                fix=(
                    lat + self._rng_gps.normal(0.0, self.config.gps_error_deg),
                    lon + self._rng_gps.normal(0.0, self.config.gps_error_deg),
                    self._rng_gps.normal(0.0, self.config.gps_alt_error_m),
                ),
            )
            self.events.append(NodeEvent(t, "gps_fix", self.device_id))
        elif elapsed >= GPS_SEARCH_LIMIT_S:
            self._charge_gps(GPS_SEARCH_LIMIT_S)
            self.gps = GpsState()
            self.events.append(NodeEvent(t, "gps_nofix", self.device_id))

    def _charge_gps(self, search_s: float) -> None:
        self.ledger.gps_charge_mas += search_s * self.config.gps_current_ma
        self.ledger.gps_energy_j += phase_energy(
            search_s, self.config.gps_current_ma, self.profile.supply_voltage
        )

    # --- inspection ----------------------------------------------------------

    def snapshot(self, t: float | None = None) -> dict:
        lat, lon = self.position
        return {
            "device_id": self.device_id,
            "lat": lat,
            "lon": lon,
            "profile": self.config.profile,
            "sampling_period_s": self.config.sampling_period_s,
            "phase": (p.value if (p := self.current_phase(t)) else "idle")
            if t is not None else "idle",
            "gps_mode": self.gps.mode.value,
            "cycles": self.ledger.cycles,
            "charge_mas": self.ledger.charge_mas,
            "energy_j": self.ledger.energy_j,
            "gps_energy_j": self.ledger.gps_energy_j,
        }


_IDENTITY = Calibration()
