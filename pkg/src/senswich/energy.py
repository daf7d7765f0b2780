"""Per-phase power model and battery endurance estimates for the buoy node.

Each acquisition cycle walks a fixed sequence of phases; for every phase we
know the bench-measured supply current under two power-delivery variants:

    phase            duration   regulator @ 8.5 V   ideal @ 5.25 V
    ph_stabilize      80.00 s         18.2 mA            12.4 mA
    ph_plus_tb        10.00 s         30.0 mA            26.5 mA
    analog_read_a      5.12 s         39.0 mA            38.2 mA
    do_stabilize      80.00 s         16.5 mA            10.2 mA
    do_plus_lv        10.00 s         26.1 mA            21.7 mA
    analog_read_b      5.12 s         35.0 mA            33.2 mA
    ec_stabilize      20.00 s         24.7 mA            17.0 mA
    analog_read_c      5.12 s         33.9 mA            28.0 mA
    lora_tx            2.00 s         41.8 mA            38.0 mA
    standby          382.64 s         15.7 mA             9.3 mA

The "regulator" variant is the deployed hardware (step-down regulator fed by
the battery pack); "ideal" assumes a lossless converter down to 5.25 V.
Durations are stored in integer centiseconds so cumulative phase boundaries
and the 600.00 s cycle length stay exact.

Endurance can be computed on two bases that bracket real behavior:
capacity (pack mAh / average mA) and energy (pack mWh / average mW).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

J_PER_MWH = 3.6  # 1 mWh = 3.6 J


class Phase(enum.Enum):
    PH_STABILIZE = "ph_stabilize"
    PH_PLUS_TB = "ph_plus_tb"
    ANALOG_READ_A = "analog_read_a"
    DO_STABILIZE = "do_stabilize"
    DO_PLUS_LV = "do_plus_lv"
    ANALOG_READ_B = "analog_read_b"
    EC_STABILIZE = "ec_stabilize"
    ANALOG_READ_C = "analog_read_c"
    LORA_TX = "lora_tx"
    STANDBY = "standby"


@dataclass(frozen=True)
class PhasePower:
    """One row of a profile: how long the phase runs and what it draws."""

    phase: Phase
    duration_cs: int  # centiseconds, so boundaries add up without drift
    current_ma: float

    @property
    def duration_s(self) -> float:
        return self.duration_cs / 100


@dataclass(frozen=True)
class PowerProfile:
    """A complete cycle's phase table under one power-delivery variant."""

    name: str
    supply_voltage: float
    phases: tuple[PhasePower, ...]

    @property
    def period_cs(self) -> int:
        return sum(p.duration_cs for p in self.phases)

    @property
    def period_s(self) -> float:
        return self.period_cs / 100

    @property
    def standby(self) -> PhasePower:
        return next(p for p in self.phases if p.phase is Phase.STANDBY)

    def boundaries_s(self) -> list[float]:
        """Cumulative phase start offsets plus the final end, in seconds."""
        out, cum = [0.0], 0
        for p in self.phases:
            cum += p.duration_cs
            out.append(cum / 100)
        return out

    def cycle_energy_j(self) -> float:
        return sum(
            phase_energy(p.duration_s, p.current_ma, self.supply_voltage)
            for p in self.phases
        )

    def cycle_charge_mas(self) -> float:
        """Charge drawn per cycle, in mA·s."""
        return sum(p.duration_s * p.current_ma for p in self.phases)


_DURATIONS_CS = (8000, 1000, 512, 8000, 1000, 512, 2000, 512, 200, 38264)


def _profile(name: str, supply: float, currents: tuple[float, ...]) -> PowerProfile:
    return PowerProfile(
        name=name,
        supply_voltage=supply,
        phases=tuple(
            PhasePower(phase, dur, cur)
            for phase, dur, cur in zip(Phase, _DURATIONS_CS, currents)
        ),
    )


REGULATOR_PROFILE = _profile(
    "regulator", 8.5,
    (18.2, 30.0, 39.0, 16.5, 26.1, 35.0, 24.7, 33.9, 41.8, 15.7),
)

IDEAL_PROFILE = _profile(
    "ideal", 5.25,
    (12.4, 26.5, 38.2, 10.2, 21.7, 33.2, 17.0, 28.0, 38.0, 9.3),
)

PROFILES = {p.name: p for p in (REGULATOR_PROFILE, IDEAL_PROFILE)}


@dataclass(frozen=True)
class BatteryPack:
    """Li-ion pack: `series` cells in series, `parallel` strings in parallel."""

    cell_capacity_mah: float = 3200.0
    cell_energy_wh: float = 11.5
    nominal_cell_voltage: float = 3.7
    series: int = 2
    parallel: int = 4

    @property
    def pack_capacity_mah(self) -> float:
        return self.parallel * self.cell_capacity_mah

    @property
    def pack_energy_wh(self) -> float:
        return self.series * self.parallel * self.cell_energy_wh


class DischargeBasis(enum.Enum):
    CAPACITY = "capacity"  # pack mAh / average mA
    ENERGY = "energy"      # pack mWh / average mW


class ZeroConsumption(ValueError):
    """The profile draws no current, so discharge time is undefined."""


def phase_energy(duration_s: float, current_ma: float, supply_v: float) -> float:
    """Energy in joules drawn by one phase: t[s] x I[mA] x V[V] / 1000."""
    if duration_s < 0 or current_ma < 0 or supply_v < 0:
        raise ValueError("duration, current and supply must be >= 0")
    return duration_s * current_ma * supply_v / 1000


@dataclass(frozen=True)
class EnergyReport:
    profile: str
    basis: DischargeBasis
    idle_power_mw: float
    energy_per_sample_mwh: float
    avg_current_ma: float
    avg_power_mw: float
    discharge_h: float
    discharge_days: float

    def as_dict(self) -> dict:
        return {
            "profile": self.profile,
            "basis": self.basis.value,
            "idle_power_mw": self.idle_power_mw,
            "energy_per_sample_mwh": self.energy_per_sample_mwh,
            "avg_current_ma": self.avg_current_ma,
            "avg_power_mw": self.avg_power_mw,
            "discharge_h": self.discharge_h,
            "discharge_days": self.discharge_days,
        }


def energy_report(
    profile: PowerProfile,
    pack: BatteryPack | None = None,
    basis: DischargeBasis = DischargeBasis.CAPACITY,
) -> EnergyReport:
    """Cycle-average consumption and pack endurance for one profile."""
    pack = pack or BatteryPack()
    period_s = profile.period_s
    avg_current = profile.cycle_charge_mas() / period_s
    if avg_current == 0:
        raise ZeroConsumption(f"profile {profile.name!r} draws no current")
    avg_power = avg_current * profile.supply_voltage
    idle_power = profile.standby.current_ma * profile.supply_voltage
    sample_mwh = profile.cycle_energy_j() / J_PER_MWH
    if basis is DischargeBasis.CAPACITY:
        discharge_h = pack.pack_capacity_mah / avg_current
    else:
        discharge_h = pack.pack_energy_wh * 1000 / avg_power
    return EnergyReport(
        profile=profile.name,
        basis=basis,
        idle_power_mw=idle_power,
        energy_per_sample_mwh=sample_mwh,
        avg_current_ma=avg_current,
        avg_power_mw=avg_power,
        discharge_h=discharge_h,
        discharge_days=discharge_h / 24,
    )
