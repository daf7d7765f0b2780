"""Energy model tests against bench-measured phase tables and endurance figures."""

import dataclasses

import pytest

from senswich.energy import (
    BatteryPack,
    DischargeBasis,
    IDEAL_PROFILE,
    Phase,
    PhasePower,
    PowerProfile,
    PROFILES,
    REGULATOR_PROFILE,
    ZeroConsumption,
    energy_report,
    phase_energy,
)

# Frozen bench figures: per-phase energy in joules for each profile.
REGULATOR_ENERGY_J = (12.37, 2.55, 1.69, 11.22, 2.21, 1.52, 4.19, 1.47, 0.71, 51.06)
IDEAL_ENERGY_J = (5.208, 1.39, 1.02, 4.28, 1.13, 0.89, 1.78, 0.75, 0.39, 18.68)


def within(value, expected, rel):
    return abs(value - expected) <= abs(expected) * rel


@pytest.mark.parametrize(
    "profile,expected",
    [(REGULATOR_PROFILE, REGULATOR_ENERGY_J), (IDEAL_PROFILE, IDEAL_ENERGY_J)],
    ids=["regulator", "ideal"],
)
def test_per_phase_energy_matches_bench(profile, expected):
    for row, energy_j in zip(profile.phases, expected):
        got = phase_energy(row.duration_s, row.current_ma, profile.supply_voltage)
        assert got == pytest.approx(energy_j, abs=0.01), row.phase


def test_phase_energy_basics():
    assert phase_energy(0, 100, 8.5) == 0.0
    assert phase_energy(80, 18.2, 8.5) == pytest.approx(12.37, abs=0.01)
    assert phase_energy(382.64, 9.3, 5.25) == pytest.approx(18.68, abs=0.01)
    with pytest.raises(ValueError):
        phase_energy(-1, 10, 5)


def test_cycle_timing_exact():
    for profile in PROFILES.values():
        assert profile.period_s == 600.0
        bounds = profile.boundaries_s()
        assert bounds[0] == 0.0 and bounds[-1] == 600.0
        # LoRa TX is the 9th phase: starts at 215.36 s, ends at 217.36 s
        assert bounds[8] == 215.36
        assert bounds[9] == 217.36
        assert profile.standby.duration_s == 382.64


def test_profile_tables_pinned():
    reg = [(p.duration_s, p.current_ma) for p in REGULATOR_PROFILE.phases]
    assert reg == [
        (80.0, 18.2), (10.0, 30.0), (5.12, 39.0), (80.0, 16.5), (10.0, 26.1),
        (5.12, 35.0), (20.0, 24.7), (5.12, 33.9), (2.0, 41.8), (382.64, 15.7),
    ]
    assert REGULATOR_PROFILE.supply_voltage == 8.5
    ideal = [p.current_ma for p in IDEAL_PROFILE.phases]
    assert ideal == [12.4, 26.5, 38.2, 10.2, 21.7, 33.2, 17.0, 28.0, 38.0, 9.3]
    assert IDEAL_PROFILE.supply_voltage == 5.25
    assert [p.duration_cs for p in IDEAL_PROFILE.phases] == [
        p.duration_cs for p in REGULATOR_PROFILE.phases
    ]


def test_battery_pack_totals():
    pack = BatteryPack()
    assert pack.pack_capacity_mah == 12800.0
    assert pack.pack_energy_wh == 92.0


def test_regulator_report_capacity_basis():
    rpt = energy_report(REGULATOR_PROFILE, BatteryPack(), DischargeBasis.CAPACITY)
    assert within(rpt.idle_power_mw, 133.45, 0.005)
    assert within(rpt.energy_per_sample_mwh, 24.73, 0.005)
    assert within(rpt.avg_current_ma, 17.45, 0.005)
    assert within(rpt.avg_power_mw, 148.38, 0.005)
    assert within(rpt.discharge_h, 733.20, 0.005)
    assert within(rpt.discharge_days, 30.55, 0.005)
    assert rpt.discharge_days == rpt.discharge_h / 24


def test_ideal_report_energy_basis():
    rpt = energy_report(IDEAL_PROFILE, BatteryPack(), DischargeBasis.ENERGY)
    assert within(rpt.idle_power_mw, 48.82, 0.005)
    assert within(rpt.energy_per_sample_mwh, 9.87, 0.005)
    assert within(rpt.avg_current_ma, 11.28, 0.005)
    assert within(rpt.avg_power_mw, 59.267, 0.005)
    assert within(rpt.discharge_h, 1552.27, 0.005)
    assert within(rpt.discharge_days, 64.67, 0.005)


def test_regulator_energy_basis_differs_from_capacity():
    cap = energy_report(REGULATOR_PROFILE, basis=DischargeBasis.CAPACITY)
    ene = energy_report(REGULATOR_PROFILE, basis=DischargeBasis.ENERGY)
    assert within(ene.discharge_h, 620.0, 0.005)
    assert cap.discharge_h != ene.discharge_h
    assert cap.avg_current_ma == ene.avg_current_ma


def test_single_phase_definition():
    profile = PowerProfile(
        "flat", 5.0, (PhasePower(Phase.STANDBY, 60000, 12800.0),)
    )
    rpt = energy_report(profile, BatteryPack(), DischargeBasis.CAPACITY)
    assert rpt.discharge_h == pytest.approx(1.0)


def test_zero_consumption_rejected():
    profile = PowerProfile("off", 5.0, (PhasePower(Phase.STANDBY, 60000, 0.0),))
    with pytest.raises(ZeroConsumption):
        energy_report(profile)


@pytest.mark.parametrize("index", range(10))
@pytest.mark.parametrize("basis", list(DischargeBasis))
def test_discharge_monotone_in_each_phase_current(index, basis):
    base = energy_report(REGULATOR_PROFILE, basis=basis).discharge_h
    bumped_rows = list(REGULATOR_PROFILE.phases)
    bumped_rows[index] = dataclasses.replace(
        bumped_rows[index], current_ma=bumped_rows[index].current_ma + 1.0
    )
    bumped = dataclasses.replace(REGULATOR_PROFILE, phases=tuple(bumped_rows))
    assert energy_report(bumped, basis=basis).discharge_h < base
