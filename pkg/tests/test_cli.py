"""CLI tests: each subcommand's exit codes, output shape, and determinism."""

import base64
import json

import pytest

from senswich.cli import main
from senswich.energy import BatteryPack, DischargeBasis, PROFILES, energy_report
from senswich.lpp import SampleSet, encode_sampleset


def write_config(tmp_path, **overrides):
    doc = {
        "seed": 5,
        "duration_s": 3600,
        "speedup": "max",
        "nodes": [{"device_id": "buoy-01", "lat": 45.44, "lon": 12.33}],
        "gateways": [{"gateway_id": "gw-1", "lat": 45.43, "lon": 12.34}],
    }
    doc.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# ----------------------------------------------------------------------- run


def test_run_prints_summary_and_exports(tmp_path, capsys):
    config = write_config(tmp_path)
    out_dir = tmp_path / "out"
    assert main(["run", "--config", str(config), "--out", str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert "run complete: 3600 s simulated, seed 5" in out
    assert "uplinks 6 delivered / 0 dropped" in out
    assert "points stored 36" in out
    assert (out_dir / "points.csv").is_file()
    assert (out_dir / "events.jsonl").is_file()
    assert (out_dir / "summary.json").is_file()


def test_run_seed_override_is_deterministic(tmp_path, capsys):
    config = write_config(tmp_path)
    dirs = [tmp_path / "a", tmp_path / "b"]
    for out_dir in dirs:
        assert main(["run", "--config", str(config), "--seed", "9",
                     "--out", str(out_dir)]) == 0
    capsys.readouterr()
    first, second = (d.joinpath("points.csv").read_bytes() for d in dirs)
    assert first == second and first


def test_run_without_config_uses_builtin_scenario(capsys):
    assert main(["run", "--speed", "max"]) == 0
    out = capsys.readouterr().out
    assert "run complete" in out
    assert "seed 42" in out


def test_run_rejects_missing_config(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["run", "--config", str(missing)]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_rejects_bad_speed(tmp_path, capsys):
    config = write_config(tmp_path)
    assert main(["run", "--config", str(config), "--speed", "fast"]) == 2
    assert "speed" in capsys.readouterr().err


def test_run_rejects_invalid_config_field(tmp_path, capsys):
    config = write_config(tmp_path, duration_s=0)
    assert main(["run", "--config", str(config)]) == 2
    assert "duration_s" in capsys.readouterr().err


# --------------------------------------------------------------- energy-report


def test_energy_report_prints_all_combinations(capsys):
    assert main(["energy-report"]) == 0
    out = capsys.readouterr().out
    assert out.count("profile=") == 4
    for name in PROFILES:
        for basis in DischargeBasis:
            assert f"profile={name} basis={basis.value}" in out


def test_energy_report_single_combination(capsys):
    assert main(["energy-report", "--profile", "regulator",
                 "--basis", "capacity"]) == 0
    out = capsys.readouterr().out
    assert out.count("profile=") == 1
    report = energy_report(
        PROFILES["regulator"], BatteryPack(), DischargeBasis.CAPACITY
    )
    assert f"{report.discharge_h:.2f} h" in out
    assert f"{report.idle_power_mw:.2f} mW" in out


# -------------------------------------------------------------------- decode


def test_decode_prints_cleartext(capsys):
    payload = encode_sampleset(SampleSet(
        ph=7.5, ec=42.0, turbidity=150.0, do_mgl=8.25,
        liquid_level=True, temperature_c=21.4,
    ))
    b64 = base64.b64encode(payload).decode()
    assert main(["decode", "--payload", b64]) == 0
    out = capsys.readouterr().out
    assert "ph=7.5" in out
    assert "temperature=21.4" in out
    assert "liquid_level=1" in out
    assert len(out.strip().splitlines()) == 6


def test_decode_gps_payload(capsys):
    payload = encode_sampleset(
        SampleSet(ph=7.5, ec=42.0, turbidity=150.0, do_mgl=8.25,
                  liquid_level=True, temperature_c=21.4,
                  gps=(45.4408, 12.3155, 0.0)),
    )
    b64 = base64.b64encode(payload).decode()
    assert main(["decode", "--payload", b64]) == 0
    out = capsys.readouterr().out
    assert "gps_lat=45.4408" in out
    assert len(out.strip().splitlines()) == 7


@pytest.mark.parametrize("bad", ["@@@", "AAE=", base64.b64encode(b"\x01\x67\x01").decode()])
def test_decode_rejects_bad_payloads(bad, capsys):
    assert main(["decode", "--payload", bad]) == 2
    assert "error:" in capsys.readouterr().err


# -------------------------------------------------------------------- export


@pytest.fixture()
def run_dir(tmp_path, capsys):
    config = write_config(tmp_path, duration_s=1800)
    out_dir = tmp_path / "run"
    assert main(["run", "--config", str(config), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    return out_dir


def test_export_csv(run_dir, capsys):
    assert main(["export", "--run", str(run_dir), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "time,device_id,series,value"
    assert len(lines) == 1 + 18  # 3 cycles x 6 series
    assert lines[1].split(",")[1] == "buoy-01"


def test_export_jsonl(run_dir, capsys):
    assert main(["export", "--run", str(run_dir), "--format", "jsonl"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 18
    first = json.loads(lines[0])
    assert set(first) == {"time", "device_id", "series", "value"}
    assert first["device_id"] == "buoy-01"


def test_export_missing_run_dir(tmp_path, capsys):
    assert main(["export", "--run", str(tmp_path / "ghost")]) == 2
    assert "points.csv" in capsys.readouterr().err
