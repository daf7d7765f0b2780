"""Command-line front end.

Subcommands:

    run            execute a scenario to completion and print a run summary
    energy-report  print steady-state consumption/discharge figures
    decode         print the cleartext records inside a base64 uplink payload
    export         re-emit a run's stored points as CSV or JSON lines
    serve          start the HTTP control service

Domain errors (bad config, malformed payloads, missing run data) exit with
status 2 after printing a one-line message to stderr; argparse keeps its
usual behavior for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .energy import BatteryPack, DischargeBasis, PROFILES, energy_report
from .lpp import (
    Base64Error,
    MalformedPayload,
    RangeError,
    UnmappedChannel,
    decode_base64,
    decode_payload,
    record_to_series,
    render_cleartext,
)
from .node import ConfigError
from .scenario import DEFAULT_SCENARIO, parse_scenario
from .sim import Simulation

POINTS_FILE = "points.csv"
POINT_FIELDS = ("time", "device_id", "series", "value")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="senswich",
        description="water-monitoring fleet twin: run, query, decode, serve",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario to completion")
    run.add_argument("--config", type=Path, default=None,
                     help="scenario JSON file (default: built-in scenario)")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    run.add_argument("--speed", default=None, metavar="X|max",
                     help="override pacing: real-time multiplier or 'max'")
    run.add_argument("--out", type=Path, default=None,
                     help="directory for events.jsonl / summary.json / points.csv")

    report = sub.add_parser("energy-report",
                            help="steady-state consumption and discharge time")
    report.add_argument("--profile", choices=sorted(PROFILES),
                        default=None, help="default: all profiles")
    report.add_argument("--basis",
                        choices=sorted(b.value for b in DischargeBasis),
                        default=None, help="default: both bases")

    decode = sub.add_parser("decode", help="decode a base64 uplink payload")
    decode.add_argument("--payload", required=True, metavar="BASE64")

    export = sub.add_parser("export", help="re-emit stored points from a run")
    export.add_argument("--run", type=Path, required=True, metavar="DIR",
                        help="run output directory (as given to `run --out`)")
    export.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    serve = sub.add_parser("serve", help="start the HTTP control service")
    serve.add_argument("--addr", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--data-dir", type=Path, default=None,
                       help="where per-run exports are written")

    return parser


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


# --- run ---------------------------------------------------------------------

def _scenario_from_args(args) -> dict:
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config} ({exc})")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON in {args.config} ({exc})")
    else:
        raw = json.loads(json.dumps(DEFAULT_SCENARIO))
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.speed is not None:
        if args.speed == "max":
            raw["speedup"] = "max"
        else:
            try:
                raw["speedup"] = float(args.speed)
            except ValueError:
                raise ConfigError(f"speed: expected a number or 'max', "
                                  f"got {args.speed!r}")
    return raw


def _cmd_run(args) -> int:
    try:
        config = parse_scenario(_scenario_from_args(args))
    except ConfigError as exc:
        return _fail(str(exc))

    sim = Simulation(config, out_dir=args.out)
    summary = sim.run()

    counters = summary["counters"]
    print(f"run complete: {summary['duration_s']:g} s simulated, "
          f"seed {summary['seed']}")
    print(f"  cycles {counters['cycles']}, "
          f"uplinks {counters['uplinks_delivered']} delivered / "
          f"{counters['uplinks_dropped']} dropped, "
          f"downlinks {counters['downlinks_delivered']} delivered")
    print(f"  messages {counters['messages_data']} data / "
          f"{counters['messages_error']} error, "
          f"points stored {summary['points_stored']}")
    print(f"  radio channel airtime {100 * summary['duty_cycle']:.4f}%")
    for device_id, node in summary["nodes"].items():
        ledger = node["ledger"]
        print(f"  {device_id}: {ledger['cycles']} cycles, "
              f"{ledger['energy_j']:.2f} J consumed "
              f"(gps {ledger['gps_energy_j']:.2f} J), "
              f"duty cycle {100 * node['duty_cycle']:.4f}%")
    if args.out is not None:
        print(f"  wrote events.jsonl, summary.json, {POINTS_FILE} "
              f"to {args.out}")
    return 0


# --- energy-report -----------------------------------------------------------

def _print_report(profile_name: str, basis: DischargeBasis) -> None:
    report = energy_report(PROFILES[profile_name], BatteryPack(), basis)
    d = report.as_dict()
    print(f"profile={d['profile']} basis={d['basis']}")
    print(f"  idle power          {d['idle_power_mw']:.2f} mW")
    print(f"  energy per sample   {d['energy_per_sample_mwh']:.2f} mWh")
    print(f"  average current     {d['avg_current_ma']:.2f} mA")
    print(f"  average power       {d['avg_power_mw']:.2f} mW")
    print(f"  discharge time      {d['discharge_h']:.2f} h "
          f"({d['discharge_days']:.2f} days)")


def _cmd_energy_report(args) -> int:
    profiles = [args.profile] if args.profile else sorted(PROFILES)
    bases = ([DischargeBasis(args.basis)] if args.basis
             else list(DischargeBasis))
    for name in profiles:
        for basis in bases:
            _print_report(name, basis)
    return 0


# --- decode ------------------------------------------------------------------

def _cmd_decode(args) -> int:
    try:
        data = decode_base64(args.payload)
        records = decode_payload(data)
        lines = [
            f"ch {record.channel:>3}  {record.kind.name.lower():<14} "
            f"{render_cleartext(record_to_series(record))}"
            for record in records
        ]
    except (Base64Error, MalformedPayload, UnmappedChannel, RangeError) as exc:
        return _fail(str(exc))
    print("\n".join(lines))
    return 0


# --- export ------------------------------------------------------------------

def _read_points(run_dir: Path) -> list[tuple[float, str, str, float]]:
    path = run_dir / POINTS_FILE
    if not path.is_file():
        raise ConfigError(f"run: no {POINTS_FILE} in {run_dir}")
    points = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line:
            continue
        try:
            time_s, device_id, series, value = line.split(",")
            points.append((float(time_s), device_id, series, float(value)))
        except ValueError:
            raise ConfigError(f"run: malformed line {lineno} in {path}")
    return points


def _cmd_export(args) -> int:
    try:
        points = _read_points(args.run)
    except ConfigError as exc:
        return _fail(str(exc))
    if args.format == "csv":
        print(",".join(POINT_FIELDS))
        for time_s, device_id, series, value in points:
            print(f"{time_s:g},{device_id},{series},{value:g}")
    else:
        for point in points:
            print(json.dumps(dict(zip(POINT_FIELDS, point)), sort_keys=True))
    return 0


# --- serve -------------------------------------------------------------------

def _cmd_serve(args) -> int:
    from .service import serve

    serve(addr=args.addr, port=args.port, data_dir=args.data_dir)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "energy-report": _cmd_energy_report,
    "decode": _cmd_decode,
    "export": _cmd_export,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
