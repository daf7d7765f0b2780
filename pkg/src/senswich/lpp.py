"""CayenneLPP payload encoding/decoding plus the base64 downlink command protocol.

Wire format: a payload is a concatenation of records, each laid out as
``[channel u8][type u8][big-endian data]``. Types used by this system:

    type  data                                      resolution
    0x00  1 byte unsigned                           1       digital input
    0x02  2 bytes signed, value x 100               0.01    analog input
    0x67  2 bytes signed, value x 10                0.1 C   temperature
    0x88  9 bytes: lat x 1e4, lon x 1e4, alt x 100,
          each a 3-byte signed integer              1e-4 deg / 0.01 m   gps

Decoding is strict: truncated records, unknown type bytes and trailing
garbage raise MalformedPayload so the frame can be routed to the error topic.

Downlink payloads are base64 text (RFC 4648, standard alphabet, padded);
the cleartext "gps" requests an on-demand position fix.
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass
from enum import Enum, IntEnum


class RangeError(ValueError):
    """Value does not fit the wire representation (or violates its bounds)."""


class MalformedPayload(ValueError):
    """Payload bytes cannot be parsed as a sequence of complete records."""


class Base64Error(ValueError):
    """Downlink payload is not valid RFC 4648 base64."""


class UnmappedChannel(LookupError):
    """Decoded record does not match the channel plan of this system."""


class LppType(IntEnum):
    """CayenneLPP type byte."""

    DIGITAL_INPUT = 0x00
    ANALOG_INPUT = 0x02
    TEMPERATURE = 0x67
    GPS = 0x88


# Data bytes following the channel/type header, per type.
_DATA_SIZE = {
    LppType.DIGITAL_INPUT: 1,
    LppType.ANALOG_INPUT: 2,
    LppType.TEMPERATURE: 2,
    LppType.GPS: 9,
}

_I16_MIN, _I16_MAX = -(1 << 15), (1 << 15) - 1
_I24_MIN, _I24_MAX = -(1 << 23), (1 << 23) - 1


@dataclass(frozen=True)
class LppRecord:
    """One channel/type/value unit of a payload.

    value is an int for DIGITAL_INPUT, a float for ANALOG_INPUT and
    TEMPERATURE, and a (lat, lon, alt) tuple for GPS.
    """

    channel: int
    kind: LppType
    value: int | float | tuple[float, float, float]

    def quantized(self) -> "LppRecord":
        """The record as it survives an encode/decode round trip."""
        if self.kind is LppType.DIGITAL_INPUT:
            return self
        if self.kind is LppType.ANALOG_INPUT:
            return LppRecord(self.channel, self.kind, round(self.value * 100) / 100)
        if self.kind is LppType.TEMPERATURE:
            return LppRecord(self.channel, self.kind, round(self.value * 10) / 10)
        lat, lon, alt = self.value
        return LppRecord(
            self.channel,
            self.kind,
            (round(lat * 10000) / 10000, round(lon * 10000) / 10000, round(alt * 100) / 100),
        )


def _scaled(value: float, scale: int, lo: int, hi: int, what: str) -> int:
    counts = round(value * scale)
    if not lo <= counts <= hi:
        raise RangeError(f"{what} {value!r} out of range after x{scale} scaling")
    return counts


def encode_record(record: LppRecord) -> bytes:
    """Encode one record to its wire bytes."""
    if not 0 <= record.channel <= 255:
        raise RangeError(f"channel {record.channel} outside 0..255")
    head = bytes((record.channel, record.kind))

    if record.kind is LppType.DIGITAL_INPUT:
        value = int(record.value)
        if value != record.value or not 0 <= value <= 255:
            raise RangeError(f"digital input {record.value!r} not an integer in 0..255")
        return head + bytes((value,))

    if record.kind is LppType.ANALOG_INPUT:
        counts = _scaled(record.value, 100, _I16_MIN, _I16_MAX, "analog input")
        return head + counts.to_bytes(2, "big", signed=True)

    if record.kind is LppType.TEMPERATURE:
        counts = _scaled(record.value, 10, _I16_MIN, _I16_MAX, "temperature")
        return head + counts.to_bytes(2, "big", signed=True)

    lat, lon, alt = record.value
    if not -90.0 <= lat <= 90.0:
        raise RangeError(f"latitude {lat!r} outside -90..90")
    if not -180.0 <= lon <= 180.0:
        raise RangeError(f"longitude {lon!r} outside -180..180")
    data = (
        _scaled(lat, 10000, _I24_MIN, _I24_MAX, "latitude").to_bytes(3, "big", signed=True)
        + _scaled(lon, 10000, _I24_MIN, _I24_MAX, "longitude").to_bytes(3, "big", signed=True)
        + _scaled(alt, 100, _I24_MIN, _I24_MAX, "altitude").to_bytes(3, "big", signed=True)
    )
    return head + data


def decode_payload(data: bytes) -> list[LppRecord]:
    """Parse payload bytes into records, in encounter order.

    Raises MalformedPayload on a truncated record or unknown type byte;
    arbitrary input bytes are otherwise accepted.
    """
    records: list[LppRecord] = []
    i = 0
    n = len(data)
    while i < n:
        if n - i < 2:
            raise MalformedPayload(f"dangling byte at offset {i}")
        channel, type_byte = data[i], data[i + 1]
        try:
            kind = LppType(type_byte)
        except ValueError:
            raise MalformedPayload(f"unknown type byte 0x{type_byte:02X} at offset {i + 1}") from None
        size = _DATA_SIZE[kind]
        body = data[i + 2 : i + 2 + size]
        if len(body) < size:
            raise MalformedPayload(f"truncated {kind.name} record at offset {i}")

        if kind is LppType.DIGITAL_INPUT:
            value: int | float | tuple[float, float, float] = body[0]
        elif kind is LppType.ANALOG_INPUT:
            value = int.from_bytes(body, "big", signed=True) / 100
        elif kind is LppType.TEMPERATURE:
            value = int.from_bytes(body, "big", signed=True) / 10
        else:
            value = (
                int.from_bytes(body[0:3], "big", signed=True) / 10000,
                int.from_bytes(body[3:6], "big", signed=True) / 10000,
                int.from_bytes(body[6:9], "big", signed=True) / 100,
            )
        records.append(LppRecord(channel, kind, value))
        i += 2 + size
    return records


# --- Channel plan -----------------------------------------------------------
#
# Fixed assignment between measurement series and wire channels. Turbidity
# is carried as NTU/100 because the analog type saturates at 327.67 and
# lagoon turbidity can exceed that; everything else rides in native units.

@dataclass(frozen=True)
class ChannelSpec:
    channel: int
    series: str
    kind: LppType
    counts_per_unit: float  # wire counts per engineering unit


CHANNEL_PLAN = (
    ChannelSpec(1, "ph", LppType.ANALOG_INPUT, 100),
    ChannelSpec(2, "ec", LppType.ANALOG_INPUT, 100),
    ChannelSpec(3, "turbidity", LppType.ANALOG_INPUT, 1),  # wire value = NTU / 100
    ChannelSpec(4, "do", LppType.ANALOG_INPUT, 100),
    ChannelSpec(5, "liquid_level", LppType.DIGITAL_INPUT, 1),
    ChannelSpec(6, "temperature", LppType.TEMPERATURE, 10),
    ChannelSpec(7, "gps", LppType.GPS, 1),
)

_BY_CHANNEL = {spec.channel: spec for spec in CHANNEL_PLAN}

GPS_SERIES = ("gps_lat", "gps_lon", "gps_alt")

# Every series name a stored point may carry.
SERIES_NAMES = tuple(s.series for s in CHANNEL_PLAN if s.kind is not LppType.GPS) + GPS_SERIES

PERIODIC_PAYLOAD_LEN = 23   # ch1..ch6
GPS_PAYLOAD_LEN = 34        # ch1..ch7


@dataclass(frozen=True)
class SampleSet:
    """One acquisition cycle's calibrated readings.

    gps is present only when an on-demand fix completed before the cycle.
    """

    ph: float
    ec: float
    turbidity: float
    do_mgl: float
    liquid_level: bool
    temperature_c: float
    gps: tuple[float, float, float] | None = None

    def as_dict(self) -> dict:
        out = {
            "ph": self.ph,
            "ec": self.ec,
            "turbidity": self.turbidity,
            "do": self.do_mgl,
            "liquid_level": int(self.liquid_level),
            "temperature": self.temperature_c,
        }
        if self.gps is not None:
            out["gps"] = list(self.gps)
        return out


def encode_sampleset(s: SampleSet) -> bytes:
    """Pack a sample set into one uplink payload, channels ascending."""
    records = [
        LppRecord(1, LppType.ANALOG_INPUT, s.ph),
        LppRecord(2, LppType.ANALOG_INPUT, s.ec),
        LppRecord(3, LppType.ANALOG_INPUT, s.turbidity / 100),
        LppRecord(4, LppType.ANALOG_INPUT, s.do_mgl),
        LppRecord(5, LppType.DIGITAL_INPUT, int(s.liquid_level)),
        LppRecord(6, LppType.TEMPERATURE, s.temperature_c),
    ]
    if s.gps is not None:
        records.append(LppRecord(7, LppType.GPS, s.gps))
    return b"".join(encode_record(r) for r in records)


def record_to_series(record: LppRecord) -> list[tuple[str, float]]:
    """Map a decoded record back to (series, engineering value) pairs.

    GPS expands to three series. The engineering value is recomputed from
    the wire counts so the NTU/100 transport scaling is undone exactly.
    """
    spec = _BY_CHANNEL.get(record.channel)
    if spec is None or spec.kind is not record.kind:
        raise UnmappedChannel(
            f"channel {record.channel} with type {record.kind.name} is not in the channel plan"
        )
    if record.kind is LppType.GPS:
        lat, lon, alt = record.value
        return [("gps_lat", lat), ("gps_lon", lon), ("gps_alt", alt)]
    if record.kind is LppType.DIGITAL_INPUT:
        return [(spec.series, float(record.value))]
    # Back out the raw counts, then divide once: correctly-rounded result.
    resolution = 0.1 if record.kind is LppType.TEMPERATURE else 0.01
    counts = round(record.value / resolution)
    return [(spec.series, counts / spec.counts_per_unit)]


def payload_to_series(data: bytes) -> list[tuple[str, float]]:
    """Decode a payload and map every record, preserving order."""
    pairs: list[tuple[str, float]] = []
    for record in decode_payload(data):
        pairs.extend(record_to_series(record))
    return pairs


def render_cleartext(pairs: list[tuple[str, float]]) -> str:
    """Human-readable key=value rendering of decoded series values."""
    return " ".join(f"{name}={value:g}" for name, value in pairs)


# --- Downlink commands ------------------------------------------------------

class CommandKind(Enum):
    ACTIVATE_GPS = "activate_gps"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    text: str

    @property
    def is_gps(self) -> bool:
        return self.kind is CommandKind.ACTIVATE_GPS


def decode_base64(payload_b64: str) -> bytes:
    """Strict RFC 4648 decode; raises Base64Error on any deviation."""
    try:
        return base64.b64decode(payload_b64, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise Base64Error(f"invalid base64 payload: {exc}") from exc


def decode_downlink(fport: int, payload_b64: str) -> Command:
    """Interpret a downlink payload.

    The cleartext "gps" (case-sensitive) activates the position fix; any
    other cleartext is recorded as Unknown rather than rejected, so future
    commands do not break deployed nodes.
    """
    if not 1 <= fport <= 223:
        raise RangeError(f"fport {fport} outside application range 1..223")
    raw = decode_base64(payload_b64)
    if raw == b"gps":
        return Command(CommandKind.ACTIVATE_GPS, "gps")
    return Command(CommandKind.UNKNOWN, raw.decode("utf-8", errors="backslashreplace"))
