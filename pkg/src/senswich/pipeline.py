"""Cloud-side ingest path: topic routing, decoding, storage, queries.

Every delivered frame arrives base64-encoded and is pushed through the decode
chain base64 -> binary records -> named series values.  A frame that survives
the whole chain becomes one message on the `lorawan` topic plus one stored
point per decoded value (a GPS record expands to gps_lat/gps_lon/gps_alt);
any failure becomes one message on `lorawan/error` carrying the cause, and
stores nothing.  Each ingest publishes on exactly one of the two topics.

The store keeps points in memory keyed by (device, series, time), enforces a
retention window, answers raw and bucketed mean/min/max queries with buckets
aligned to the query start, and can mirror every accepted point to an
append-only text file (`time,device_id,series,value` per line) for replay.
"""

from __future__ import annotations

import base64
import bisect
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .lpp import (
    Base64Error,
    MalformedPayload,
    RangeError,
    SERIES_NAMES,
    UnmappedChannel,
    decode_base64,
    payload_to_series,
    render_cleartext,
)
from .link import UplinkFrame

TOPIC_DATA = "lorawan"
TOPIC_ERROR = "lorawan/error"
TOPIC_ALL = "lorawan/#"
RETENTION_DEFAULT_S = 90 * 86400.0


class BadFilter(ValueError):
    """Subscription filter is not one of the supported topics."""


class UnknownSeries(LookupError):
    pass


class UnknownDevice(LookupError):
    pass


class QueryError(ValueError):
    """Query preconditions violated (range order, bucket size, aggregate)."""


@dataclass(frozen=True)
class TopicMessage:
    topic: str
    device_id: str
    time: float
    payload_b64: str
    decoded: tuple[tuple[str, float], ...] = ()
    cleartext: str = ""
    error: str = ""

    def as_dict(self) -> dict:
        return {
            "topic": self.topic,
            "device_id": self.device_id,
            "time": self.time,
            "payload_b64": self.payload_b64,
            "decoded": {name: value for name, value in self.decoded},
            "cleartext": self.cleartext,
            "error": self.error,
        }


@dataclass(frozen=True)
class SeriesPoint:
    device_id: str
    series: str
    time: float
    value: float


@dataclass(frozen=True)
class RetentionPolicy:
    max_age_s: float = RETENTION_DEFAULT_S

    def __post_init__(self):
        if self.max_age_s <= 0:
            raise ValueError("retention max_age_s must be > 0")


class Subscription:
    """Order-preserving message stream for one topic filter."""

    def __init__(self, topic_filter: str):
        self.topic_filter = topic_filter
        self._lock = threading.Lock()
        self._messages: deque[TopicMessage] = deque()

    def _offer(self, message: TopicMessage) -> None:
        if self.topic_filter in (TOPIC_ALL, message.topic):
            with self._lock:
                self._messages.append(message)

    def drain(self) -> list[TopicMessage]:
        """All messages delivered since the last drain, in publish order."""
        with self._lock:
            out = list(self._messages)
            self._messages.clear()
        return out


class TopicBus:
    """Minimal pub/sub: two fixed topics plus a catch-all filter."""

    FILTERS = (TOPIC_DATA, TOPIC_ERROR, TOPIC_ALL)

    def __init__(self):
        self._lock = threading.Lock()
        self._subs: list[Subscription] = []

    def subscribe(self, topic_filter: str) -> Subscription:
        if topic_filter not in self.FILTERS:
            raise BadFilter(f"unsupported filter {topic_filter!r}")
        sub = Subscription(topic_filter)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def publish(self, message: TopicMessage) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            sub._offer(message)


class SeriesStore:
    """In-memory time series with retention and bucketed aggregation."""

    def __init__(self, retention: RetentionPolicy | None = None,
                 persist_path: str | Path | None = None):
        self.retention = retention or RetentionPolicy()
        self._lock = threading.Lock()
        # (device_id, series) -> parallel sorted lists of times and values
        self._times: dict[tuple[str, str], list[float]] = {}
        self._values: dict[tuple[str, str], list[float]] = {}
        self._devices: set[str] = set()
        self._persist = Path(persist_path) if persist_path else None
        if self._persist:
            self._persist.parent.mkdir(parents=True, exist_ok=True)
            self._persist.write_text("")

    def add(self, point: SeriesPoint) -> None:
        if not math.isfinite(point.value):
            raise ValueError(f"non-finite value for {point.series}")
        if point.series not in SERIES_NAMES:
            raise UnknownSeries(point.series)
        key = (point.device_id, point.series)
        with self._lock:
            times = self._times.setdefault(key, [])
            values = self._values.setdefault(key, [])
            i = bisect.bisect_left(times, point.time)
            if i < len(times) and times[i] == point.time:
                values[i] = point.value  # (device, series, time) stays unique
            else:
                times.insert(i, point.time)
                values.insert(i, point.value)
            self._devices.add(point.device_id)
        if self._persist:
            with self._persist.open("a", encoding="utf-8") as fh:
                fh.write(f"{point.time},{point.device_id},{point.series},{point.value}\n")

    def register_device(self, device_id: str) -> None:
        """Mark a device as known before it has stored any points.

        Queries for a registered device return empty series instead of
        raising UnknownDevice.
        """
        with self._lock:
            self._devices.add(device_id)

    def __len__(self) -> int:
        with self._lock:
            return sum(len(ts) for ts in self._times.values())

    def devices(self) -> list[str]:
        with self._lock:
            return sorted(self._devices)

    def all_points(self) -> list[SeriesPoint]:
        with self._lock:
            return [
                SeriesPoint(device, series, t, v)
                for (device, series), ts in self._times.items()
                for t, v in zip(ts, self._values[(device, series)])
            ]

    def query(self, device_id: str, series: str, from_t: float, to_t: float,
              agg: str = "raw", bucket_s: float | None = None,
              ) -> list[tuple[float, float]]:
        if series not in SERIES_NAMES:
            raise UnknownSeries(series)
        with self._lock:
            if device_id not in self._devices:
                raise UnknownDevice(device_id)
            if from_t > to_t:
                raise QueryError("query range start exceeds end")
            if agg not in ("raw", "mean", "min", "max"):
                raise QueryError(f"unknown aggregate {agg!r}")
            if agg != "raw" and (bucket_s is None or bucket_s <= 0):
                raise QueryError("bucketed aggregates need bucket_s > 0")
            key = (device_id, series)
            times = self._times.get(key, [])
            values = self._values.get(key, [])
            lo = bisect.bisect_left(times, from_t)
            hi = bisect.bisect_right(times, to_t)
            window = list(zip(times[lo:hi], values[lo:hi]))
        if agg == "raw":
            return window
        buckets: dict[int, list[float]] = {}
        for t, v in window:
            buckets.setdefault(int((t - from_t) // bucket_s), []).append(v)
        reduce = {"mean": lambda vs: sum(vs) / len(vs), "min": min, "max": max}[agg]
        return [
            (from_t + index * bucket_s, reduce(vals))
            for index, vals in sorted(buckets.items())
        ]

    def expire(self, now: float) -> int:
        cutoff = now - self.retention.max_age_s
        removed = 0
        with self._lock:
            for key, times in self._times.items():
                keep = bisect.bisect_left(times, cutoff)
                if keep:
                    removed += keep
                    self._times[key] = times[keep:]
                    self._values[key] = self._values[key][keep:]
        return removed


class Pipeline:
    """Decode hook between the transport and the store, with topic routing."""

    def __init__(self, store: SeriesStore | None = None,
                 bus: TopicBus | None = None, error_log_size: int = 1000):
        # `store` may be empty and SeriesStore has __len__, so test identity
        self.store = SeriesStore() if store is None else store
        self.bus = TopicBus() if bus is None else bus
        self.errors: deque[TopicMessage] = deque(maxlen=error_log_size)
        self.ingested = 0
        self.stored_points = 0

    def ingest(self, frame: UplinkFrame, t: float,
               payload_b64: str | None = None) -> TopicMessage:
        """Decode one delivered frame; publish on exactly one topic."""
        if payload_b64 is None:
            payload_b64 = base64.b64encode(frame.payload).decode("ascii")
        self.ingested += 1
        try:
            raw = decode_base64(payload_b64)
            pairs = payload_to_series(raw)
            if not pairs:
                raise MalformedPayload("payload contains no records")
        except (Base64Error, MalformedPayload, UnmappedChannel, RangeError) as exc:
            message = TopicMessage(
                topic=TOPIC_ERROR, device_id=frame.device_id, time=t,
                payload_b64=payload_b64,
                error=f"{type(exc).__name__}: {exc}",
            )
            self.errors.append(message)
            self.bus.publish(message)
            return message
        for series, value in pairs:
            self.store.add(SeriesPoint(frame.device_id, series, t, value))
        self.stored_points += len(pairs)
        message = TopicMessage(
            topic=TOPIC_DATA, device_id=frame.device_id, time=t,
            payload_b64=payload_b64, decoded=tuple(pairs),
            cleartext=render_cleartext(pairs),
        )
        self.bus.publish(message)
        return message
