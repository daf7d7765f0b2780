"""LoRaWAN-style transport between buoys and shore gateways.

Coverage is a binary disc: a frame is received by every gateway within
`range_km` great-circle distance (haversine, Earth radius 6371.0 km) and is
Delivered if at least one gateway hears it, Dropped otherwise.  Delivered
frames reach the cloud pipeline exactly once no matter how many gateways
heard them.

Downlinks follow Class-A discipline: commands wait in a per-device FIFO queue
and the oldest one is handed to the device only in the receive window that
opens `rx_delay_s` (default 1 s) after one of its uplinks ends — one command
per window, the rest stay queued for subsequent uplinks.

An optional seeded loss probability can drop in-range frames, and a seeded
corruption probability can flip one payload byte, for exercising the
pipeline's error path.  Both default to 0 (clean transport).
"""

from __future__ import annotations

import enum
import math
import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_KM = 6371.0
DEFAULT_RANGE_KM = 15.0
DEFAULT_RX_DELAY_S = 1.0
TX_AIRTIME_S = 2.0


class LinkError(ValueError):
    """A transport parameter is out of its valid range."""


@dataclass(frozen=True)
class Gateway:
    gateway_id: str
    lat: float
    lon: float
    range_km: float = DEFAULT_RANGE_KM

    def __post_init__(self):
        if self.range_km <= 0:
            raise LinkError(f"gateway {self.gateway_id!r} range must be > 0")
        if not -90 <= self.lat <= 90 or not -180 <= self.lon <= 180:
            raise LinkError(f"gateway {self.gateway_id!r} position out of range")


@dataclass
class UplinkFrame:
    device_id: str
    payload: bytes
    tx_start: float
    frame_id: int = 0
    fport: int = 1
    received_by: tuple[str, ...] = ()

    @property
    def tx_end(self) -> float:
        return self.tx_start + TX_AIRTIME_S


@dataclass
class DownlinkCommand:
    device_id: str
    fport: int
    payload_b64: str
    enqueued_at: float
    delivered_at: float | None = None

    def as_dict(self) -> dict:
        return {
            "device_id": self.device_id,
            "fport": self.fport,
            "payload_b64": self.payload_b64,
            "enqueued_at": self.enqueued_at,
            "delivered_at": self.delivered_at,
        }


class DeliveryStatus(enum.Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"


@dataclass(frozen=True)
class DeliveryResult:
    status: DeliveryStatus
    frame: UplinkFrame
    payload: bytes  # what the gateway forwards (corruption applies here)

    @property
    def delivered(self) -> bool:
        return self.status is DeliveryStatus.DELIVERED


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance between two (lat, lon) points in degrees."""
    lat1, lon1, lat2, lon2 = map(math.radians, (*a, *b))
    s = (
        math.sin((lat2 - lat1) / 2) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    )
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(s))


class DownlinkQueue:
    """Per-device FIFO of pending commands; all mutations are lock-ordered."""

    def __init__(self, rx_delay_s: float = DEFAULT_RX_DELAY_S):
        self.rx_delay_s = rx_delay_s
        self._lock = threading.Lock()
        self._pending: dict[str, deque[DownlinkCommand]] = defaultdict(deque)

    def enqueue(self, device_id: str, fport: int, payload_b64: str,
                t: float) -> DownlinkCommand:
        cmd = DownlinkCommand(device_id, fport, payload_b64, enqueued_at=t)
        with self._lock:
            self._pending[device_id].append(cmd)
        return cmd

    def pending(self, device_id: str | None = None) -> list[DownlinkCommand]:
        with self._lock:
            if device_id is not None:
                return list(self._pending.get(device_id, ()))
            return [cmd for q in self._pending.values() for cmd in q]

    def flush(self, device_id: str, uplink_end: float) -> list[DownlinkCommand]:
        """Deliver the oldest pending command in this uplink's receive window."""
        with self._lock:
            queue = self._pending.get(device_id)
            if not queue:
                return []
            cmd = queue.popleft()
        cmd.delivered_at = uplink_end + self.rx_delay_s
        return [cmd]


def flush_downlinks(device_id: str, uplink_end: float,
                    queue: DownlinkQueue) -> list[DownlinkCommand]:
    return queue.flush(device_id, uplink_end)


class LoraLink:
    """Gateway set plus downlink queue; evaluates each uplink's fate."""

    def __init__(
        self,
        gateways: list[Gateway],
        rx_delay_s: float = DEFAULT_RX_DELAY_S,
        loss_probability: float = 0.0,
        corruption_probability: float = 0.0,
        rng: np.random.Generator | None = None,
    ):
        if not 0 <= loss_probability <= 1 or not 0 <= corruption_probability <= 1:
            raise LinkError("probabilities must be within [0, 1]")
        self.gateways = list(gateways)
        self.queue = DownlinkQueue(rx_delay_s)
        self.loss_probability = loss_probability
        self.corruption_probability = corruption_probability
        self._rng = rng or np.random.default_rng()

    def deliver_uplink(self, frame: UplinkFrame,
                       position: tuple[float, float]) -> DeliveryResult:
        heard = tuple(
            gw.gateway_id for gw in self.gateways
            if haversine_km(position, (gw.lat, gw.lon)) <= gw.range_km
        )
        frame.received_by = heard
        payload = frame.payload
        delivered = bool(heard)
        if delivered and self.loss_probability > 0:
            delivered = self._rng.random() >= self.loss_probability
        if delivered and self.corruption_probability > 0:
            if self._rng.random() < self.corruption_probability and payload:
                # flip one byte and drop the last: record framing is always
                # broken, so a corrupted frame reliably exercises the error path
                i = int(self._rng.integers(len(payload)))
                flip = 1 + int(self._rng.integers(255))
                payload = payload[:i] + bytes([payload[i] ^ flip]) + payload[i + 1:]
                payload = payload[:-1]
        status = DeliveryStatus.DELIVERED if delivered else DeliveryStatus.DROPPED
        return DeliveryResult(status, frame, payload)


def duty_cycle(frames: list[UplinkFrame], window_s: float,
               at: float | None = None) -> float:
    """Fraction of [at - window_s, at] spent transmitting."""
    if window_s <= 0:
        raise LinkError("window must be > 0")
    if at is None:
        at = max((f.tx_end for f in frames), default=window_s)
    lo = at - window_s
    busy = sum(
        max(0.0, min(f.tx_end, at) - max(f.tx_start, lo)) for f in frames
    )
    return busy / window_s
