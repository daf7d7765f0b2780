"""Synthetic ground truth for the water body the fleet floats in.

Each measured series (ph, ec, turbidity, do, liquid_level, temperature) is
backed by a deterministic signal of simulation time:

    constant     fixed level
    diurnal      mean + amplitude x sin(2*pi*(t - phase)/period), period 24 h
    random_walk  seeded Gaussian steps on a fixed time grid, clipped to bounds

Signals are shared by every node (they all float in the same water); sensor
noise is drawn per node at read time using the per-series sigma stored here.
Random walks are generated lazily on their grid and cached, so evaluating the
same timestamps twice — or out of order — always yields identical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DAY_S = 86400.0


class Signal:
    """A scalar function of simulation time, vectorized over numpy arrays."""

    def value(self, t: float) -> float:
        return float(self.values(np.asarray([t], dtype=float))[0])

    def values(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass
class Constant(Signal):
    level: float

    def values(self, ts: np.ndarray) -> np.ndarray:
        return np.full_like(ts, self.level, dtype=float)


@dataclass
class Diurnal(Signal):
    mean: float
    amplitude: float
    period: float = DAY_S
    phase: float = 0.0

    def values(self, ts: np.ndarray) -> np.ndarray:
        return self.mean + self.amplitude * np.sin(
            2 * np.pi * (ts - self.phase) / self.period
        )


@dataclass
class RandomWalk(Signal):
    """Piecewise-constant walk on a `grid_s` grid, clipped to [lo, hi]."""

    start: float
    step_sigma: float
    lo: float
    hi: float
    grid_s: float = 60.0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    _levels: list[float] = field(default_factory=list, repr=False)

    def _extend_to(self, index: int) -> None:
        if not self._levels:
            self._levels.append(float(np.clip(self.start, self.lo, self.hi)))
        while len(self._levels) <= index:
            step = self.rng.normal(0.0, self.step_sigma)
            self._levels.append(float(np.clip(self._levels[-1] + step, self.lo, self.hi)))

    def values(self, ts: np.ndarray) -> np.ndarray:
        idx = np.maximum(np.floor_divide(ts, self.grid_s).astype(int), 0)
        self._extend_to(int(idx.max(initial=0)))
        return np.asarray(self._levels, dtype=float)[idx]


@dataclass
class EnvironmentModel:
    """Ground-truth signal plus read-noise sigma for every measured series."""

    signals: dict[str, Signal]
    noise_sigma: dict[str, float]

    def truth(self, series: str, t: float) -> float:
        return self.signals[series].value(t)

    def truth_values(self, series: str, ts: np.ndarray) -> np.ndarray:
        return self.signals[series].values(ts)

    def sigma(self, series: str) -> float:
        return self.noise_sigma.get(series, 0.0)


def default_lagoon(seed: int = 0) -> EnvironmentModel:
    """Plausible shallow-lagoon water: mild diurnal swings, drifting EC/turbidity."""
    children = np.random.SeedSequence(seed).spawn(2)
    return EnvironmentModel(
        signals={
            "temperature": Diurnal(mean=18.0, amplitude=4.0, phase=9 * 3600.0),
            "ph": Diurnal(mean=8.0, amplitude=0.25, phase=6 * 3600.0),
            "do": Diurnal(mean=8.0, amplitude=2.0, phase=9 * 3600.0),
            "ec": RandomWalk(40.0, 0.3, 20.0, 60.0,
                             rng=np.random.default_rng(children[0])),
            "turbidity": RandomWalk(150.0, 5.0, 0.0, 1000.0,
                                    rng=np.random.default_rng(children[1])),
            "liquid_level": Constant(1.0),
        },
        noise_sigma={
            "temperature": 0.05,
            "ph": 0.02,
            "do": 0.05,
            "ec": 0.1,
            "turbidity": 2.0,
            "liquid_level": 0.0,
        },
    )
