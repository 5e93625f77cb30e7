"""Running time-average of the measurement record and the cubic control law.

The averaged record Y_t = S_t / t (S_t the accumulated record) is kept as an
exact cumulative ratio rather than by integrating its SDE form, whose 1/t
coefficients are singular at t = 0.  Until a configurable warmup time has
elapsed the averager reports a fixed fallback value (0 by default), so the
control law applies only its Y-independent part -k0 early on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


def control_law(y, k0: float, k1: float, k3: float):
    """Control amplitude u = -k1*y + k3*y**3 - k0.

    Works elementwise on arrays; the sign convention is such that -u enters
    the momentum drift as +k1*y - k3*y**3 + k0.
    """
    return -k1 * y + k3 * y * y * y - k0


def average_from(accumulated, elapsed, warmup: float, fallback=0.0):
    """Reported record average: accumulated/elapsed once past warmup.

    Scalar or elementwise; ``elapsed < warmup`` (including 0) yields the
    fallback value.
    """
    if np.ndim(accumulated) == 0 and np.ndim(elapsed) == 0:
        if elapsed <= 0.0 or elapsed < warmup:
            return fallback
        return accumulated / elapsed
    elapsed = np.asarray(elapsed, dtype=float)
    ready = (elapsed > 0.0) & (elapsed >= warmup)
    return np.where(ready, np.asarray(accumulated) / np.where(ready, elapsed, 1.0), fallback)


@dataclass(frozen=True)
class RecordAverager:
    """State of the uniform time average of one measurement record."""

    accumulated: float = 0.0
    elapsed: float = 0.0
    warmup: float = 0.0
    fallback: float = 0.0

    @property
    def average(self) -> float:
        return float(average_from(self.accumulated, self.elapsed, self.warmup, self.fallback))

    def updated(self, dy: float, dt: float) -> "RecordAverager":
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        return replace(self, accumulated=self.accumulated + dy, elapsed=self.elapsed + dt)


def update_average(avg: RecordAverager, dy: float, dt: float) -> RecordAverager:
    """Functional update: fold one record increment dy over a step dt."""
    return avg.updated(dy, dt)
