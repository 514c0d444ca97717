"""Piecewise-constant pump-current programs for both lasers.

The slave is driven by a rectangular pulse train (gain switching); the
master sits at a steady current with short rectangular excursions placed
in the gaps between slave pulses, one gap per encoded pulse pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PulseTrainSpec:
    """Timing of the slave pulse train."""

    period: float        # repetition period [s]
    width: float         # pulse width [s]
    i_low: float         # off-state current [A]
    i_high: float        # pulse current [A]
    n_pulses: int
    t_start: float = 0.0  # start of the first pulse (warm-up before it)

    def __post_init__(self):
        if not 0 < self.width < self.period:
            raise ValueError("pulse width must satisfy 0 < width < period")
        if self.i_low < 0 or self.i_high < self.i_low:
            raise ValueError("currents must satisfy 0 <= i_low <= i_high")
        if self.n_pulses < 1:
            raise ValueError("need at least one pulse")
        if self.t_start < 0:
            raise ValueError("t_start must be >= 0")

    def pulse_window(self, j: int) -> tuple[float, float]:
        t0 = self.t_start + j * self.period
        return t0, t0 + self.width

    def gap_window(self, j: int) -> tuple[float, float]:
        """Gap following pulse j (between pulses j and j+1)."""
        t0 = self.t_start + j * self.period + self.width
        return t0, self.t_start + (j + 1) * self.period


@dataclass(frozen=True)
class DriveWaveform:
    """Right-continuous piecewise-constant current program.

    Segment k holds `currents[k]` on [segment_starts[k], segment_starts[k+1]);
    the last segment extends indefinitely. The optional metadata fields are
    filled in by the builders and consumed by the analysis layer.
    """

    segment_starts: np.ndarray
    currents: np.ndarray
    train: PulseTrainSpec | None = None
    perturbations: tuple = field(default=())  # ((gap index, delta_i, t0, t1), ...)

    def __post_init__(self):
        starts = np.asarray(self.segment_starts, dtype=float)
        curr = np.asarray(self.currents, dtype=float)
        if starts.ndim != 1 or starts.size == 0 or starts.size != curr.size:
            raise ValueError("need one current per segment start")
        if starts[0] != 0.0:
            raise ValueError("waveform must start at t = 0")
        if np.any(np.diff(starts) <= 0):
            raise ValueError("segment starts must be strictly increasing")
        if np.any(curr < 0):
            raise ValueError("currents must be >= 0")
        object.__setattr__(self, "segment_starts", starts)
        object.__setattr__(self, "currents", curr)

    def current_at(self, t: float) -> float:
        idx = int(np.searchsorted(self.segment_starts, t, side="right")) - 1
        return float(self.currents[max(idx, 0)])

    def sample(self, times) -> np.ndarray:
        idx = np.searchsorted(self.segment_starts, np.asarray(times, dtype=float), side="right") - 1
        return self.currents[np.maximum(idx, 0)]


def _segments_from_intervals(base: float, intervals) -> tuple[np.ndarray, np.ndarray]:
    # intervals: sorted non-overlapping (t0, t1, current) on top of `base`
    starts = [0.0]
    currents = [base]
    for t0, t1, cur in intervals:
        if t0 == starts[-1]:
            currents[-1] = cur
        else:
            starts.append(t0)
            currents.append(cur)
        starts.append(t1)
        currents.append(base)
    return np.asarray(starts), np.asarray(currents)


def build_slave_drive(
    period: float,
    width: float,
    i_low: float,
    i_high: float,
    n_pulses: int,
    t_start: float = 0.0,
) -> DriveWaveform:
    """Rectangular gain-switching pulse train for the slave laser."""
    spec = PulseTrainSpec(period, width, i_low, i_high, n_pulses, t_start)
    intervals = [(*spec.pulse_window(j), i_high) for j in range(n_pulses)]
    starts, currents = _segments_from_intervals(i_low, intervals)
    return DriveWaveform(starts, currents, train=spec)


def build_master_drive(
    i_s: float,
    perturbations,
    d: float,
    slave_drive: DriveWaveform,
) -> DriveWaveform:
    """Quasi-steady master current with encoding excursions.

    `perturbations` maps inter-pulse gap index j to a current excursion
    delta_i; each excursion is a rectangle of duration d centered in gap j
    of the slave train. Excursions must fit strictly inside their gap: the
    encoding happens between pulses, never during one.
    """
    if d <= 0:
        raise ValueError("perturbation duration must be > 0")
    spec = slave_drive.train
    if spec is None:
        raise ValueError("slave drive carries no pulse-train timing")
    if i_s < 0:
        raise ValueError("steady current must be >= 0")

    items = sorted(dict(perturbations).items())
    intervals = []
    meta = []
    for j, delta_i in items:
        if not 0 <= j <= spec.n_pulses - 2:
            raise ValueError(
                f"gap index {j} has no following pulse (train of {spec.n_pulses})"
            )
        g0, g1 = spec.gap_window(j)
        center = 0.5 * (g0 + g1)
        t0, t1 = center - 0.5 * d, center + 0.5 * d
        if t0 <= g0 or t1 >= g1:
            raise ValueError(
                f"perturbation window of {d:.3e} s does not fit strictly "
                f"inside gap {j} ({g1 - g0:.3e} s)"
            )
        if i_s + delta_i < 0:
            raise ValueError("perturbed current must stay >= 0")
        intervals.append((t0, t1, i_s + delta_i))
        meta.append((j, float(delta_i), t0, t1))
    starts, currents = _segments_from_intervals(i_s, intervals)
    return DriveWaveform(starts, currents, train=spec, perturbations=tuple(meta))


def constant_drive(i: float) -> DriveWaveform:
    return DriveWaveform(np.array([0.0]), np.array([float(i)]))
