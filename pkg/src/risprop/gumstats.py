"""Type-A evaluation of orientation-error series: mean, experimental variance,
and the variance of the mean, with the Bessel correction throughout."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InsufficientDataError(ValueError):
    """Fewer than two samples: the experimental variance is undefined."""


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    variance: float
    std: float
    variance_of_mean: float
    std_of_mean: float


def type_a_stats(samples) -> SampleStats:
    """Statistics of repeated observations.

    Two-pass evaluation: the mean first, then squared deviations, which stays
    accurate for small spreads around a large mean.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    n = int(x.size)
    mean = float(x.mean())
    variance = float(np.sum((x - mean) ** 2) / (n - 1))
    variance_of_mean = variance / n
    return SampleStats(
        n=n,
        mean=mean,
        variance=variance,
        std=math.sqrt(variance),
        variance_of_mean=variance_of_mean,
        std_of_mean=math.sqrt(variance_of_mean),
    )


def stats_per_angle(series):
    """Apply type_a_stats to the roll, pitch and yaw error channels of a series.

    Returns (roll_stats, pitch_stats, yaw_stats). Lengths must agree.
    """
    channels = [np.asarray(series.roll_err), np.asarray(series.pitch_err),
                np.asarray(series.yaw_err)]
    if len({c.size for c in channels}) != 1:
        raise ValueError("roll/pitch/yaw series lengths differ")
    return tuple(type_a_stats(c) for c in channels)
