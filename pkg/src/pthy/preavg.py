"""Pre-averaged returns and the window length rule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import WeightProfile


@dataclass(frozen=True, eq=False)
class PreAveraged:
    """Pre-averaged returns ``values[i] = sum_{p=1}^{k_n-1} g(p/k_n) (Z[i+p] - Z[i+p-1])``.

    ``anchor_times[i]`` is the time of tick ``i`` and ``end_times[i]`` the time
    of tick ``i + k_n`` (``inf`` when that tick does not exist).
    """

    values: np.ndarray
    k_n: int
    anchor_times: np.ndarray
    end_times: np.ndarray

    def __len__(self) -> int:
        return self.values.size


def weight_vector(k_n: int, profile: WeightProfile) -> np.ndarray:
    return profile.g(np.arange(1, k_n) / k_n)


def preaverage(values, k_n: int, profile: WeightProfile, times=None) -> PreAveraged:
    values = np.asarray(values, dtype=float)
    if k_n < 2:
        raise ValueError(f"k_n must be at least 2, got {k_n}")
    if values.size < k_n:
        raise ValueError(f"need at least k_n={k_n} observations, got {values.size}")
    w = weight_vector(k_n, profile)
    dz = np.diff(values)
    # out[i] = sum_p w[p-1] * dz[i+p-1], p = 1..k_n-1
    out = np.correlate(dz, w, mode="valid")
    m = values.size - k_n + 1
    if times is None:
        times = np.arange(values.size, dtype=float)
    times = np.asarray(times, dtype=float)
    end = np.full(m, np.inf)
    have = np.arange(m) + k_n < times.size
    end[have] = times[np.arange(m)[have] + k_n]
    return PreAveraged(out[:m], k_n, times[:m].copy(), end)


def select_kn(m: int, theta: float) -> int:
    """Window ``ceil(theta * sqrt(m))``, never below 2."""
    if m < 1 or theta <= 0:
        raise ValueError("m must be positive and theta > 0")
    return max(2, math.ceil(theta * math.sqrt(m)))
