"""Tick series, refresh-time synchronization and random sampling times."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SESSION_SECONDS = 23400.0


@dataclass(frozen=True, eq=False)
class TickSeries:
    """One asset's observations: strictly increasing times in ``[0, 1]`` and log-prices."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size < 2:
            raise ValueError("a tick series needs at least two observations")
        if t[0] != 0.0:
            raise ValueError(f"first observation must be at time 0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("observation times must be strictly increasing")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.times.size

    def scaled(self, c: float, shift: float = 0.0) -> "TickSeries":
        return TickSeries(self.times, c * self.values + shift)

    def subset(self, idx: np.ndarray) -> "TickSeries":
        return TickSeries(self.times[idx], self.values[idx])


@dataclass(frozen=True, eq=False)
class RefreshGrid:
    """Refresh times ``r`` and the next-tick interpolated designs of both assets.

    ``s_hat[k]`` is the first time of asset 1 strictly after ``r[k-1]``
    (``s_hat[0]`` its first observation); likewise ``t_hat`` for asset 2.
    """

    r: np.ndarray
    s_hat: np.ndarray
    t_hat: np.ndarray
    s_hat_idx: np.ndarray
    t_hat_idx: np.ndarray

    def __len__(self) -> int:
        return self.r.size


def refresh_grid(a: TickSeries, b: TickSeries) -> RefreshGrid:
    """Synchronize two tick series on their refresh times.

    The grid stops at the last refresh time for which both assets still
    have an observation after the previous refresh time.
    """
    s, t = a.times.tolist(), b.times.tolist()
    ns, nt = len(s), len(t)
    i = j = 0
    si, ti = [0], [0]
    r_prev = max(s[0], t[0])
    rs = [r_prev]
    while True:
        while i < ns and s[i] <= r_prev:
            i += 1
        while j < nt and t[j] <= r_prev:
            j += 1
        if i >= ns or j >= nt:
            break
        r_prev = max(s[i], t[j])
        si.append(i)
        ti.append(j)
        rs.append(r_prev)
    if len(rs) < 2:
        raise ValueError("tick series do not overlap: no refresh time after the first observation")
    si_arr = np.array(si, dtype=np.int64)
    ti_arr = np.array(ti, dtype=np.int64)
    return RefreshGrid(np.array(rs), a.times[si_arr], b.times[ti_arr], si_arr, ti_arr)


def refreshed_series(a: TickSeries, b: TickSeries, grid: RefreshGrid | None = None) -> tuple[TickSeries, TickSeries]:
    """Both assets resampled on their next-tick designs ``(s_hat, t_hat)``."""
    grid = grid if grid is not None else refresh_grid(a, b)
    return (
        TickSeries(grid.s_hat, a.values[grid.s_hat_idx]),
        TickSeries(grid.t_hat, b.values[grid.t_hat_idx]),
    )


def poisson_sample_indices(n: int, lam: float, rng: np.random.Generator) -> np.ndarray:
    """Grid indices in ``{0, ..., n}`` hit by a discrete-time Poisson clock of mean gap ``lam``.

    Each grid point after 0 is observed independently with probability
    ``1 / lam`` (geometric waiting times), so the expected count is ``n / lam``
    and ``lam = 1`` keeps every point.  Index 0 is always kept.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if lam < 1:
        raise ValueError("lam is a mean waiting time in grid steps and must be >= 1")
    p = 1.0 / lam
    expected = int(n * p + 10 * np.sqrt(n * p) + 16)
    idx = np.cumsum(rng.geometric(p, size=expected))
    while idx[-1] <= n:
        idx = np.concatenate([idx, idx[-1] + np.cumsum(rng.geometric(p, size=expected))])
    return np.concatenate([[0], idx[idx <= n]]).astype(np.int64)


def poisson_sample_times(n: int, lam: float, rng: np.random.Generator) -> np.ndarray:
    return poisson_sample_indices(n, lam, rng) / n


def read_ticks_csv(path: str | Path, session_seconds: float = SESSION_SECONDS, log_prices: bool = True) -> TickSeries:
    """Read a ``time,price`` CSV; time is seconds from the session open."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"time", "price"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header 'time,price'")
        rows = [(float(r["time"]), float(r["price"])) for r in reader]
    if not rows:
        raise ValueError(f"{path}: no observations")
    arr = np.array(rows)
    times = arr[:, 0] / session_seconds
    prices = arr[:, 1]
    if log_prices:
        if np.any(prices <= 0):
            raise ValueError(f"{path}: nonpositive price cannot be log-transformed")
        prices = np.log(prices)
    return TickSeries(times, prices)


def write_ticks_csv(path: str | Path, series: TickSeries, session_seconds: float = SESSION_SECONDS, exp_prices: bool = True) -> None:
    prices = np.exp(series.values) if exp_prices else series.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "price"])
        for t, p in zip(series.times * session_seconds, prices):
            w.writerow([repr(float(t)), repr(float(p))])
