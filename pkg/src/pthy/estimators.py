"""Pre-averaged (truncated) Hayashi-Yoshida estimators and fixed-grid benchmarks.

The double sum over pre-averaged returns only has nonzero overlap indicators
for ``|i - j| <= 2 k_n + 1`` on refresh-interpolated designs, so the sum is
assembled on that band.  Kept terms are added with :func:`math.fsum`, which
returns the correctly rounded sum whatever the order of the terms; banded,
brute-force and truncated-with-infinite-threshold evaluations therefore agree
to the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .preavg import PreAveraged, preaverage, select_kn
from .sampling import SESSION_SECONDS, RefreshGrid, TickSeries, refresh_grid
from .weights import WeightProfile, make_min_weight

MU1 = math.sqrt(2.0 / math.pi)
DEFAULT_THETA = 0.15
FIVE_MINUTES = 300.0 / SESSION_SECONDS
ONE_SECOND = 1.0 / SESSION_SECONDS

Threshold = Union[None, float, np.ndarray, Callable[[PreAveraged], np.ndarray]]


class InsufficientDataError(ValueError):
    def __init__(self, msg: str, required: int, available: int):
        super().__init__(f"{msg}: need {required}, have {available}")
        self.required = required
        self.available = available


@dataclass(frozen=True)
class CovEstimate:
    value: float
    n_pairs: int
    n_truncated: int
    k_n: int
    t: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class PairDesign:
    """Refresh grid plus pre-averaged returns of both assets on it."""

    grid: RefreshGrid
    k_n: int
    z1: PreAveraged
    z2: PreAveraged
    profile: WeightProfile

    @property
    def band(self) -> int:
        return 2 * self.k_n + 1

    @property
    def scale(self) -> float:
        return 1.0 / (self.profile.psi_hy * self.k_n) ** 2

    @cached_property
    def terms(self) -> "HYTerms":
        return band_terms(self.z1, self.z2, self.band)


@dataclass(frozen=True, eq=False)
class HYTerms:
    """All ``(i, j)`` pairs with a nonzero overlap indicator, in row-major order."""

    i: np.ndarray
    j: np.ndarray
    prod: np.ndarray
    entry: np.ndarray  # time from which the pair enters the sum


def pair_design(
    a: TickSeries,
    b: TickSeries,
    theta: float = DEFAULT_THETA,
    profile: WeightProfile | None = None,
    k_n: int | None = None,
) -> PairDesign:
    """Synchronize ``a`` and ``b`` and pre-average both on the refresh designs.

    ``k_n`` defaults to ``ceil(theta * sqrt(m))`` with ``m`` the number of
    refresh intervals.  For ``a is b`` this is the asset's own design.
    """
    profile = profile or make_min_weight()
    grid = refresh_grid(a, b)
    m = len(grid) - 1
    k_n = select_kn(m, theta) if k_n is None else k_n
    if len(grid) < k_n + 1:
        raise InsufficientDataError("too few refresh times for the pre-averaging window", k_n + 1, len(grid))
    z1 = preaverage(a.values[grid.s_hat_idx], k_n, profile, grid.s_hat)
    z2 = preaverage(b.values[grid.t_hat_idx], k_n, profile, grid.t_hat)
    return PairDesign(grid, k_n, z1, z2, profile)


def _overlap(z1: PreAveraged, z2: PreAveraged, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    return (z1.anchor_times[i] < z2.end_times[j]) & (z2.anchor_times[j] < z1.end_times[i])


def _offset_pairs(n1: int, n2: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    lo = max(0, -d)
    hi = min(n1, n2 - d)
    i = np.arange(lo, max(lo, hi))
    return i, i + d


def band_terms(z1: PreAveraged, z2: PreAveraged, band: int) -> HYTerms:
    n1, n2 = len(z1), len(z2)
    ii, jj = [], []
    for d in range(-band, band + 1):
        i, j = _offset_pairs(n1, n2, d)
        keep = _overlap(z1, z2, i, j)
        ii.append(i[keep])
        jj.append(j[keep])
    if __debug__:
        for d in (-band - 1, band + 1):
            i, j = _offset_pairs(n1, n2, d)
            assert not np.any(_overlap(z1, z2, i, j)), "overlapping pair outside the band"
    i = np.concatenate(ii)
    j = np.concatenate(jj)
    order = np.lexsort((j, i))
    i, j = i[order], j[order]
    prod = z1.values[i] * z2.values[j]
    entry = np.maximum(z1.end_times[i], z2.end_times[j])
    return HYTerms(i, j, prod, entry)


def resolve_threshold(rho: Threshold, z: PreAveraged) -> np.ndarray:
    if rho is None:
        return np.full(len(z), np.inf)
    if callable(rho):
        rho = rho(z)
    rho = np.asarray(rho, dtype=float)
    if rho.ndim == 0:
        return np.full(len(z), float(rho))
    if rho.shape != (len(z),):
        raise ValueError(f"threshold length {rho.size} does not match {len(z)} pre-averaged returns")
    if np.any(rho < 0):
        raise ValueError("thresholds must be nonnegative")
    return rho


def hy_estimate(design: PairDesign, rho1: Threshold = None, rho2: Threshold = None, t: float = 1.0) -> CovEstimate:
    """Evaluate the (truncated) pre-averaged HY sum on a prepared design."""
    terms = design.terms
    in_time = terms.entry <= t
    keep1 = design.z1.values ** 2 <= resolve_threshold(rho1, design.z1)
    keep2 = design.z2.values ** 2 <= resolve_threshold(rho2, design.z2)
    kept = in_time & keep1[terms.i] & keep2[terms.j]
    n_pairs = int(np.count_nonzero(in_time))
    value = math.fsum(terms.prod[kept]) * design.scale
    return CovEstimate(value, n_pairs, n_pairs - int(np.count_nonzero(kept)), design.k_n, t)


def phy(
    a: TickSeries,
    b: TickSeries,
    theta: float = DEFAULT_THETA,
    profile: WeightProfile | None = None,
    t: float = 1.0,
    k_n: int | None = None,
) -> CovEstimate:
    """Pre-averaged Hayashi-Yoshida estimator on the refresh-interpolated designs."""
    return hy_estimate(pair_design(a, b, theta, profile, k_n), None, None, t)


def pthy(
    a: TickSeries,
    b: TickSeries,
    theta: float = DEFAULT_THETA,
    profile: WeightProfile | None = None,
    rho1: Threshold = None,
    rho2: Threshold = None,
    t: float = 1.0,
    k_n: int | None = None,
) -> CovEstimate:
    """Pre-averaged truncated Hayashi-Yoshida estimator.

    ``rho1``/``rho2`` are per-index thresholds on the squared pre-averaged
    returns of each asset: an array, a scalar, ``None`` (no truncation) or a
    rule mapping a :class:`PreAveraged` to an array, e.g.
    :func:`pthy.threshold.plut_rule`.
    """
    return hy_estimate(pair_design(a, b, theta, profile, k_n), rho1, rho2, t)


def jump_covariation(
    a: TickSeries,
    b: TickSeries,
    theta: float = DEFAULT_THETA,
    profile: WeightProfile | None = None,
    rho1: Threshold = None,
    rho2: Threshold = None,
    t: float = 1.0,
    k_n: int | None = None,
) -> float:
    """PHY minus PTHY, an estimate of the sum of co-jump products."""
    design = pair_design(a, b, theta, profile, k_n)
    return hy_estimate(design, None, None, t).value - hy_estimate(design, rho1, rho2, t).value


class PthyPath:
    """The estimator as a function of the evaluation time ``t``."""

    def __init__(self, design: PairDesign, rho1: Threshold = None, rho2: Threshold = None):
        terms = design.terms
        keep1 = design.z1.values ** 2 <= resolve_threshold(rho1, design.z1)
        keep2 = design.z2.values ** 2 <= resolve_threshold(rho2, design.z2)
        kept = keep1[terms.i] & keep2[terms.j] & np.isfinite(terms.entry)
        order = np.argsort(terms.entry[kept], kind="stable")
        self.entry = terms.entry[kept][order]
        self.cum = np.concatenate([[0.0], np.cumsum(terms.prod[kept][order])]) * design.scale

    def __call__(self, t):
        return self.cum[np.searchsorted(self.entry, t, side="right")]


# --- fixed-grid benchmarks -------------------------------------------------


def realized_covariance(a: TickSeries, b: TickSeries, t: float = 1.0) -> float:
    """Sum of products of matched increments on a common time grid, up to ``t``."""
    if a.times.shape != b.times.shape or np.any(a.times != b.times):
        raise ValueError("realized covariance needs both series on identical times")
    upto = a.times <= t
    return float(np.sum(np.diff(a.values[upto]) * np.diff(b.values[upto])))


def _grid_prices(series: TickSeries, delta: float, origins: np.ndarray, end: float = 1.0):
    """Last-tick prices on ``origin + m * delta`` grids; rows are origins.

    Returns the price matrix and a mask of grid points inside the session.
    The final partial interval is dropped.
    """
    origins = np.asarray(origins, dtype=float)
    m_max = int(np.floor((end - origins.min()) / delta + 1e-9))
    grid = origins[:, None] + delta * np.arange(m_max + 1)[None, :]
    valid = grid <= end + 1e-12
    idx = np.searchsorted(series.times, grid + 1e-12, side="right") - 1
    if np.any(idx[valid] < 0):
        raise ValueError("grid starts before the first observation")
    prices = series.values[np.clip(idx, 0, None)]
    return prices, valid


def _bpv_rows(r: np.ndarray, rvalid: np.ndarray) -> np.ndarray:
    pair_ok = rvalid[:, :-1] & rvalid[:, 1:]
    if np.any(pair_ok.sum(axis=1) < 1):
        raise ValueError("bipower variation needs at least two returns on every grid")
    prod = np.abs(r[:, :-1]) * np.abs(r[:, 1:])
    return np.where(pair_ok, prod, 0.0).sum(axis=1) / MU1 ** 2


def _returns(prices: np.ndarray, valid: np.ndarray):
    return np.diff(prices, axis=1), valid[:, 1:]


def _origins(shifts: int, shift_step: float) -> np.ndarray:
    if shifts < 1:
        raise ValueError("need at least one shift")
    return np.arange(shifts) * shift_step


def bipower_variation(series: TickSeries, delta: float = FIVE_MINUTES, origin: float = 0.0) -> float:
    """``mu1^-2 sum |r_i||r_{i+1}|`` over ``delta``-spaced last-tick returns."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    r, rv = _returns(*_grid_prices(series, delta, np.array([origin])))
    return float(_bpv_rows(r, rv)[0])


def subsampled_bpv(
    series: TickSeries,
    delta: float = FIVE_MINUTES,
    shifts: int = 300,
    shift_step: float = ONE_SECOND,
) -> float:
    """Average of bipower variations over grids shifted by ``shift_step``."""
    r, rv = _returns(*_grid_prices(series, delta, _origins(shifts, shift_step)))
    return float(np.mean(_bpv_rows(r, rv)))


def subsampled_rv(
    series: TickSeries,
    delta: float = FIVE_MINUTES,
    shifts: int = 300,
    shift_step: float = ONE_SECOND,
) -> float:
    r, rv = _returns(*_grid_prices(series, delta, _origins(shifts, shift_step)))
    return float(np.mean(np.where(rv, r * r, 0.0).sum(axis=1)))


def _pair_returns(a: TickSeries, b: TickSeries, delta: float, shifts: int, shift_step: float):
    origins = _origins(shifts, shift_step)
    pa, valid = _grid_prices(a, delta, origins)
    pb, _ = _grid_prices(b, delta, origins)
    ra, rv = _returns(pa, valid)
    rb, _ = _returns(pb, valid)
    return ra, rb, rv


def bipower_covariation(
    a: TickSeries,
    b: TickSeries,
    delta: float = FIVE_MINUTES,
    shifts: int = 300,
    shift_step: float = ONE_SECOND,
) -> float:
    """Polarized bipower covariation ``(BPV(a+b) - BPV(a-b)) / 4`` on common grids."""
    ra, rb, rv = _pair_returns(a, b, delta, shifts, shift_step)
    return float(np.mean((_bpv_rows(ra + rb, rv) - _bpv_rows(ra - rb, rv)) / 4.0))


def rv_minus_bpv(
    a: TickSeries,
    b: TickSeries | None = None,
    delta: float = FIVE_MINUTES,
    shifts: int = 300,
    shift_step: float = ONE_SECOND,
) -> float:
    """Subsampled realized (co)variance minus subsampled bipower (co)variation."""
    if b is None:
        r, rv = _returns(*_grid_prices(a, delta, _origins(shifts, shift_step)))
        rvar = np.where(rv, r * r, 0.0).sum(axis=1)
        return float(np.mean(rvar - _bpv_rows(r, rv)))
    ra, rb, rv = _pair_returns(a, b, delta, shifts, shift_step)
    rcov = np.where(rv, ra * rb, 0.0).sum(axis=1)
    bcov = (_bpv_rows(ra + rb, rv) - _bpv_rows(ra - rb, rv)) / 4.0
    return float(np.mean(rcov - bcov))
