"""Kernel estimate of the asymptotic variance of the PTHY estimator and feasible CIs.

Only exogenous noise is covered: the variance contribution of noise that is
correlated with efficient returns has no known estimator, and reports carry
``endogenous_term_estimated = False`` to say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .estimators import DEFAULT_THETA, PairDesign, PthyPath, Threshold, hy_estimate, pair_design
from .sampling import RefreshGrid, TickSeries
from .threshold import plut_rule
from .weights import WeightProfile


@dataclass(frozen=True, eq=False)
class AvarReport:
    estimate: float
    integrated_w2: float
    h_n: float
    b_n: float
    k_n: int
    level: float
    ci: tuple[float, float]
    non_positive: bool
    spot_series: dict = field(default_factory=dict, repr=False)
    endogenous_term_estimated: bool = False

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "integrated_w2": self.integrated_w2,
            "h_n": self.h_n,
            "b_n": self.b_n,
            "k_n": self.k_n,
            "level": self.level,
            "ci": list(self.ci),
            "non_positive": self.non_positive,
            "endogenous_term_estimated": self.endogenous_term_estimated,
        }


def _window_length(s: np.ndarray, h: float) -> np.ndarray:
    # the window is clipped at 0, so near the open it is shorter than h
    return s - np.maximum(s - h, 0.0)


def _design_pairs(design: PairDesign) -> dict[tuple[int, int], PairDesign]:
    g, k, p = design.grid, design.k_n, design.profile
    return {
        (1, 1): PairDesign(g, k, design.z1, design.z1, p),
        (1, 2): design,
        (2, 2): PairDesign(g, k, design.z2, design.z2, p),
    }


def spot_quadcov_paths(design: PairDesign, s, h_n: float, rho1: Threshold = None, rho2: Threshold = None) -> dict:
    """Difference quotients of the PTHY paths for (1,1), (1,2), (2,2) at times ``s``."""
    if h_n <= 0:
        raise ValueError("h_n must be positive")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    r = design.grid.r
    lo = np.maximum(s - h_n, 0.0)
    has = np.searchsorted(r, s, side="right") - np.searchsorted(r, lo, side="right")
    if np.any(has < 1) or np.any(s <= 0):
        raise ValueError("no refresh time inside the spot window")
    th = {1: rho1, 2: rho2}
    L = _window_length(s, h_n)
    out = {}
    for (l, m), d in _design_pairs(design).items():
        path = PthyPath(d, th[l], th[m])
        out[(l, m)] = (path(s) - path(lo)) / L
    return out


def spot_quadcov(
    a: TickSeries,
    b: TickSeries,
    s: float,
    h_n: float,
    theta: float = DEFAULT_THETA,
    profile: WeightProfile | None = None,
    thresholds: Threshold = None,
) -> np.ndarray:
    """2x2 spot quadratic covariation estimate at time ``s``."""
    design = pair_design(a, b, theta, profile)
    q = spot_quadcov_paths(design, s, h_n, thresholds, thresholds)
    x11, x12, x22 = (float(q[k][0]) for k in ((1, 1), (1, 2), (2, 2)))
    return np.array([[x11, x12], [x12, x22]])


def noise_cov_estimates(
    a: TickSeries,
    b: TickSeries,
    grid: RefreshGrid,
    s,
    h_n: float,
    k_n: int,
    allow_empty: bool = False,
):
    """Negative first-order autocovariance estimates of the noise near ``s``.

    Returns ``(psi11, psi22, psi12chi)``; each sums products of adjacent
    returns of the refresh-sampled series over the refresh times in
    ``(s - h_n, s]``.  The cross term only counts refresh intervals where both
    assets tick at the same time.  An empty window raises unless
    ``allow_empty``, in which case it contributes zero.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    v1 = a.values[grid.s_hat_idx]
    v2 = b.values[grid.t_hat_idx]
    if v1.size < 3:
        raise ValueError("need at least three refresh times for noise autocovariances")
    d1, d2 = np.diff(v1), np.diff(v2)
    # term k = 1..K-1 is keyed by R^{k+1}
    key = grid.r[2:]
    t11 = d1[:-1] * d1[1:]
    t22 = d2[:-1] * d2[1:]
    common = grid.s_hat[1:-1] == grid.t_hat[1:-1]
    t12 = 0.5 * (d1[:-1] * d2[1:] + d1[1:] * d2[:-1]) * common
    lo_idx = np.searchsorted(key, s - h_n, side="right")
    hi_idx = np.searchsorted(key, s, side="right")
    if not allow_empty and np.any(hi_idx <= lo_idx):
        raise ValueError("empty window for noise autocovariances")
    norm_ = -1.0 / (_window_length(s, h_n) * k_n ** 2)
    out = []
    for terms in (t11, t22, t12):
        cs = np.concatenate([[0.0], np.cumsum(terms)])
        out.append((cs[hi_idx] - cs[lo_idx]) * norm_)
    return tuple(out)


def w2_formula(
    x11, x12, x22, p11, p22, p12chi,
    gamma_k, gamma_k1,
    k_n: int,
    profile: WeightProfile,
):
    """Per-refresh-interval contribution to the integrated asymptotic variance."""
    kap, kt, kb = profile.kappa, profile.kappa_tilde, profile.kappa_bar
    inner = (
        kap * (x11 * x22 + x12 ** 2)
        + kt * (p11 * p22 + p12chi ** 2)
        + kb * (x11 * p22 + x22 * p11 + 2.0 * x12 * p12chi)
    )
    return k_n * profile.psi_hy ** -4 * inner * gamma_k * gamma_k1


def integrated_avar(
    a: TickSeries,
    b: TickSeries,
    theta: float = DEFAULT_THETA,
    profile: WeightProfile | None = None,
    thresholds: Threshold = "plut",
    h_n: float | None = None,
    level: float = 0.95,
    t: float = 1.0,
    design: PairDesign | None = None,
) -> AvarReport:
    """Estimate the integrated asymptotic variance up to ``t`` and a CI for PTHY.

    ``thresholds`` is ``"plut"``, a single threshold for both assets or a
    ``(rho1, rho2)`` tuple.  ``b_n`` is taken as one over the number of
    refresh intervals and ``h_n`` defaults to ``b_n ** (1/8)``.
    """
    if isinstance(thresholds, str) and thresholds == "plut":
        thresholds = plut_rule()
    rho1, rho2 = thresholds if isinstance(thresholds, tuple) else (thresholds, thresholds)
    design = design if design is not None else pair_design(a, b, theta, profile)
    grid = design.grid
    m = len(grid) - 1
    if m < 2:
        raise ValueError("need at least two refresh intervals")
    b_n = 1.0 / m
    h = b_n ** 0.125 if h_n is None else float(h_n)
    r = grid.r
    gamma = np.diff(r)  # |Gamma^k| for k = 1..m
    ks = np.arange(1, m)  # |Gamma^{k+1}| must exist
    ks = ks[r[ks] <= t]
    s = r[ks]
    q = spot_quadcov_paths(design, s, h, rho1, rho2)
    p11, p22, p12 = noise_cov_estimates(a, b, grid, s, h, design.k_n, allow_empty=True)
    w2 = w2_formula(
        q[(1, 1)], q[(1, 2)], q[(2, 2)], p11, p22, p12,
        gamma[ks - 1], gamma[ks], design.k_n, design.profile,
    )
    integrated = b_n ** -0.5 * math.fsum(w2)
    estimate = hy_estimate(design, rho1, rho2, t).value
    z = norm.ppf(0.5 + level / 2.0)
    half = z * b_n ** 0.25 * math.sqrt(max(integrated, 0.0))
    spot = {
        "r": s, "x11": q[(1, 1)], "x12": q[(1, 2)], "x22": q[(2, 2)],
        "psi11": p11, "psi22": p22, "psi12chi": p12, "w2": w2,
    }
    return AvarReport(
        estimate, integrated, h, b_n, design.k_n, level,
        (estimate - half, estimate + half), integrated <= 0.0, spot,
    )
