"""Pre-averaged local universal thresholds (PLUT).

The spot variance of the pre-averaged returns is estimated by a trailing
window of bipower products ``|Zbar[p]| |Zbar[p + k_n]|``; the threshold is that
estimate times ``2 (log N)^(1 + eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .preavg import PreAveraged

MU1 = math.sqrt(2.0 / math.pi)
DEFAULT_EPSILON = 0.2


@dataclass(frozen=True, eq=False)
class ThresholdProfile:
    epsilon: float
    K: int
    sigma_hat: np.ndarray
    rho: np.ndarray
    local: bool = True


def bandwidth(N: int) -> int:
    return math.ceil(N ** 0.75)


def _bipower_products(zbar: np.ndarray, k_n: int) -> np.ndarray:
    a = np.abs(zbar)
    return a[:-k_n] * a[k_n:] if a.size > k_n else np.empty(0)


def spot_variance_bipower(preavg: PreAveraged, K: int) -> np.ndarray:
    """Trailing-window spot variance of the pre-averaged returns.

    For ``i >= K`` the estimate averages ``mu1^-2 |Zbar[p]||Zbar[p+k_n]|`` over
    ``p = i-K, ..., i-2k_n``; earlier indices reuse the value at ``K``.
    """
    z = preavg.values
    N = z.size
    k_n = preavg.k_n
    if K <= 2 * k_n:
        raise ValueError(f"bandwidth K={K} must exceed 2*k_n={2 * k_n}")
    if K > N - 1:
        raise ValueError(f"bandwidth K={K} needs at least K+1={K + 1} pre-averaged returns, got {N}")
    prod = _bipower_products(z, k_n)
    cs = np.concatenate([[0.0], np.cumsum(prod)])
    i = np.arange(K, N)
    window = cs[i - 2 * k_n + 1] - cs[i - K]
    local = np.maximum(window, 0.0) / (MU1 ** 2 * (K - 2 * k_n + 1))
    return np.concatenate([np.full(K, local[0]), local])


def global_variance_bipower(preavg: PreAveraged) -> float:
    prod = _bipower_products(preavg.values, preavg.k_n)
    if prod.size:
        return float(np.mean(prod)) / MU1 ** 2
    return float(np.mean(preavg.values ** 2))


def plut(sigma_hat, N: int, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """``rho = 2 (log N)^(1+eps) * sigma_hat`` with the natural log."""
    if N < 3:
        raise ValueError("PLUT needs N >= 3 so that log N > 1")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return 2.0 * math.log(N) ** (1.0 + epsilon) * np.asarray(sigma_hat, dtype=float)


def plut_thresholds(preavg: PreAveraged, epsilon: float = DEFAULT_EPSILON, K: int | None = None) -> ThresholdProfile:
    """PLUT for one asset's pre-averaged returns.

    Falls back to a single global bipower variance when the sample is too
    short for the local window.
    """
    N = len(preavg)
    K = bandwidth(N) if K is None else K
    k_n = preavg.k_n
    if K <= 2 * k_n or N <= 2 * k_n + K:
        sigma = np.full(N, global_variance_bipower(preavg))
        local = False
    else:
        sigma = spot_variance_bipower(preavg, K)
        local = True
    return ThresholdProfile(epsilon, K, sigma, plut(sigma, max(N, 3), epsilon), local)


def plut_rule(epsilon: float = DEFAULT_EPSILON):
    """Threshold rule usable by :func:`pthy.estimators.pthy`."""

    def rule(preavg: PreAveraged) -> np.ndarray:
        return plut_thresholds(preavg, epsilon).rho

    rule.epsilon = epsilon
    return rule
