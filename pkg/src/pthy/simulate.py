"""Simulation models: latent semimartingales, jumps, noise and Poisson sampling.

Each replication is generated on an equispaced Euler grid of ``n`` steps over
``[0, 1]`` and observed at two independent Poisson clocks rounded up to the
grid.  Ground truth (integrated covariance and jump covariation) is computed
from the same discretized paths that feed the estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .sampling import TickSeries, poisson_sample_indices

JUMP_KINDS = ("no", "scp1", "vg")

# Model 1 / 3 factor stochastic volatility parameters (identical for both assets)
SV_MU = 0.03
SV_BETA1 = 1.0 / 8.0
SV_ALPHA = -1.0 / 40.0
SV_BETA0 = SV_BETA1 ** 2 / (2.0 * SV_ALPHA)
SV_RHO = -0.3
NOISE_ETA2 = 0.001
ENDO_DELTA = -0.01

# Model 2
M2_SIGMA = 0.2 / math.sqrt(252.0)
M2_X0 = math.log(8.0)
M2_TICK = 0.01
M2_CORR = 0.5


def replication_rng(master_seed: int, rep: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by a hash of ``(master_seed, rep)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, rep])))


@dataclass(frozen=True)
class SimScenario:
    model: int = 1
    jumps: str = "no"
    lam: tuple[float, float] = (3.0, 6.0)
    n: int = 23400
    c: float = 0.1
    gamma: float = 0.25
    seed: int = 0
    eta2: float = NOISE_ETA2
    delta: float = ENDO_DELTA

    def __post_init__(self):
        object.__setattr__(self, "jumps", self.jumps.lower())
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        if self.model not in (1, 2, 3):
            raise ValueError(f"unknown model {self.model}")
        if self.jumps not in JUMP_KINDS:
            raise ValueError(f"unknown jump kind {self.jumps!r}; expected one of {JUMP_KINDS}")
        if len(self.lam) != 2 or min(self.lam) < 1:
            raise ValueError("lam must be a pair of mean waiting times >= 1")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.c <= 0 or self.gamma <= 0:
            raise ValueError("jump parameters c and gamma must be positive")

    @property
    def jump_corr(self) -> float:
        """Loading of asset 2's jumps on asset 1's in the VG case."""
        if self.model == 2:
            return M2_CORR
        return math.sqrt(1 - SV_RHO ** 2) * math.sqrt(1 - SV_RHO ** 2)

    @property
    def normalization(self) -> float:
        """Divisor applied to reported errors (Model 2 is in daily-variance units)."""
        return M2_SIGMA ** 2 if self.model == 2 else 1.0

    def with_seed(self, seed: int) -> "SimScenario":
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SimOutput:
    ticks1: TickSeries
    ticks2: TickSeries
    true_ic: np.ndarray
    true_jv: np.ndarray
    extras: dict = field(default_factory=dict)


def sample_inverse_gaussian(mu: float, lam: float, rng: np.random.Generator, size=None):
    """Inverse Gaussian draws via the Michael-Schucany-Haas transformation."""
    if mu <= 0 or lam <= 0:
        raise ValueError("inverse Gaussian parameters must be positive")
    y = rng.standard_normal(size) ** 2
    # larger root is cancellation-free; the smaller one is mu^2 / larger
    big = mu + mu * mu * y / (2 * lam) + mu / (2 * lam) * np.sqrt(4 * mu * lam * y + (mu * y) ** 2)
    small = mu * mu / big
    u = rng.uniform(size=size)
    out = np.where(u <= mu / (mu + small), small, big)
    return float(out) if size is None else out


def gamma_subordinator_increments(c: float, gamma: float, n: int, rng: np.random.Generator, size: int | None = None):
    """Increments over ``n`` equal steps of a Gamma process with ``S_1 ~ Gamma(c/gamma, rate 1/gamma)``."""
    if c <= 0 or gamma <= 0:
        raise ValueError("gamma subordinator parameters must be positive")
    shape = (n,) if size is None else (size, n)
    return rng.gamma(c / (gamma * n), gamma, size=shape)


def gen_jumps(kind: str, c: float, gamma: float, R: float, n: int, rng: np.random.Generator):
    """Jump paths on the grid ``0, 1/n, ..., 1`` (length ``n + 1``, starting at 0)."""
    kind = kind.lower()
    if kind == "no":
        z = np.zeros(n + 1)
        return z, z.copy()
    if kind == "scp1":
        k = min(n, max(1, math.ceil(rng.uniform() * n)))
        size = rng.standard_normal() * math.sqrt(sample_inverse_gaussian(c, c * c / gamma, rng))
        path = np.zeros(n + 1)
        path[k:] = size
        return path, path.copy()
    if kind == "vg":
        inc = []
        for _ in range(2):
            s = gamma_subordinator_increments(c, gamma, n, rng)
            inc.append(rng.standard_normal(n) * np.sqrt(s))
        d1 = inc[0]
        d2 = R * inc[0] + math.sqrt(1 - R * R) * inc[1]
        return _path(d1), _path(d2)
    raise ValueError(f"unknown jump kind {kind!r}")


def _path(increments: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(increments)])


def _jump_truth(j1: np.ndarray, j2: np.ndarray, scale: float = 1.0) -> np.ndarray:
    d1, d2 = np.diff(j1) * scale, np.diff(j2) * scale
    c12 = float(np.sum(d1 * d2))
    return np.array([[float(np.sum(d1 * d1)), c12], [c12, float(np.sum(d2 * d2))]])


def _sampling(scn: SimScenario, rng: np.random.Generator):
    return (
        poisson_sample_indices(scn.n, scn.lam[0], rng),
        poisson_sample_indices(scn.n, scn.lam[1], rng),
    )


def _sv_latent(n: int, rng: np.random.Generator):
    """Euler paths of the factor SV model; returns (X, sigma) with shape (2, n+1)."""
    dt = 1.0 / n
    dB = rng.standard_normal((2, n)) * math.sqrt(dt)
    dW = rng.standard_normal(n) * math.sqrt(dt)
    rho0 = rng.standard_normal(2) * math.sqrt(-1.0 / (2.0 * SV_ALPHA))
    a = 1.0 + SV_ALPHA * dt
    factor = np.empty((2, n + 1))
    factor[:, 0] = rho0
    for l in range(2):
        factor[l, 1:] = lfilter([1.0], [1.0, -a], dB[l], zi=[a * rho0[l]])[0]
    sigma = np.exp(SV_BETA0 + SV_BETA1 * factor)
    s = sigma[:, :-1]
    dX = SV_MU * dt + s * (SV_RHO * dB + math.sqrt(1 - SV_RHO ** 2) * dW[None, :])
    X = np.concatenate([np.zeros((2, 1)), np.cumsum(dX, axis=1)], axis=1)
    return X, sigma


def _sv_truth(sigma: np.ndarray, n: int) -> np.ndarray:
    s = sigma[:, :-1]
    load = 1 - SV_RHO ** 2  # common-factor loading; B1 and B2 are independent
    v1 = float(np.sum(s[0] ** 2)) / n
    v2 = float(np.sum(s[1] ** 2)) / n
    c12 = float(np.sum(s[0] * s[1])) * load / n
    return np.array([[v1, c12], [c12, v2]])


def simulate_model1(scn: SimScenario, rng: np.random.Generator) -> SimOutput:
    """Factor stochastic volatility with additive, cross-correlated Gaussian noise."""
    n = scn.n
    idx1, idx2 = _sampling(scn, rng)
    X, sigma = _sv_latent(n, rng)
    J1, J2 = gen_jumps(scn.jumps, scn.c, scn.gamma, scn.jump_corr, n, rng)
    omega2 = scn.eta2 * np.sqrt(np.mean(sigma[:, 1:] ** 4, axis=1))
    R = scn.jump_corr
    e = rng.standard_normal((2, n + 1))
    U1 = math.sqrt(omega2[0]) * e[0]
    U2 = math.sqrt(omega2[1]) * (R * e[0] + math.sqrt(1 - R * R) * e[1])
    Z1 = X[0] + J1 + U1
    Z2 = X[1] + J2 + U2
    return SimOutput(
        TickSeries(idx1 / n, Z1[idx1]),
        TickSeries(idx2 / n, Z2[idx2]),
        _sv_truth(sigma, n),
        _jump_truth(J1, J2),
        {"omega2": omega2},
    )


def simulate_model3(scn: SimScenario, rng: np.random.Generator) -> SimOutput:
    """Model-1 latent dynamics with noise equal to a scaled lagged efficient return."""
    n = scn.n
    idx1, idx2 = _sampling(scn, rng)
    X, sigma = _sv_latent(n, rng)
    J1, J2 = gen_jumps(scn.jumps, scn.c, scn.gamma, scn.jump_corr, n, rng)
    obs = []
    noises = []
    for l, (idx, lam, J) in enumerate(((idx1, scn.lam[0], J1), (idx2, scn.lam[1], J2))):
        x = X[l, idx]
        # S^{-1} = 0, so the first observation carries no noise
        U = scn.delta * math.sqrt(n / lam) * np.diff(x, prepend=x[0])
        noises.append(U)
        obs.append(TickSeries(idx / n, x + J[idx] + U))
    return SimOutput(obs[0], obs[1], _sv_truth(sigma, n), _jump_truth(J1, J2), {"noise": noises})


def simulate_model2(scn: SimScenario, rng: np.random.Generator) -> SimOutput:
    """Constant volatility, prices rounded to a tick with a Bernoulli round-up error."""
    n = scn.n
    idx1, idx2 = _sampling(scn, rng)
    dt = 1.0 / n
    dW = rng.standard_normal((2, n)) * math.sqrt(dt)
    dW[1] = M2_CORR * dW[0] + math.sqrt(1 - M2_CORR ** 2) * dW[1]
    X = M2_X0 + M2_SIGMA * np.concatenate([np.zeros((2, 1)), np.cumsum(dW, axis=1)], axis=1)
    J1, J2 = gen_jumps(scn.jumps, scn.c, scn.gamma, scn.jump_corr, n, rng)
    Z = X + M2_SIGMA * np.vstack([J1, J2])
    observed = np.empty_like(Z)
    for l in range(2):
        observed[l] = _round_with_error(Z[l], M2_TICK, rng)
    s2 = M2_SIGMA ** 2
    true_ic = np.array([[s2, M2_CORR * s2], [M2_CORR * s2, s2]])
    return SimOutput(
        TickSeries(idx1 / n, observed[0, idx1]),
        TickSeries(idx2 / n, observed[1, idx2]),
        true_ic,
        _jump_truth(J1, J2, M2_SIGMA),
        {},
    )


def _round_with_error(z: np.ndarray, tick: float, rng: np.random.Generator) -> np.ndarray:
    """``log(tick * floor(exp(z + u) / tick))`` with the Bernoulli up-rounding ``u``.

    With probability ``p`` the error lifts the price exactly onto the upper
    tick, otherwise it is zero; ``p`` makes the log-price unbiased.
    """
    price = np.exp(z)
    lo = np.floor(price / tick)
    hi = np.ceil(price / tick)
    on_tick = hi == lo
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.log(price / (tick * lo)) / np.log(hi / lo)
    p = np.where(on_tick, 0.0, p)
    up = rng.uniform(size=z.shape) < p
    return np.log(tick * np.where(up, hi, lo))


_MODELS = {1: simulate_model1, 2: simulate_model2, 3: simulate_model3}


def simulate(scn: SimScenario, rng: np.random.Generator | None = None) -> SimOutput:
    rng = rng if rng is not None else replication_rng(scn.seed, 0)
    return _MODELS[scn.model](scn, rng)


def simulate_brownian_pair(n: int, corr: float, rng: np.random.Generator) -> SimOutput:
    """Noiseless, synchronously observed unit-variance Brownian motions with correlation ``corr``."""
    dt = 1.0 / n
    dW = rng.standard_normal((2, n)) * math.sqrt(dt)
    dW[1] = corr * dW[0] + math.sqrt(1 - corr * corr) * dW[1]
    X = np.concatenate([np.zeros((2, 1)), np.cumsum(dW, axis=1)], axis=1)
    t = np.arange(n + 1) / n
    ic = np.array([[1.0, corr], [corr, 1.0]])
    return SimOutput(TickSeries(t, X[0]), TickSeries(t, X[1]), ic, np.zeros((2, 2)))


def inject_common_jump(out: SimOutput, size, rng: np.random.Generator | None = None, at: float | None = None) -> SimOutput:
    """Add one co-jump of sizes ``(j1, j2)`` (or a common scalar) to both assets.

    The jump time is ``at`` or, when omitted, uniform on ``(0, 1)``.  The
    product in ``true_jv`` counts only what the observations can see: an
    asset with no tick at or after the jump time contributes zero.
    """
    sizes = np.broadcast_to(np.asarray(size, dtype=float), (2,))
    tau = float(at) if at is not None else rng.uniform(0.0, 1.0)
    series = []
    seen = []
    for ts, j in zip((out.ticks1, out.ticks2), sizes):
        after = ts.times >= tau
        series.append(TickSeries(ts.times, ts.values + j * after))
        seen.append(j if after.any() else 0.0)
    jv = out.true_jv + np.outer(seen, seen)
    return SimOutput(series[0], series[1], out.true_ic, jv, {**out.extras, "jump_time": tau})
