import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_hy, random_ticks, tri
from pthy.estimators import (
    FIVE_MINUTES,
    InsufficientDataError,
    PthyPath,
    bipower_covariation,
    bipower_variation,
    hy_estimate,
    jump_covariation,
    pair_design,
    phy,
    pthy,
    realized_covariance,
    rv_minus_bpv,
    subsampled_bpv,
)
from pthy.sampling import TickSeries
from pthy.threshold import plut_rule


def full_matrix_hy(design, rho1=None, rho2=None, t=1.0):
    """Every (i, j) pair, no band, same pre-averaged inputs."""
    z1, z2 = design.z1, design.z2
    r1 = np.full(len(z1), np.inf) if rho1 is None else np.broadcast_to(rho1, len(z1))
    r2 = np.full(len(z2), np.inf) if rho2 is None else np.broadcast_to(rho2, len(z2))
    i, j = np.meshgrid(np.arange(len(z1)), np.arange(len(z2)), indexing="ij")
    i, j = i.ravel(), j.ravel()
    ov = (z1.anchor_times[i] < z2.end_times[j]) & (z2.anchor_times[j] < z1.end_times[i])
    ok = ov & (np.maximum(z1.end_times[i], z2.end_times[j]) <= t)
    ok &= (z1.values[i] ** 2 <= r1[i]) & (z2.values[j] ** 2 <= r2[j])
    return math.fsum(z1.values[i[ok]] * z2.values[j[ok]]) * design.scale


@pytest.mark.parametrize("seed", range(8))
def test_against_definition_loop(seed):
    rng = np.random.default_rng(seed)
    a, b = random_ticks(rng, n_max=40, n_min=15)
    kn = int(rng.integers(2, 4))
    rho = float(rng.uniform(0.0, 0.05))
    t = float(rng.uniform(0.5, 1.0))
    assert phy(a, b, k_n=kn).value == pytest.approx(brute_hy(a, b, kn, tri, 0.25), rel=1e-12, abs=1e-15)
    got = pthy(a, b, rho1=rho, rho2=rho, t=t, k_n=kn).value
    assert got == pytest.approx(brute_hy(a, b, kn, tri, 0.25, rho, rho, t), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_band_equals_full_matrix_exactly(seed):
    rng = np.random.default_rng(100 + seed)
    a, b = random_ticks(rng, n_max=500, n_min=50)
    d = pair_design(a, b)
    rho1 = rng.uniform(0, 2, len(d.z1)) * np.median(d.z1.values ** 2)
    rho2 = rng.uniform(0, 2, len(d.z2)) * np.median(d.z2.values ** 2)
    assert hy_estimate(d).value == full_matrix_hy(d)
    assert hy_estimate(d, rho1, rho2).value == full_matrix_hy(d, rho1, rho2)
    assert hy_estimate(d, rho1, rho2, 0.7).value == full_matrix_hy(d, rho1, rho2, 0.7)


def test_infinite_threshold_is_phy():
    rng = np.random.default_rng(3)
    a, b = random_ticks(rng, n_max=2000, n_min=500)
    assert pthy(a, b, rho1=np.inf, rho2=np.inf).value == phy(a, b).value


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 2.0, 4.0, -1.0]), st.floats(-3, 3))
def test_bilinearity(seed, c, shift):
    a, b = random_ticks(np.random.default_rng(seed), n_max=120)
    base = phy(a, b).value
    assert phy(a.scaled(c, shift), b).value == pytest.approx(c * base, rel=1e-10, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetry_on_synchronous_input(seed):
    rng = np.random.default_rng(seed)
    t = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 80))])
    a = TickSeries(t, np.cumsum(rng.standard_normal(t.size)))
    b = TickSeries(t, np.cumsum(rng.standard_normal(t.size)))
    assert phy(a, b).value == pytest.approx(phy(b, a).value, rel=1e-13, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 10**6))
def test_monotone_truncation(seed, pick):
    rng = np.random.default_rng(seed)
    a, b = random_ticks(rng, n_max=150)
    d = pair_design(a, b)
    rho1 = np.full(len(d.z1), np.median(d.z1.values ** 2))
    rho2 = np.full(len(d.z2), np.median(d.z2.values ** 2))
    before = hy_estimate(d, rho1, rho2)
    raised = rho1.copy()
    raised[pick % raised.size] = np.inf
    after = hy_estimate(d, raised, rho2)
    assert after.n_truncated <= before.n_truncated
    assert after.n_pairs == before.n_pairs


def test_zero_threshold_keeps_nothing():
    a, b = random_ticks(np.random.default_rng(9))
    est = pthy(a, b, rho1=0.0, rho2=0.0)
    assert est.value == 0.0 and est.n_truncated == est.n_pairs


def test_path_matches_pointwise():
    a, b = random_ticks(np.random.default_rng(11), n_max=300)
    d = pair_design(a, b)
    rule = plut_rule()
    path = PthyPath(d, rule, rule)
    for t in (0.2, 0.55, 1.0):
        assert path(t) == pytest.approx(hy_estimate(d, rule, rule, t).value, rel=1e-12, abs=1e-14)


def test_noiseless_brownian_consistency():
    rng = np.random.default_rng(4)
    n = 20000
    t = np.arange(n + 1) / n
    w = np.cumsum(rng.standard_normal((2, n)) / math.sqrt(n), axis=1)
    x1 = np.concatenate([[0], w[0]])
    x2 = np.concatenate([[0], 0.6 * w[0] + 0.8 * w[1]])
    est = phy(TickSeries(t, x1), TickSeries(t, x2)).value
    assert est == pytest.approx(0.6, abs=0.1)


def test_jump_covariation_sees_a_common_jump():
    rng = np.random.default_rng(8)
    n = 23400
    t = np.arange(n + 1) / n
    x = np.cumsum(rng.standard_normal((2, n + 1)) / math.sqrt(n), axis=1)
    x[:, n // 2:] += 1.0
    a, b = TickSeries(t, x[0]), TickSeries(t, x[1])
    rule = plut_rule()
    assert jump_covariation(a, b, rho1=rule, rho2=rule) == pytest.approx(1.0, rel=0.1)


def test_too_few_refresh_times():
    a = TickSeries(np.array([0, 0.5]), np.zeros(2))
    with pytest.raises(InsufficientDataError):
        phy(a, a, k_n=3)


def test_threshold_length_checked():
    a, b = random_ticks(np.random.default_rng(2))
    with pytest.raises(ValueError, match="length"):
        pthy(a, b, rho1=np.ones(3), rho2=None)


# --- benchmarks ---


def test_bpv_hand_case():
    # grid prices 0,1,3,2 at 5-minute marks; bipower sum |1||2| + |2||-1| = 4
    t = np.array([0.0, 1, 2, 3]) * FIVE_MINUTES
    s = TickSeries(t, np.array([0.0, 1.0, 3.0, 2.0]))
    mu1 = math.sqrt(2 / math.pi)
    assert bipower_variation(s) == pytest.approx(4 / mu1 ** 2)


def test_bpv_uses_last_tick():
    # price jumps just after the first 5-minute mark, observed at the second
    t = np.array([0.0, 1.5, 3.0]) * FIVE_MINUTES
    s = TickSeries(t, np.array([0.0, 1.0, 2.0]))
    mu1 = math.sqrt(2 / math.pi)
    # grid 0,0,1,2 -> returns 0,1,1 -> bipower 0*1 + 1*1
    assert bipower_variation(s) == pytest.approx(1 / mu1 ** 2)


def test_realized_covariance():
    t = np.linspace(0, 1, 5)
    a = TickSeries(t, np.array([0.0, 1, 0, 1, 0]))
    b = TickSeries(t, np.array([0.0, 2, 2, 4, 4]))
    assert realized_covariance(a, b) == 4.0


def test_polarization_reduces_to_variance():
    a, _ = random_ticks(np.random.default_rng(5), n_max=3000, n_min=2000)
    assert bipower_covariation(a, a) == pytest.approx(subsampled_bpv(a), rel=1e-12)


def test_rv_minus_bpv_detects_jump():
    rng = np.random.default_rng(6)
    n = 23400
    t = np.arange(n + 1) / n
    x = np.cumsum(rng.standard_normal(n + 1) * 0.1 / math.sqrt(n))
    x[n // 3:] += 0.5
    assert rv_minus_bpv(TickSeries(t, x)) == pytest.approx(0.25, rel=0.1)
