import math

import numpy as np
import pytest

from pthy.sampling import TickSeries

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_ticks(rng, n_max=200, n_min=20, scale=1.0):
    """Random nonsynchronous pair of tick series on [0, 1]."""
    out = []
    for _ in range(2):
        n = int(rng.integers(n_min, n_max + 1))
        t = np.unique(np.concatenate([[0.0], rng.uniform(0.0, 1.0, n - 1)]))
        v = np.cumsum(rng.standard_normal(t.size)) * scale / math.sqrt(t.size)
        out.append(TickSeries(t, v))
    return out


def brute_refresh(s, t):
    """Refresh times and next-tick designs straight from the definition (plain lists)."""
    r = [max(s[0], t[0])]
    sh, th = [s[0]], [t[0]]
    while True:
        ns = [x for x in s if x > r[-1]]
        nt = [x for x in t if x > r[-1]]
        if not ns or not nt:
            break
        sh.append(ns[0])
        th.append(nt[0])
        r.append(max(ns[0], nt[0]))
    return r, sh, th


def brute_preaverage(vals, kn, g):
    return [sum(g(p / kn) * (vals[i + p] - vals[i + p - 1]) for p in range(1, kn)) for i in range(len(vals) - kn + 1)]


def brute_hy(a, b, kn, g, psi_hy, rho1=math.inf, rho2=math.inf, t=1.0):
    """O(N^2) double loop over every pair, from the definition; independent of the package."""
    s, tt = list(a.times), list(b.times)
    r, sh, th = brute_refresh(s, tt)
    v1 = [a.values[s.index(x)] for x in sh]
    v2 = [b.values[tt.index(x)] for x in th]
    z1, z2 = brute_preaverage(v1, kn, g), brute_preaverage(v2, kn, g)
    end1 = lambda i: sh[i + kn] if i + kn < len(sh) else math.inf
    end2 = lambda j: th[j + kn] if j + kn < len(th) else math.inf
    terms = []
    for i in range(len(z1)):
        for j in range(len(z2)):
            overlap = sh[i] < end2(j) and th[j] < end1(i)
            if overlap and max(end1(i), end2(j)) <= t and z1[i] ** 2 <= rho1 and z2[j] ** 2 <= rho2:
                terms.append(z1[i] * z2[j])
    return math.fsum(terms) / (psi_hy * kn) ** 2


def tri(x):
    return min(x, 1.0 - x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
