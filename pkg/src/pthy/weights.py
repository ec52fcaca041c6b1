"""Pre-averaging weight functions and the constants derived from them.

A weight ``g`` lives on ``[0, 1]`` with ``g(0) = g(1) = 0`` and is extended by
zero outside that interval.  Every constant used downstream (``psi_hy``,
``psi1``, ``psi2`` and the three kappa integrals of the asymptotic variance)
is an integral of a piecewise polynomial when ``g`` is piecewise linear, so
integration is done with Gauss-Legendre rules on the pieces between kinks.
That makes the result exact up to rounding for tabulated weights, and the
resolution check (every piece split in two) guards the smooth case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

Func = Callable[[np.ndarray], np.ndarray]

_GL_ORDER = 12
_RESOLUTION_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Two quadrature resolutions disagreed beyond tolerance."""


def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _refine(breaks: np.ndarray, splits: int) -> np.ndarray:
    if splits <= 1:
        return breaks
    pieces = [np.linspace(a, b, splits + 1)[:-1] for a, b in zip(breaks[:-1], breaks[1:])]
    return np.concatenate(pieces + [breaks[-1:]])


def _piecewise_quad(f: Func, breaks: np.ndarray, order: int = _GL_ORDER, splits: int = 1) -> float:
    """Integrate ``f`` over ``[breaks[0], breaks[-1]]`` piece by piece."""
    breaks = _refine(np.unique(breaks), splits)
    if breaks.size < 2:
        return 0.0
    nodes, wts = _gauss_legendre(order)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    x = 0.5 * (b - a) * nodes[None, :] + 0.5 * (a + b)
    vals = f(x.ravel()).reshape(x.shape)
    return float(np.sum(0.5 * (b - a) * vals * wts[None, :]))


def _support(f: Func) -> Func:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.0) & (x <= 1.0)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = f(x[inside])
        return out

    return wrapped


class _Antiderivative:
    """``F(y) = int_0^{clip(y, 0, 1)} f``, evaluated with piecewise Gauss-Legendre."""

    def __init__(self, f: Func, breaks: np.ndarray, order: int, splits: int):
        self.f = f
        self.breaks = _refine(np.unique(np.clip(np.concatenate([breaks, [0.0, 1.0]]), 0.0, 1.0)), splits)
        self.nodes, self.wts = _gauss_legendre(order)
        cum = [0.0]
        for a, b in zip(self.breaks[:-1], self.breaks[1:]):
            cum.append(cum[-1] + _piecewise_quad(f, np.array([a, b]), order))
        self.cum = np.array(cum)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self.breaks, y, side="right") - 1, 0, self.breaks.size - 2)
        a = self.breaks[idx]
        half = 0.5 * (y - a)
        x = half[..., None] * (self.nodes + 1.0) + a[..., None]
        partial = np.sum(self.f(x.ravel()).reshape(x.shape) * self.wts, axis=-1) * half
        return self.cum[idx] + partial


def _psi_breaks_u(x: float, b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    cand = np.concatenate([b1, b2 - x - 1.0, b2 - x + 1.0, [0.0, 1.0]])
    return np.unique(cand[(cand >= 0.0) & (cand <= 1.0)])


def psi_cross(
    f1: Func,
    f2: Func,
    x: float,
    breakpoints: Sequence[float] = (),
    order: int = _GL_ORDER,
    splits: int = 1,
) -> float:
    """Double integral ``int_0^1 int_{x+u-1}^{x+u+1} f1(u) f2(v) dv du``.

    Both functions are taken to vanish outside ``[0, 1]``.  ``breakpoints``
    lists the kinks of ``f1`` and ``f2`` inside ``[0, 1]``; supplying them
    makes the rule exact for piecewise polynomials.
    """
    b = np.unique(np.concatenate([np.asarray(breakpoints, dtype=float), [0.0, 1.0]]))
    g1 = _support(f1)
    F2 = _Antiderivative(_support(f2), b, order, splits)
    return _psi_at(g1, F2, float(x), b, order, splits)


def _psi_at(g1: Func, F2: _Antiderivative, x: float, b: np.ndarray, order: int, splits: int) -> float:
    if abs(x) >= 2.0:
        return 0.0
    ub = _psi_breaks_u(x, b, b)
    return _piecewise_quad(lambda u: g1(u) * (F2(x + u + 1.0) - F2(x + u - 1.0)), ub, order, splits)


def _kappa_breaks(b: np.ndarray) -> np.ndarray:
    diffs = (b[None, :] - b[:, None]).ravel()
    cand = np.concatenate([diffs - 1.0, diffs + 1.0, diffs, [-2.0, 2.0]])
    return np.unique(cand[(cand >= -2.0) & (cand <= 2.0)])


def _kappa_integral(f1: Func, f2: Func, b: np.ndarray, order: int, splits: int) -> float:
    g1 = _support(f1)
    F2 = _Antiderivative(_support(f2), b, order, splits)

    def psi_sq(xs):
        return np.array([_psi_at(g1, F2, float(x), b, order, splits) ** 2 for x in xs])

    return _piecewise_quad(psi_sq, _kappa_breaks(b), order, splits)


@dataclass(frozen=True)
class WeightProfile:
    """A pre-averaging weight together with its derived constants.

    Build through :func:`make_min_weight`, :meth:`from_table` or
    :meth:`from_function`; the constructors validate the weight and fill
    in every constant.
    """

    g: Func
    g_prime: Func
    breakpoints: tuple[float, ...]
    psi_hy: float
    psi1: float
    psi2: float
    kappa: float
    kappa_tilde: float
    kappa_bar: float
    name: str = field(default="custom", compare=False)

    def __call__(self, x):
        return self.g(np.asarray(x, dtype=float))

    @classmethod
    def from_function(
        cls,
        g: Func,
        g_prime: Func,
        breakpoints: Sequence[float] = (),
        name: str = "custom",
    ) -> "WeightProfile":
        gs, gps = _support(g), _support(g_prime)
        ends = gs(np.array([0.0, 1.0]))
        if np.any(np.abs(ends) > 1e-12):
            raise ValueError(f"weight must vanish at 0 and 1, got g(0)={ends[0]}, g(1)={ends[1]}")
        b = np.unique(np.clip(np.concatenate([np.asarray(breakpoints, float), [0.0, 1.0]]), 0.0, 1.0))
        psi_hy = _piecewise_quad(gs, b)
        if abs(psi_hy) < 1e-14:
            raise ValueError("weight integrates to zero; psi_hy must be nonzero")
        psi1 = _piecewise_quad(lambda x: gps(x) ** 2, b)
        psi2 = _piecewise_quad(lambda x: gs(x) ** 2, b)
        k, kt, kb = _kappas(gs, gps, b)
        return cls(gs, gps, tuple(float(v) for v in b), psi_hy, psi1, psi2, k, kt, kb, name)

    @classmethod
    def from_table(cls, xs: Sequence[float], ys: Sequence[float], name: str = "table") -> "WeightProfile":
        """Piecewise-linear weight through ``(xs, ys)``; ``g'`` is the segment slope."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("table needs matching 1-d x and y arrays with at least two points")
        if np.any(np.diff(xs) <= 0) or xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("table x values must increase strictly from 0 to 1")
        slopes = np.diff(ys) / np.diff(xs)

        def g(x):
            return np.interp(x, xs, ys)

        def g_prime(x):
            # segments are [x_k, x_{k+1}); x = 1 belongs to the last one
            idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, slopes.size - 1)
            return slopes[idx]

        return cls.from_function(g, g_prime, xs, name=name)


def _kappas(g: Func, gp: Func, b: np.ndarray, order: int = _GL_ORDER) -> tuple[float, float, float]:
    coarse = np.array([_kappa_integral(f1, f2, b, order, 1) for f1, f2 in ((g, g), (gp, gp), (g, gp))])
    fine = np.array([_kappa_integral(f1, f2, b, order, 2) for f1, f2 in ((g, g), (gp, gp), (g, gp))])
    if np.any(np.abs(coarse - fine) > _RESOLUTION_TOL):
        raise QuadratureError(f"kappa quadrature not converged: {coarse} vs {fine}")
    return tuple(float(v) for v in fine)


def kappa_constants(profile: WeightProfile, splits: int = 1) -> tuple[float, float, float]:
    """Recompute ``(kappa, kappa_tilde, kappa_bar)`` at a given resolution.

    ``splits`` subdivides every piece; the profile's stored values use two
    resolutions and fail loudly if they disagree.
    """
    b = np.asarray(profile.breakpoints)
    pairs = ((profile.g, profile.g), (profile.g_prime, profile.g_prime), (profile.g, profile.g_prime))
    return tuple(_kappa_integral(f1, f2, b, _GL_ORDER, splits) for f1, f2 in pairs)


@lru_cache(maxsize=None)
def make_min_weight() -> WeightProfile:
    """The triangular weight ``g(x) = min(x, 1 - x)`` (cached; profiles are immutable)."""
    prof = WeightProfile.from_table([0.0, 0.5, 1.0], [0.0, 0.5, 0.0], name="min")
    # exact values; quadrature agrees to rounding
    return WeightProfile(
        prof.g, prof.g_prime, prof.breakpoints, 0.25, 1.0, 1.0 / 12.0,
        prof.kappa, prof.kappa_tilde, prof.kappa_bar, "min",
    )


def constants_dict(profile: WeightProfile) -> dict[str, float]:
    return {
        "weight": profile.name,
        "psi_hy": profile.psi_hy,
        "psi1": profile.psi1,
        "psi2": profile.psi2,
        "kappa": profile.kappa,
        "kappa_tilde": profile.kappa_tilde,
        "kappa_bar": profile.kappa_bar,
    }
