"""Concave moduli of continuity and their interplay with a circle map.

A modulus is continuous, non-decreasing, vanishes at 0, and is concave on
a stated window [0, x0]; above the window all families here are truncated
to a constant, which preserves concavity and monotonicity.  Three sources:

* ``omega_ab(alpha, beta)`` -- x^alpha (-log x)^(-beta) truncated at the
  largest dyadic point below 1/e^2 on which sampled concavity holds;
* ``ilog_modulus(terms)``   -- products of (log^k 1/x)^(-beta) factors
  (log^k = k-fold composition), truncated the same way;
* ``build_omega_legendre``  -- the grid modulus obtained from omega/V by
  running max, concave conjugate, and a second conjugate (the minimal
  concave majorant), cross-checked against a monotone-chain upper hull.

``check_compatibility`` evaluates the joint quantity
(V(x)/omega(x)) * (Omega((1+c)x) - Omega(x)) on a log grid descending to
x_min and reports a three-valued verdict: a numerical tail minimum is
evidence about a liminf, never a proof, so the report keeps the whole
profile and the per-decade minima alongside the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .maps import CircleMap, iterated_log

CONCAVITY_CAP = math.exp(-2.0)


class WindowError(ValueError):
    """An evaluation point left the concavity window of a modulus."""


@dataclass(frozen=True)
class Modulus:
    """Concave modulus of continuity with a verified concavity window."""

    fn: Callable[[np.ndarray], np.ndarray]
    concavity_window: float
    provenance: str
    params: dict = field(default_factory=dict)
    intermediates: "LegendreIntermediates | None" = None

    def __post_init__(self):
        if self.concavity_window <= 0:
            raise ValueError("concavity window must be positive")
        if abs(self(0.0)) > 1e-12:
            raise ValueError(f"modulus(0) = {self(0.0)!r}, expected 0")
        xs = np.linspace(0.0, self.concavity_window, 257)
        vs = self.fn(xs)
        if np.any(np.diff(vs) < -1e-12):
            raise ValueError("modulus is decreasing on its window")
        mid = self.fn(0.5 * (xs[:-2] + xs[2:]))
        if np.any(mid - 0.5 * (vs[:-2] + vs[2:]) < -1e-10 * max(1.0, vs[-1])):
            raise ValueError("modulus fails midpoint concavity on its window")

    def __call__(self, x):
        out = self.fn(np.asarray(x, dtype=float))
        if np.ndim(x) == 0:
            return float(out)
        return out


def _concave_on_samples(xs: np.ndarray, vs: np.ndarray, tol: float) -> bool:
    """Each interior sample lies above the chord of its neighbours."""
    x0, x1, x2 = xs[:-2], xs[1:-1], xs[2:]
    v0, v2 = vs[:-2], vs[2:]
    chord = v0 + (v2 - v0) * (x1 - x0) / (x2 - x0)
    return bool(np.all(vs[1:-1] >= chord - tol))


def _sweep_samples(cap: float) -> np.ndarray:
    lin = np.linspace(0.0, cap, 1601)
    logx = cap * np.logspace(-9, 0, 400)
    return np.unique(np.concatenate((lin, logx)))


def _dyadic_threshold(core, cap: float, floor_exp: int = 48) -> float:
    """Largest dyadic x0 <= cap on which sampled concavity of ``core`` holds."""
    candidates = [2.0 ** (-j) for j in range(2, floor_exp) if 2.0 ** (-j) <= cap + 1e-15]
    for c in candidates:
        xs = _sweep_samples(c)
        vs = core(xs)
        scale = max(1.0, float(np.max(np.abs(vs))))
        if _concave_on_samples(xs, vs, 1e-13 * scale):
            return c
    return candidates[-1]


def concavity_threshold(alpha: float, beta: float) -> float:
    """Truncation point for the x^alpha (-log x)^(-beta) family.

    A pure power (beta = 0) is concave everywhere, so the cap 1/e^2 is
    returned directly; otherwise the largest dyadic point below the cap
    passing a second-difference sweep on [0, x0].
    """
    _validate_ab(alpha, beta)
    if beta == 0.0:
        return CONCAVITY_CAP
    return _dyadic_threshold(lambda x: _ab_core(x, alpha, beta), CONCAVITY_CAP)


def _validate_ab(alpha: float, beta: float):
    if not (0.0 <= alpha < 1.0) or beta < 0.0 or alpha + beta <= 0.0:
        raise ValueError(f"need 0 <= alpha < 1, beta >= 0, alpha + beta > 0; "
                         f"got alpha={alpha!r}, beta={beta!r}")


def _ab_core(x, alpha: float, beta: float):
    x = np.asarray(x, dtype=float)
    xx = np.clip(x, 1e-300, None)
    core = xx ** alpha * (-np.log(xx)) ** (-beta)
    return np.where(x <= 0.0, 0.0, core)


def omega_ab(alpha: float, beta: float) -> Modulus:
    """The modulus x^alpha (-log x)^(-beta), truncated to stay concave."""
    _validate_ab(alpha, beta)
    x0 = concavity_threshold(alpha, beta)
    cap_val = float(_ab_core(x0, alpha, beta))

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= x0, cap_val, _ab_core(np.minimum(x, x0), alpha, beta))

    return Modulus(fn, x0, "omega_ab", {"alpha": alpha, "beta": beta, "x0": x0})


def ilog_modulus(terms: list[tuple[int, float]]) -> Modulus:
    """Product of (log^k 1/x)^(-beta) factors, truncated to stay concave.

    ``terms`` is a list of (level k, exponent beta) pairs; e.g.
    [(1, 2), (2, 2)] is (log 1/x)^(-2) (log log 1/x)^(-2).
    """
    if not terms or any(k < 1 or b <= 0 for k, b in terms):
        raise ValueError("terms must be non-empty (level >= 1, exponent > 0) pairs")
    top = max(k for k, _ in terms)

    def core(x):
        x = np.asarray(x, dtype=float)
        xx = np.clip(x, 1e-300, None)
        out = np.ones_like(xx)
        for k, b in terms:
            out = out * iterated_log(1.0 / xx, k) ** (-b)
        return np.where(x <= 0.0, 0.0, out)

    # every iterated log must stay well positive on the window
    domain_cap = 0.5 / _iter_exp(1.0, top - 1)
    x0 = _dyadic_threshold(core, min(CONCAVITY_CAP, domain_cap))
    cap_val = float(core(x0))

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= x0, cap_val, core(np.minimum(x, x0)))

    return Modulus(fn, x0, "ilog", {"terms": list(terms), "x0": x0})


def _iter_exp(t: float, k: int) -> float:
    for _ in range(k):
        t = math.exp(t)
    return t


def corollary_b_moduli(k: int) -> tuple[Modulus, Modulus]:
    """The potential/eigenspace modulus pair for the iterated-log maps.

    omega = (log^k 1/x)^-1 (log 1/x)^-1 (log^2 1/x)^-2, Omega = (log^2 1/x)^-1.
    """
    omega = ilog_modulus([(k, 1.0), (1, 1.0), (2, 2.0)])
    big = ilog_modulus([(2, 1.0)])
    return omega, big


# -- sufficient compatibility condition -------------------------------------


@dataclass(frozen=True)
class CompatibilityReport:
    """Profile of (V/omega)(Omega((1+c)x) - Omega(x)) on a descending grid."""

    c: float
    grid: np.ndarray
    values: np.ndarray
    decade_mins: np.ndarray
    liminf_estimate: float
    C1: float
    verdict: str  # positive-evidence | vanishing | inconclusive

    def __post_init__(self):
        if np.any(np.diff(self.grid) >= 0):
            raise ValueError("compatibility grid must be strictly decreasing")


def default_c(cmap: CircleMap) -> float:
    return min(0.1, 2.0 ** (-(cmap.sigma + 2.0)))


def check_compatibility(cmap: CircleMap, omega: Modulus, Omega: Modulus,
                        c: float | None = None, x_min: float = 1e-12,
                        x_max: float = 0.1,
                        points_per_decade: int = 64) -> CompatibilityReport:
    """Evaluate the sufficient-compatibility quantity toward x = 0.

    Verdict is positive-evidence when the smallest-decade minimum exceeds
    1e-8 and is at least half the previous decade's minimum (no trend to
    0); a clear decaying trend gives vanishing; anything else is
    inconclusive.  C1 is half the tail minimum.
    """
    if c is None:
        c = default_c(cmap)
    if not (0.0 < c <= 2.0 ** (-(cmap.sigma + 2.0))):
        raise ValueError(f"need 0 < c <= 2^-(sigma+2) = "
                         f"{2.0 ** (-(cmap.sigma + 2.0)):.4f}, got {c!r}")
    if x_min <= 0 or x_max <= x_min:
        raise ValueError("need 0 < x_min < x_max")
    if (1.0 + c) * x_max > Omega.concavity_window * (1.0 + 1e-12):
        raise WindowError(
            f"(1+c)*x_max = {(1 + c) * x_max:.4g} exceeds the Omega concavity "
            f"window {Omega.concavity_window:.4g}; lower x_max"
        )

    n_decades = math.log10(x_max / x_min)
    n_pts = max(8, int(round(points_per_decade * n_decades)))
    grid = np.logspace(math.log10(x_max), math.log10(x_min), n_pts)
    v = cmap.V(grid)
    w = omega(grid)
    if np.any(w <= 0.0) or np.any(v <= 0.0):
        raise ValueError("omega or V vanishes on the evaluation grid")
    values = (v / w) * (Omega((1.0 + c) * grid) - Omega(grid))

    decade = np.floor(np.log10(grid)).astype(int)
    keys = sorted(set(decade), reverse=True)  # large x first
    decade_mins = np.array([values[decade == kk].min() for kk in keys])
    liminf = float(decade_mins[-1])
    c1 = liminf / 2.0

    if len(decade_mins) >= 2:
        ratio = decade_mins[-1] / decade_mins[-2] if decade_mins[-2] > 0 else np.inf
    else:
        ratio = 1.0
    decaying = (
        len(decade_mins) >= 3
        and decade_mins[-1] < decade_mins[-2] < decade_mins[-3]
        and ratio < 0.5
    )
    if liminf > 1e-8 and ratio >= 0.5:
        verdict = "positive-evidence"
    elif liminf <= 1e-8 or decaying:
        verdict = "vanishing"
    else:
        verdict = "inconclusive"
    return CompatibilityReport(c=c, grid=grid, values=values,
                               decade_mins=decade_mins, liminf_estimate=liminf,
                               C1=c1, verdict=verdict)


def check_ratio_condition(cmap: CircleMap, omega: Modulus, xi_grid,
                          eta: float, x_floor: float = 1e-12,
                          n_samples: int = 400,
                          margin: float = 1e-9) -> tuple[bool, dict[float, float]]:
    """Does omega/V gain a factor c(xi) > 1 under dilation by xi near 0?

    Returns (all infima exceed 1, {xi: inf over sampled x in (0, eta) of
    [omega(xi x)/V(xi x)] / [omega(x)/V(x)]}).
    """
    xi_grid = [float(v) for v in xi_grid]
    if any(v <= 1.0 for v in xi_grid):
        raise ValueError("all xi must exceed 1")
    if eta <= 0 or x_floor >= eta:
        raise ValueError("need 0 < x_floor < eta")
    xs = np.logspace(math.log10(x_floor), math.log10(eta), n_samples,
                     endpoint=False)
    base = omega(xs) / cmap.V(xs)
    table = {}
    for xi in xi_grid:
        shifted = omega(xi * xs) / cmap.V(xi * xs)
        table[xi] = float(np.min(shifted / base))
    ok = all(val > 1.0 + margin for val in table.values())
    return ok, table


# -- double concave-Legendre construction -----------------------------------


@dataclass(frozen=True)
class LegendreIntermediates:
    x: np.ndarray
    theta0: np.ndarray
    theta1: np.ndarray
    slopes: np.ndarray
    theta1_star: np.ndarray
    theta1_star_star: np.ndarray
    max_theta1_star: float
    hull: np.ndarray


def concave_conjugate(xs: np.ndarray, vs: np.ndarray, queries: np.ndarray,
                      chunk: int = 1 << 22) -> np.ndarray:
    """min over grid points of q*x_i - v_i, for every q (brute force)."""
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    q = np.asarray(queries, dtype=float)
    out = np.empty(q.size)
    step = max(1, chunk // max(1, xs.size))
    for lo in range(0, q.size, step):
        block = q[lo:lo + step, None] * xs[None, :] - vs[None, :]
        out[lo:lo + step] = block.min(axis=1)
    return out


def upper_concave_hull(xs: np.ndarray, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the smallest concave function above the points.

    Monotone-chain upper hull; xs must be strictly increasing.
    """
    hx: list[float] = []
    hv: list[float] = []
    for x, v in zip(xs, vs):
        while len(hx) >= 2:
            cross = (hx[-1] - hx[-2]) * (v - hv[-2]) - (hv[-1] - hv[-2]) * (x - hx[-2])
            if cross >= 0.0:  # middle vertex at or below the new chord
                hx.pop()
                hv.pop()
            else:
                break
        hx.append(float(x))
        hv.append(float(v))
    return np.asarray(hx), np.asarray(hv)


def double_conjugate_majorant(xs: np.ndarray, vs: np.ndarray):
    """Concave majorant of data via two concave conjugates.

    The dual grid is the union of data chord slopes and hull edge slopes,
    which reproduces the hull exactly at the data points.  Returns
    (majorant values on xs, slope grid, first conjugate on slopes,
    hull cross-check values on xs).
    """
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    chords = np.diff(vs) / np.diff(xs)
    hx, hv = upper_concave_hull(xs, vs)
    hull_slopes = np.diff(hv) / np.diff(hx) if hx.size >= 2 else np.array([0.0])
    slopes = np.unique(np.concatenate((chords, hull_slopes)))
    star = concave_conjugate(xs, vs, slopes)
    star_star = concave_conjugate(slopes, star, xs)
    hull_vals = np.interp(xs, hx, hv)
    return star_star, slopes, star, hull_vals


def build_omega_legendre(cmap: CircleMap, omega: Modulus, tau: float,
                         grid_size: int = 10_000,
                         x_floor: float = 1e-12) -> Modulus:
    """Concave modulus above omega/V on [0, tau] via double conjugation.

    theta0 = omega/V (0 at 0); theta1 its running max; the double concave
    conjugate of theta1 is its minimal concave majorant, shifted by
    max theta1* so the result vanishes at 0.  The returned grid modulus
    interpolates linearly, is constant above tau, and carries all
    intermediates for inspection.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    if x_floor <= 0 or x_floor >= tau:
        raise ValueError("need 0 < x_floor < tau")

    x = np.concatenate(([0.0], np.logspace(math.log10(x_floor), math.log10(tau),
                                           grid_size)))
    v = cmap.V(x[1:])
    if np.any(v <= 0.0):
        raise ZeroDivisionError("V vanishes on the grid interior; omega/V undefined")
    theta0 = np.concatenate(([0.0], omega(x[1:]) / v))
    theta1 = np.maximum.accumulate(theta0)

    star_star, slopes, star, hull_vals = double_conjugate_majorant(x, theta1)
    m_star = float(star.max())
    omega_vals = star_star + m_star
    if abs(omega_vals[0]) > 1e-10:
        raise ArithmeticError(f"Omega(0) = {omega_vals[0]!r} after shift; "
                              "conjugation grid is inconsistent")
    omega_vals = np.maximum.accumulate(np.maximum(omega_vals, 0.0))
    cap_val = float(omega_vals[-1])

    inter = LegendreIntermediates(x=x, theta0=theta0, theta1=theta1,
                                  slopes=slopes, theta1_star=star,
                                  theta1_star_star=star_star,
                                  max_theta1_star=m_star, hull=hull_vals)

    def fn(t):
        t = np.asarray(t, dtype=float)
        inside = np.interp(t, x, omega_vals)
        return np.where(t <= 0.0, 0.0, np.where(t >= tau, cap_val, inside))

    return Modulus(fn, tau, "legendre",
                   {"tau": tau, "grid_size": grid_size, "x_floor": x_floor,
                    "source": omega.provenance}, intermediates=inter)
