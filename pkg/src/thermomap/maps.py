"""Non-uniformly expanding circle maps T(x) = x(1 + V(x)) mod 1.

V is continuous, increasing, V(0) = 0, V(1) a positive integer, and
regularly varying at 0 with index ``sigma`` (sigma = 0: slowly varying).
The lift g(x) = x(1 + V(x)) rises strictly from 0 to N = 1 + V(1) on
[0, 1], so T has exactly N monotone inverse branches; branch inversion is
done by bisection on the lift, which only needs continuity and
monotonicity of V.

Two built-in families:

* ``power_map(s)``   -- V(x) = x**s  (Manneville-Pomeau for 0 < s < 1);
* ``ilog_map(k, A)`` -- V(x) = A / log^k(1/x) near 0 (log^k = k-fold
  composition), extended linearly above a cutoff x_c so that V is
  increasing with V(1) = 1.  We fix x_c by V(x_c) = 1/2, i.e.
  x_c = 1/exp^k(2A); the cutoff is recorded in the map metadata.

Besides forward/backward application this module provides the pre-orbit
pairing (given a backward orbit of x0 and a nearby y0, follow the same
branches backward from y0) and empirical expansion constants: the largest
radius on which d(Tx, Ty) >= d(x,y) (1 + 2^-(sigma+2) V(d(x,y))) holds on
random samples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circle import circle_dist, wrap

BISECTION_TOL = 1e-13
_BISECT_ITERS = 80  # bisection of [0,1] reaches float resolution in ~55 steps


class InvalidMapError(ValueError):
    """The supplied V does not define a strictly increasing lift."""


class PairingError(RuntimeError):
    """Pre-orbit pairing hit two candidate pre-images inside the working radius."""


class DegenerateMapError(RuntimeError):
    """No expansion radius found down to the search floor."""


def iterated_log(t, k: int):
    """k-fold composition log(log(...(t)...)). Requires every stage > 0."""
    out = np.asarray(t, dtype=float)
    for _ in range(k):
        out = np.log(out)
    return out


def iterated_exp(t: float, k: int) -> float:
    out = float(t)
    for _ in range(k):
        out = float(np.exp(out))
    return out


@dataclass(frozen=True)
class VaryingFunction:
    """The V in T(x) = x(1 + V(x)): continuous, increasing, V(0) = 0."""

    fn: Callable[[np.ndarray], np.ndarray]
    sigma: float
    family: str
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        out = self.fn(np.asarray(x, dtype=float))
        if np.ndim(x) == 0:
            return float(out)
        return out


def power_varying(s: float) -> VaryingFunction:
    if s <= 0:
        raise ValueError("power family needs s > 0")
    return VaryingFunction(lambda x: np.power(np.maximum(x, 0.0), s),
                           sigma=s, family="power", params={"s": s})


def ilog_varying(k: int, A: float = 1.0) -> VaryingFunction:
    if k < 1 or A <= 0:
        raise ValueError("ilog family needs k >= 1 and A > 0")
    x_c = 1.0 / iterated_exp(2.0 * A, k)  # V(x_c) = 1/2 < 1 keeps the extension increasing
    v_c = 0.5
    slope = (1.0 - v_c) / (1.0 - x_c)

    def fn(x):
        x = np.asarray(x, dtype=float)
        inner = np.clip(x, 1e-300, x_c)
        core = A / iterated_log(1.0 / inner, k)
        lin = v_c + slope * (x - x_c)
        return np.where(x <= 0.0, 0.0, np.where(x <= x_c, core, lin))

    return VaryingFunction(fn, sigma=0.0, family="ilog",
                           params={"k": k, "A": A, "x_c": x_c})


@dataclass(frozen=True)
class CircleMap:
    """T(x) = x(1 + V(x)) mod 1 with its strictly increasing lift."""

    V: VaryingFunction
    _check_nodes: int = 4096

    def __post_init__(self):
        v0 = self.V(0.0)
        v1 = self.V(1.0)
        if abs(v0) > 1e-12:
            raise InvalidMapError(f"V(0) = {v0!r}, expected 0")
        if abs(v1 - round(v1)) > 1e-12 or round(v1) < 1:
            raise InvalidMapError(f"V(1) = {v1!r} is not a positive integer")
        xs = np.linspace(0.0, 1.0, self._check_nodes + 1)
        g = self.lift(xs)
        if np.any(np.diff(g) <= 0.0):
            raise InvalidMapError("lift x(1+V(x)) is not strictly increasing on [0,1]")

    @property
    def n_branches(self) -> int:
        return 1 + int(round(self.V(1.0)))

    @property
    def sigma(self) -> float:
        return self.V.sigma

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        out = x * (1.0 + self.V.fn(x))
        if out.ndim == 0:
            return float(out)
        return out

    def apply(self, x):
        """T(x); the indifferent fixed point T(0) = 0 is exact."""
        return wrap(self.lift(wrap(x)))

    def orbit(self, x, n: int) -> np.ndarray:
        """[x, Tx, ..., T^n x] along axis 0 (x scalar or array)."""
        pts = [np.asarray(wrap(x), dtype=float)]
        for _ in range(n):
            pts.append(np.asarray(self.apply(pts[-1])))
        return np.stack(pts, axis=0)

    # -- branch inversion -------------------------------------------------

    def _bisect_lift(self, targets: np.ndarray, tol: float) -> np.ndarray:
        """Solve lift(x) = t for each t in [0, N] by bisection on [0, 1]."""
        t = np.asarray(targets, dtype=float)
        lo = np.zeros_like(t)
        hi = np.ones_like(t)
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            below = self.lift(mid) <= t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        root = 0.5 * (lo + hi)
        resid = np.abs(self.lift(root) - t)
        if np.any(resid > tol):
            raise InvalidMapError(
                f"branch inversion residual {resid.max():.3e} > tol {tol:.1e}; "
                "V may not be monotone"
            )
        return root

    def preimages(self, y, tol: float = BISECTION_TOL):
        """All N pre-images of y, in strictly increasing order.

        For scalar y returns shape (N,); for an array of shape (...,) returns
        shape (..., N).  Branch b holds the unique root of lift(x) = y + b.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        y = np.asarray(wrap(y), dtype=float)
        targets = y[..., None] + np.arange(self.n_branches, dtype=float)
        return self._bisect_lift(targets, tol)

    def lift_inverse(self, t, tol: float = BISECTION_TOL):
        """Inverse of the degree-N lift G (G(x+1) = G(x) + N) at any real t."""
        t = np.asarray(t, dtype=float)
        n = self.n_branches
        m = np.floor(t / n)
        base = self._bisect_lift(t - m * n, tol)
        out = base + m
        if out.ndim == 0:
            return float(out)
        return out

    def branch_index(self, x_pre, x) -> np.ndarray:
        """Branch b with lift(x_pre) = x + b, for T(x_pre) = x."""
        return np.rint(self.lift(np.asarray(x_pre)) - np.asarray(wrap(x))).astype(int)


def manneville_pomeau(s: float) -> CircleMap:
    """T_s(x) = x(1 + x^s) mod 1."""
    return CircleMap(power_varying(s))


def ilog_map(k: int, A: float = 1.0) -> CircleMap:
    """S_k(x) = x(1 + A/log^k(1/x)) mod 1 near 0, linearly extended."""
    return CircleMap(ilog_varying(k, A))


# -- pre-orbits and their pairing -----------------------------------------


def random_preorbit(cmap: CircleMap, x0, depth: int, rng: np.random.Generator,
                    tol: float = BISECTION_TOL) -> np.ndarray:
    """Backward orbit with uniformly random branch choices.

    Returns shape (depth+1,) for scalar x0, else (depth+1, len(x0)).
    """
    scalar = np.ndim(x0) == 0
    x0 = np.atleast_1d(np.asarray(wrap(x0), dtype=float))
    out = np.empty((depth + 1, x0.size))
    out[0] = x0
    for k in range(1, depth + 1):
        cands = cmap.preimages(out[k - 1], tol)
        pick = rng.integers(0, cmap.n_branches, size=x0.size)
        out[k] = cands[np.arange(x0.size), pick]
    return out[:, 0] if scalar else out


def branch_preorbit(cmap: CircleMap, x0: float, depth: int, branch: int = 0,
                    tol: float = BISECTION_TOL) -> np.ndarray:
    """Backward orbit taking the same branch at every step."""
    out = np.empty(depth + 1)
    out[0] = wrap(x0)
    for k in range(1, depth + 1):
        out[k] = cmap.preimages(out[k - 1], tol)[branch]
    return out


def paired_preorbit(cmap: CircleMap, x_preorbit, y0: float, depth: int | None = None,
                    rho1: float | None = None, tol: float = BISECTION_TOL,
                    orbit_tol: float = 1e-9) -> np.ndarray:
    """Follow x's backward branches from y0: the unique nearby pre-orbit.

    ``x_preorbit`` is [x_0, x_1, ...] with T(x_{k+1}) = x_k.  At each step
    y_k is the pre-image of y_{k-1} lying in the branch arc of x_k, found
    as the closest candidate; if a second candidate falls within the
    working radius the pairing is ambiguous and a PairingError is raised.
    Distances d(x_k, y_k) exceeding d(x_0, y_0) are reported as a warning
    (they contradict the contraction property, not the arithmetic).
    """
    xs = np.asarray(x_preorbit, dtype=float)
    if depth is None:
        depth = xs.size - 1
    if depth > xs.size - 1:
        raise ValueError("depth exceeds the supplied pre-orbit length")
    back = np.abs(np.array([circle_dist(cmap.apply(xs[k + 1]), xs[k]) for k in range(depth)]))
    if depth and back.max() > orbit_tol:
        raise ValueError(f"x_preorbit is not a backward orbit (defect {back.max():.2e})")

    d0 = circle_dist(xs[0], y0)
    guard = rho1 if rho1 is not None else max(d0, 1e-15)
    if rho1 is not None and d0 >= rho1:
        raise ValueError(f"d(x0, y0) = {d0:.3e} is not below rho1 = {rho1:.3e}")

    ys = np.empty(depth + 1)
    ys[0] = wrap(y0)
    worst = 0.0
    for k in range(1, depth + 1):
        cands = cmap.preimages(ys[k - 1], tol)
        dd = circle_dist(np.full(cands.shape, xs[k]), cands)
        order = np.argsort(dd)
        if dd[order[1]] < guard:
            raise PairingError(
                f"two pre-images within {guard:.3e} of x_{k} (d = {dd[order[0]]:.3e}, "
                f"{dd[order[1]]:.3e})"
            )
        ys[k] = cands[order[0]]
        worst = max(worst, dd[order[0]])
    if worst > d0 + 1e-12:
        warnings.warn(
            f"pairing distance grew: max d(x_k,y_k) = {worst:.3e} > d(x0,y0) = {d0:.3e}",
            stacklevel=2,
        )
    return ys


def pair_preorbit_batch(cmap: CircleMap, x_orbits: np.ndarray, y0s: np.ndarray,
                        rho1: float | None = None,
                        tol: float = BISECTION_TOL) -> np.ndarray:
    """Vectorized pairing of many pre-orbits at once.

    ``x_orbits`` has shape (depth+1, B); returns y-orbits of the same shape.
    """
    xs = np.asarray(x_orbits, dtype=float)
    depth, b = xs.shape[0] - 1, xs.shape[1]
    d0 = circle_dist(xs[0], y0s)
    guard = np.full(b, rho1) if rho1 is not None else np.maximum(d0, 1e-15)
    ys = np.empty_like(xs)
    ys[0] = wrap(np.asarray(y0s, dtype=float))
    rows = np.arange(b)
    for k in range(1, depth + 1):
        cands = cmap.preimages(ys[k - 1], tol)          # (B, N)
        dd = circle_dist(xs[k][:, None], cands)         # (B, N)
        order = np.argsort(dd, axis=1)
        second = dd[rows, order[:, 1]]
        bad = second < guard
        if np.any(bad):
            raise PairingError(f"ambiguous pairing for {int(bad.sum())} of {b} orbits")
        ys[k] = cands[rows, order[:, 0]]
    return ys


# -- empirical expansion constants -----------------------------------------


@dataclass(frozen=True)
class ExpansionConstants:
    """Sampled radii on which the local expansion inequalities held.

    ``branch_separation_hat`` is the sampled minimum circle distance
    between distinct pre-images of one point; any working radius for ball
    pullback or pairing must stay well below half of it.
    """

    rho0_hat: float
    rho_V_hat: float
    branch_separation_hat: float
    lambda_eps: Callable[[float], float]
    samples: int

    def __post_init__(self):
        if not (0.0 < self.rho0_hat <= self.rho_V_hat < 0.5):
            raise ValueError(
                f"need 0 < rho0_hat <= rho_V_hat < 1/2, got "
                f"({self.rho0_hat!r}, {self.rho_V_hat!r})"
            )
        if self.branch_separation_hat <= 0.0:
            raise ValueError("branch separation estimate must be positive")

    @property
    def rho1(self) -> float:
        """Conservative working radius for pre-orbit pairing."""
        return 0.5 * self.rho0_hat

    @property
    def ball_radius_cap(self) -> float:
        """Empirical working radius for dynamic-ball geometry.

        A third of the sampled branch separation keeps a pulled-back arc
        and its intersection arcs away from every other inverse branch.
        """
        return self.branch_separation_hat / 3.0


def _sample_pairs(rng: np.random.Generator, n: int, r: float):
    x = rng.random(n)
    y = wrap(x + r * (2.0 * rng.random(n) - 1.0))
    return x, y


def expansion_lower_bound(cmap: CircleMap, d):
    """d * (1 + 2^-(sigma+2) V(d)): the claimed expansion floor at gap d."""
    d = np.asarray(d, dtype=float)
    return d * (1.0 + 2.0 ** (-(cmap.sigma + 2.0)) * cmap.V.fn(d))


def expansion_inequality_holds(cmap: CircleMap, x, y, slack: float = 1e-12):
    """Mask of pairs with d(Tx, Ty) >= d(x,y)(1 + 2^-(sigma+2) V(d(x,y)))."""
    d = circle_dist(x, y)
    lhs = circle_dist(cmap.apply(x), cmap.apply(y))
    return lhs >= expansion_lower_bound(cmap, d) * (1.0 - slack)


def estimate_expansion(cmap: CircleMap, samples: int = 100_000,
                       rng: np.random.Generator | None = None,
                       r_floor: float = 1e-6) -> ExpansionConstants:
    """Largest dyadic radii passing the sampled expansion inequalities.

    rho_V_hat: d*N + |V(x)-V(y)| < 1/2 on all sampled pairs with d < r.
    rho0_hat <= min(1/4, rho_V_hat): the expansion inequality above holds on
    all sampled pairs with d < r.  Fails with DegenerateMapError if no
    radius works down to ``r_floor``.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 sample pairs")
    if rng is None:
        rng = np.random.default_rng(42)

    # rho_V lives on the line: |x-y| N + |V(x)-V(y)| < 1/2 for 0 <= y <= x <= 1
    # (the wrap-around case is covered by the two-sided expansion argument)
    n_b = cmap.n_branches
    rho_v = 0.25
    while rho_v > r_floor:
        x = rng.random(samples)
        y = np.clip(x + rho_v * (2.0 * rng.random(samples) - 1.0), 0.0, 1.0)
        gap = np.concatenate((np.abs(x - y), [rho_v]))  # include the worst gap at 0
        dv = np.concatenate((np.abs(cmap.V(x) - cmap.V(y)),
                             [cmap.V(min(rho_v, 1.0)) - cmap.V(0.0)]))
        if np.all(gap * n_b + dv < 0.5):
            break
        rho_v /= 2.0
    else:
        raise DegenerateMapError(f"no rho_V radius above {r_floor}")

    r = min(0.25, rho_v)
    while r > r_floor:
        x, y = _sample_pairs(rng, samples, r)
        if np.all(expansion_inequality_holds(cmap, x, y)):
            break
        r /= 2.0
    else:
        raise DegenerateMapError(f"no expansion radius above {r_floor}")

    probes = rng.random(min(samples, 4096))
    pre = cmap.preimages(probes)
    sep = circle_dist(pre[:, 1:], pre[:, :-1]).min() if n_b > 1 else 0.5
    sep = min(float(sep), float(circle_dist(pre[:, 0], pre[:, -1]).min()))

    v_fn = cmap.V
    return ExpansionConstants(
        rho0_hat=r,
        rho_V_hat=rho_v,
        branch_separation_hat=sep,
        lambda_eps=lambda eps: 1.0 + v_fn(eps),
        samples=samples,
    )
