"""Circle arithmetic and grid-sampled functions.

The circle is [0, 1) with the standard metric d(x,y) = min(|x-y|, 1-|x-y|).
Points are plain floats (or arrays of floats); :func:`wrap` normalizes any
real to [0, 1).  Continuous functions are carried by :class:`GridFunction`
(values at the uniform nodes i/N, piecewise-linear interpolation with
wrap-around), measures by :class:`DiscreteMeasure` (one weight per cell
[i/N, (i+1)/N)).  The pairing :func:`integrate` uses node values as cell
representatives; this convention is used consistently across the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ResolutionMismatchError(ValueError):
    """Two grid objects with different resolutions were paired."""


def wrap(x):
    """Map reals (scalar or array) to the fundamental domain [0, 1).

    ``x % 1.0`` alone can round up to exactly 1.0 for tiny negative inputs,
    which would violate the [0, 1) invariant; that case is folded back to 0.
    """
    r = np.asarray(x, dtype=float) % 1.0
    r = np.where(r >= 1.0, 0.0, r)
    if np.ndim(x) == 0:
        return float(r)
    return r


def circle_dist(x, y):
    """Standard circle metric, in [0, 1/2].  Accepts scalars or arrays."""
    d = np.abs(wrap(x) - np.asarray(wrap(y)))
    out = np.minimum(d, 1.0 - d)
    if np.ndim(out) == 0:
        return float(out)
    return out


def grid_nodes(resolution: int) -> np.ndarray:
    """The uniform nodes i/N, i = 0..N-1."""
    return np.arange(resolution) / resolution


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridFunction:
    """A real function sampled at the uniform circle nodes i/N.

    Evaluation is piecewise-linear between neighbouring nodes, wrapping from
    (N-1)/N back to 0, so the interpolant is continuous and 1-periodic and
    reproduces the stored values exactly at the nodes.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("GridFunction needs at least 2 node values")

    @property
    def resolution(self) -> int:
        return self.values.size

    @classmethod
    def from_function(cls, fn, resolution: int) -> "GridFunction":
        return cls(np.asarray(fn(grid_nodes(resolution)), dtype=float))

    @classmethod
    def constant(cls, c: float, resolution: int) -> "GridFunction":
        return cls(np.full(resolution, float(c)))

    def __call__(self, x):
        n = self.resolution
        u = np.asarray(wrap(x)) * n
        i0 = np.floor(u).astype(np.int64) % n
        frac = u - np.floor(u)
        i1 = (i0 + 1) % n
        out = self.values[i0] * (1.0 - frac) + self.values[i1] * frac
        if np.ndim(x) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class DiscreteMeasure:
    """Non-negative weights on the cells [i/N, (i+1)/N).

    With ``probability=True`` (the default) the weights must sum to 1
    within 1e-12.
    """

    weights: np.ndarray
    probability: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))
        w = self.weights
        if w.ndim != 1 or w.size < 2:
            raise ValueError("DiscreteMeasure needs at least 2 cells")
        if np.any(w < 0.0):
            raise ValueError("measure weights must be non-negative")
        if self.probability and abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"probability weights sum to {w.sum()!r}, not 1")

    @property
    def resolution(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, resolution: int) -> "DiscreteMeasure":
        return cls(np.full(resolution, 1.0 / resolution))

    @classmethod
    def point_mass(cls, cell: int, resolution: int) -> "DiscreteMeasure":
        w = np.zeros(resolution)
        w[cell] = 1.0
        return cls(w)

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.weights / self.weights.sum())

    def cumulative(self) -> np.ndarray:
        """cum[i] = mass of [0, i/N); length N+1 with cum[N] = total."""
        return np.concatenate(([0.0], np.cumsum(self.weights)))

    def arc_mass(self, left: float, right: float) -> float:
        """Mass of the arc from ``left`` counter-clockwise to ``right``.

        Boundary cells are pro-rated linearly (uniform density within a
        cell).  If right < left the arc wraps through 0.
        """
        n = self.resolution
        cum = self.cumulative()

        def F(t: float) -> float:
            u = wrap(t) * n
            j = min(int(u), n - 1)
            return cum[j] + self.weights[j] * (u - j)

        a, b = wrap(left), wrap(right)
        if b >= a:
            return float(F(b) - F(a))
        return float((cum[n] - F(a)) + F(b))


def integrate(f: GridFunction, m: DiscreteMeasure) -> float:
    """The pairing sum_i f.values[i] * m.weights[i].

    Node i represents cell [i/N, (i+1)/N).  Fixed-order summation keeps the
    result independent of any outer parallelism.
    """
    if f.resolution != m.resolution:
        raise ResolutionMismatchError(
            f"function resolution {f.resolution} != measure resolution {m.resolution}"
        )
    return float(np.sum(f.values * m.weights))
