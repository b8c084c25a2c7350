"""Transfer-operator eigendata on a circle grid.

The operator L_f phi(x) = sum over pre-images y of e^{f(y)} phi(y) acts on
grid functions, with f and phi read by piecewise-linear interpolation and
the pre-images obtained by bisection of the lift once per node set.  The
maximal eigendata are computed in two passes:

1. sup-normalized power iteration from phi = 1 gives chi and the positive
   eigenfunction h (the sup ratio stabilizes to chi);
2. the potential is normalized (f~ = f + log h - log h o T - log chi, so
   L_{f~} 1 = 1), the dual of the normalized operator becomes a genuine
   stochastic matrix on cells, and its stationary distribution (dual power
   iteration in total variation) is the invariant measure mu.

The eigenmeasure is then nu = mu/h renormalized, and h is rescaled so that
the pairing of h with nu is 1.  Per-root mass in the stochastic matrix is
split between the two neighbouring cells with the interpolation weights,
keeping the discrete dual consistent with the discrete operator.

An optional geometrically refined node set (union of the uniform grid with
dyadic bands of constant point count toward 0, so density doubles per
scale) reruns the power iteration near the indifferent point; agreement of
chi between the two grids is a standing cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .circle import (DiscreteMeasure, GridFunction, ResolutionMismatchError,
                     grid_nodes, integrate, wrap)
from .maps import BISECTION_TOL, CircleMap
from .moduli import Modulus


@dataclass(frozen=True)
class Potential:
    """A grid potential with its declared regularity class.

    ``omega_seminorm_est`` is the sampled supremum of
    |f(x) - f(y)| / omega(d(x, y)); kappa(C1) = seminorm / C1 is the
    distortion constant once a compatibility constant C1 is known.
    """

    f: GridFunction
    omega: Modulus
    omega_seminorm_est: float

    def __post_init__(self):
        if self.omega_seminorm_est < 0:
            raise ValueError("seminorm estimate must be non-negative")

    @property
    def resolution(self) -> int:
        return self.f.resolution

    def kappa(self, c1: float) -> float:
        if c1 <= 0:
            raise ValueError("C1 must be positive")
        return self.omega_seminorm_est / c1

    @classmethod
    def from_function(cls, fn, omega: Modulus, resolution: int,
                      n_pairs: int = 100_000,
                      rng: np.random.Generator | None = None) -> "Potential":
        g = GridFunction.from_function(fn, resolution)
        return cls(g, omega, estimate_seminorm(g, omega, n_pairs, rng))

    @classmethod
    def constant(cls, c: float, omega: Modulus, resolution: int) -> "Potential":
        return cls(GridFunction.constant(c, resolution), omega, 0.0)


def estimate_seminorm(g: GridFunction, omega: Modulus, n_pairs: int = 100_000,
                      rng: np.random.Generator | None = None) -> float:
    """Sampled sup of |g(x)-g(y)| / omega(d(x,y)).

    Uses all node pairs at power-of-two offsets plus random pairs; a
    sampled supremum can only undershoot the true seminorm.
    """
    if rng is None:
        rng = np.random.default_rng(42)
    n = g.resolution
    vals = g.values
    best = 0.0
    k = 1
    while k <= n // 2:
        diff = np.abs(vals - np.roll(vals, -k))
        d = min(k / n, 1.0 - k / n)
        best = max(best, float(diff.max() / omega(d)))
        k *= 2
    x = rng.random(n_pairs)
    y = rng.random(n_pairs)
    d = np.abs(x - y)
    d = np.minimum(d, 1.0 - d)
    keep = d > 1e-12
    ratios = np.abs(g(x[keep]) - g(y[keep])) / omega(d[keep])
    if ratios.size:
        best = max(best, float(ratios.max()))
    return best


def _as_grid(f) -> GridFunction:
    return f.f if isinstance(f, Potential) else f


# -- the discrete operator --------------------------------------------------


def _interp_meta(nodes: np.ndarray, queries: np.ndarray):
    """Wrap-around piecewise-linear interpolation indices and weights."""
    m = nodes.size
    ext = np.concatenate((nodes, [nodes[0] + 1.0]))
    q = np.asarray(wrap(queries))
    q = np.where(q < nodes[0], q + 1.0, q)  # fold into [nodes[0], nodes[0]+1)
    pos = np.clip(np.searchsorted(ext, q, side="right") - 1, 0, m - 1)
    frac = (q - ext[pos]) / (ext[pos + 1] - ext[pos])
    return pos, (pos + 1) % m, frac


class TransferKernel:
    """Precomputed action of L_f on values over a fixed node set."""

    def __init__(self, cmap: CircleMap, f, nodes: np.ndarray | None = None,
                 resolution: int | None = None, tol: float = BISECTION_TOL):
        f_grid = _as_grid(f)
        if nodes is None:
            nodes = grid_nodes(resolution or f_grid.resolution)
        self.cmap = cmap
        self.nodes = np.asarray(nodes, dtype=float)
        self.pre = cmap.preimages(self.nodes, tol)              # (M, B)
        self.weights = np.exp(f_grid(self.pre))
        self._i0, self._i1, self._frac = _interp_meta(self.nodes, self.pre)

    def apply(self, values: np.ndarray) -> np.ndarray:
        at_pre = values[self._i0] * (1.0 - self._frac) + values[self._i1] * self._frac
        return np.sum(self.weights * at_pre, axis=1)


def transfer_apply(cmap: CircleMap, f, phi: GridFunction,
                   kernel: TransferKernel | None = None) -> GridFunction:
    """One application of the transfer operator to a grid function."""
    f_grid = _as_grid(f)
    if f_grid.resolution != phi.resolution:
        raise ResolutionMismatchError(
            f"potential resolution {f_grid.resolution} != {phi.resolution}")
    if kernel is None:
        kernel = TransferKernel(cmap, f_grid)
    return GridFunction(kernel.apply(phi.values))


def birkhoff_sum(cmap: CircleMap, f, x, n: int):
    """S_n f(x) = sum_{j<n} f(T^j x); S_0 = 0.  Scalar or array x."""
    if n < 0:
        raise ValueError("n must be non-negative")
    f_grid = _as_grid(f)
    total = np.zeros(np.shape(x))
    pt = np.asarray(wrap(x), dtype=float)
    for _ in range(n):
        total = total + f_grid(pt)
        pt = np.asarray(cmap.apply(pt))
    if np.ndim(x) == 0:
        return float(total)
    return total


# -- maximal eigendata ------------------------------------------------------


def refined_nodes(resolution: int, j_max: int = 40) -> np.ndarray:
    """Uniform nodes plus dyadic bands toward 0 with constant point count.

    Each band [2^-(j+1), 2^-j) receives the same number of extra points, so
    the local density doubles per dyadic scale approaching the indifferent
    fixed point.
    """
    per_band = max(8, resolution // 256)
    extra = [grid_nodes(resolution)]
    for j in range(1, j_max + 1):
        lo = 2.0 ** (-(j + 1))
        extra.append(np.linspace(lo, 2.0 * lo, per_band, endpoint=False))
    return np.unique(np.concatenate(extra))


@dataclass(frozen=True)
class PowerIterationResult:
    chi: float
    h: GridFunction
    eigen_residual: float
    iterations: int
    converged: bool
    refined: bool = False


def power_iterate(cmap: CircleMap, f, resolution: int, tol: float = 1e-10,
                  max_iter: int = 5000, refine: bool = False) -> PowerIterationResult:
    """Sup-normalized power iteration from phi = 1.

    chi is read off as the stabilized sup of L phi over sup-normalized
    iterates; stops when successive iterates differ by < tol in sup norm.
    Stagnation (progress below 1e-3 * tol over 100 iterations while still
    above tol) stops early with converged=False rather than spinning.
    """
    if resolution < 256:
        raise ValueError("resolution must be at least 256")
    if tol <= 0:
        raise ValueError("tol must be positive")
    f_grid = _as_grid(f)
    if f_grid.resolution != resolution and not refine:
        f_grid = GridFunction.from_function(f_grid, resolution)
    nodes = refined_nodes(resolution) if refine else grid_nodes(resolution)
    kernel = TransferKernel(cmap, f_grid, nodes=nodes)

    phi = np.ones(nodes.size)
    chi = float(cmap.n_branches)
    diff = np.inf
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nxt = kernel.apply(phi)
        chi = float(nxt.max())
        nxt /= chi
        diff = float(np.max(np.abs(nxt - phi)))
        phi = nxt
        history.append(diff)
        if diff < tol:
            converged = True
            break
        if it >= 100 and it % 100 == 0:
            progress = history[-100] - diff
            if progress < 1e-3 * tol:
                warnings.warn(
                    f"power iteration stagnated at sup-diff {diff:.3e} "
                    f"after {it} iterations", stacklevel=2)
                break

    resid = float(np.max(np.abs(kernel.apply(phi) / chi - phi)) / phi.max())
    if refine:
        h_vals = np.interp(grid_nodes(resolution), nodes, phi)
    else:
        h_vals = phi
    return PowerIterationResult(chi=chi, h=GridFunction(h_vals),
                                eigen_residual=resid, iterations=it,
                                converged=converged, refined=refine)


def normalized_potential(cmap: CircleMap, f, h: GridFunction,
                         chi: float) -> GridFunction:
    """f~ = f + log h - log h o T - log chi, with h o T interpolated."""
    if chi <= 0:
        raise ValueError("chi must be positive")
    if np.min(h.values) <= 0.0:
        raise ValueError("h must be strictly positive")
    f_grid = _as_grid(f)
    nodes = grid_nodes(h.resolution)
    h_of_t = h(np.asarray(cmap.apply(nodes)))
    vals = f_grid.values + np.log(h.values) - np.log(h_of_t) - math.log(chi)
    return GridFunction(vals)


# -- invariant measure via the normalized dual ------------------------------


@dataclass(frozen=True)
class UlamResult:
    mu: DiscreteMeasure
    transition: sp.csr_matrix
    iterations: int
    tv_defect: float
    converged: bool


def ulam_transition_matrix(cmap: CircleMap, f_tilde: GridFunction,
                           tol: float = BISECTION_TOL) -> sp.csr_matrix:
    """Row-stochastic cell matrix of the normalized dual operator.

    Row i sends the mass of cell i to the cells around its pre-image
    roots, branch-weighted by e^{f~(root)} and pro-rated between the two
    neighbouring cells with the interpolation weights, then row-normalized
    (row sums are L_{f~} 1, which is 1 up to the eigen-residual).
    """
    n = f_tilde.resolution
    pre = cmap.preimages(grid_nodes(n), tol)         # (n, B)
    w = np.exp(f_tilde(pre))
    u = pre * n
    j0 = np.floor(u).astype(np.int64) % n
    fr = u - np.floor(u)
    b = pre.shape[1]
    rows = np.repeat(np.arange(n), 2 * b)
    cols = np.concatenate((j0, (j0 + 1) % n), axis=1).ravel()
    vals = np.concatenate((w * (1.0 - fr), w * fr), axis=1).ravel()
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    rowsum = np.asarray(mat.sum(axis=1)).ravel()
    return sp.diags(1.0 / rowsum) @ mat


def ulam_invariant_measure(cmap: CircleMap, f_tilde: GridFunction,
                           tol: float = 1e-12, max_iter: int = 100_000,
                           residual_guard: float = 0.05) -> UlamResult:
    """Stationary distribution of the normalized dual chain.

    Dual power iteration from the uniform vector until the total-variation
    change of one more step is below ``tol``.
    """
    ones = GridFunction.constant(1.0, f_tilde.resolution)
    lone = transfer_apply(cmap, f_tilde, ones)
    guard = float(np.max(np.abs(lone.values - 1.0)))
    if guard > residual_guard:
        raise ValueError(
            f"normalized operator residual {guard:.3g} exceeds {residual_guard}; "
            "pass converged eigendata")

    mat = ulam_transition_matrix(cmap, f_tilde)
    n = f_tilde.resolution
    m = np.full(n, 1.0 / n)
    tv = np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nxt = m @ mat
        nxt /= nxt.sum()
        tv = 0.5 * float(np.abs(nxt - m).sum())
        m = nxt
        if tv < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"dual iteration stopped at TV defect {tv:.3e}", stacklevel=2)
    support = float(np.mean(m > 1e-3 / n))
    if support < 0.5:
        warnings.warn(
            f"stationary vector supported on {support:.0%} of cells; "
            "possible reducible grid pathology", stacklevel=2)
    return UlamResult(mu=DiscreteMeasure(m), transition=mat, iterations=it,
                      tv_defect=tv, converged=converged)


def eigenmeasure(mu: DiscreteMeasure, h: GridFunction) -> DiscreteMeasure:
    """nu with mu = h nu: cell weights mu/h, renormalized."""
    if np.min(h.values) <= 0.0:
        raise ValueError("h must be strictly positive")
    if mu.resolution != h.resolution:
        raise ResolutionMismatchError(
            f"measure resolution {mu.resolution} != {h.resolution}")
    w = mu.weights / h.values
    return DiscreteMeasure(w / w.sum())


def _cell_cdf(weights: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Mass of [0, t) for t in [0, 1], boundary cells pro-rated."""
    n = weights.size
    cum = np.concatenate(([0.0], np.cumsum(weights)))
    u = np.clip(np.asarray(t, dtype=float), 0.0, 1.0) * n
    j = np.minimum(u.astype(np.int64), n - 1)
    return cum[j] + weights[j] * (u - j)


def invariance_residual(cmap: CircleMap, mu: DiscreteMeasure,
                        tol: float = BISECTION_TOL) -> float:
    """sup over cells of |mu(T^-1 C) - mu(C)|, with exact interval pullback."""
    n = mu.resolution
    bounds = np.arange(n + 1) / n
    pulled = np.zeros(n)
    for k in range(cmap.n_branches):
        edges = cmap.lift_inverse(bounds + k, tol)
        pulled += _cell_cdf(mu.weights, edges[1:]) - _cell_cdf(mu.weights, edges[:-1])
    return float(np.max(np.abs(pulled - mu.weights)))


# -- assembled eigendata ----------------------------------------------------


@dataclass(frozen=True)
class SpectralData:
    """Maximal eigendata (chi, h, nu) with mu = h nu and diagnostics."""

    chi: float
    h: GridFunction
    nu: DiscreteMeasure
    mu: DiscreteMeasure
    f_tilde: GridFunction
    eigen_residual: float
    invariance_residual: float
    iterations: int
    ulam_iterations: int
    converged: bool
    transition: sp.csr_matrix = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.chi <= 0:
            raise ValueError("chi must be positive")
        if np.min(self.h.values) <= 0.0:
            raise ValueError("h must be strictly positive")
        pairing = integrate(self.h, self.nu)
        if abs(pairing - 1.0) > 1e-6:
            raise ValueError(f"h-nu pairing is {pairing!r}, expected 1")
        hn = self.h.values * self.nu.weights
        if np.max(np.abs(hn / hn.sum() - self.mu.weights)) > 1e-9:
            raise ValueError("mu is not h*nu renormalized")

    @property
    def resolution(self) -> int:
        return self.h.resolution

    @property
    def pressure(self) -> float:
        return math.log(self.chi)


def solve_eigendata(cmap: CircleMap, f: Potential, resolution: int | None = None,
                    power_tol: float = 1e-10, power_max_iter: int = 5000,
                    ulam_tol: float = 1e-12, ulam_max_iter: int = 100_000,
                    refine: bool = False) -> SpectralData:
    """Full pipeline: power iteration, normalization, stationary measure."""
    n = resolution or f.resolution
    if f.resolution != n:
        f = Potential(GridFunction.from_function(f.f, n), f.omega,
                      f.omega_seminorm_est)
    pw = power_iterate(cmap, f, n, tol=power_tol, max_iter=power_max_iter,
                       refine=refine)
    f_tilde = normalized_potential(cmap, f, pw.h, pw.chi)
    ul = ulam_invariant_measure(cmap, f_tilde, tol=ulam_tol,
                                max_iter=ulam_max_iter)
    nu = eigenmeasure(ul.mu, pw.h)
    scale = integrate(pw.h, nu)
    h = GridFunction(pw.h.values / scale)
    inv_res = invariance_residual(cmap, ul.mu)
    return SpectralData(chi=pw.chi, h=h, nu=nu, mu=ul.mu, f_tilde=f_tilde,
                        eigen_residual=pw.eigen_residual,
                        invariance_residual=inv_res,
                        iterations=pw.iterations,
                        ulam_iterations=ul.iterations,
                        converged=pw.converged and ul.converged,
                        transition=ul.transition)


# -- convergence and spectrum diagnostics -----------------------------------


def iterate_convergence(cmap: CircleMap, f, phi: GridFunction,
                        data: SpectralData,
                        n_list: Sequence[int]) -> list[tuple[int, float]]:
    """sup |chi^-n L^n phi - h * (phi paired with nu)| for each n."""
    if not data.converged:
        raise ValueError("eigendata not converged")
    n_list = sorted(int(n) for n in n_list)
    if n_list and n_list[0] < 1:
        raise ValueError("n values must be >= 1")
    target = data.h.values * integrate(phi, data.nu)
    kernel = TransferKernel(cmap, f, resolution=phi.resolution)
    psi = phi.values.copy()
    out = []
    for n in range(1, (n_list[-1] if n_list else 0) + 1):
        psi = kernel.apply(psi) / data.chi
        if n in n_list:
            out.append((n, float(np.max(np.abs(psi - target)))))
    return out


DEFAULT_TEST_BASIS: tuple[Callable, ...] = (
    lambda x: np.ones_like(np.asarray(x, dtype=float)),
    lambda x: np.cos(2 * np.pi * x),
    lambda x: np.sin(2 * np.pi * x),
    lambda x: np.cos(4 * np.pi * x),
    lambda x: np.sin(4 * np.pi * x),
    lambda x: np.cos(6 * np.pi * x),
    lambda x: np.sin(6 * np.pi * x),
    lambda x: 1.0 - 2.0 * np.minimum(np.asarray(wrap(x)), 1.0 - np.asarray(wrap(x))),
)


def dual_residual(cmap: CircleMap, f, data: SpectralData,
                  basis: Sequence[Callable] = DEFAULT_TEST_BASIS) -> float:
    """max over the test basis of |integral of L phi d nu - chi integral phi d nu|."""
    n = data.resolution
    worst = 0.0
    for fn in basis:
        phi = GridFunction.from_function(fn, n)
        lhs = integrate(transfer_apply(cmap, f, phi), data.nu)
        rhs = data.chi * integrate(phi, data.nu)
        worst = max(worst, abs(lhs - rhs))
    return worst


def second_eigenvalue_estimate(transition: sp.csr_matrix,
                               mu_weights: np.ndarray, iters: int = 400,
                               window: int = 64,
                               rng: np.random.Generator | None = None) -> float:
    """|lambda_2| of the stochastic matrix by deflated left power iteration.

    The lambda = 1 component (left eigenvector mu, right eigenvector 1) is
    projected out each step; the modulus is read from the geometric mean of
    norm growth over the trailing window, which also handles complex pairs.
    """
    if rng is None:
        rng = np.random.default_rng(42)
    n = transition.shape[0]
    w = rng.standard_normal(n)
    w -= w.sum() * mu_weights
    w /= np.linalg.norm(w)
    logs = []
    for _ in range(iters):
        w = w @ transition
        w -= w.sum() * mu_weights
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        logs.append(math.log(norm))
        w /= norm
    tail = logs[-window:]
    return float(math.exp(sum(tail) / len(tail)))
