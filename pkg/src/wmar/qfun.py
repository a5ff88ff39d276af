"""Quantile functions sampled on a uniform grid of [0, 1].

A measure on [0, 1] is stored through its quantile function at the nodes
``p_k = k / M`` for ``k = 0 .. M-1``. Between nodes functions are linear; on
the last cell ``[1 - h, 1]`` they are held constant. Every operation below is
pure and returns new, read-only objects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

MONO_TOL = 1e-9

QUANTILE = "quantile"
MONOTONE = "monotone"
UNCONSTRAINED = "unconstrained"
_ROLES = (QUANTILE, MONOTONE, UNCONSTRAINED)


class GridMismatchError(ValueError):
    """Two grid functions live on different grids."""


class LogImageError(ValueError):
    """A tangent vector lies outside the logarithmic image at Lebesgue."""


class QuantileValueError(ValueError):
    """Values violate the invariants of the requested role."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``0, h, ..., 1 - h`` with ``M = round(1 / h)`` nodes."""

    h: float
    M: int = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"granularity must lie in (0, 1), got {self.h}")
        M = int(round(1.0 / self.h))
        if M < 2 or abs(self.h * M - 1.0) > 1e-9:
            raise ValueError(f"1/h must be an integer >= 2, got h={self.h}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "h", 1.0 / M)

    @classmethod
    def from_size(cls, M: int) -> "Grid":
        return cls(1.0 / M)

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights with the constant last cell folded in."""
        w = np.full(self.M, self.h)
        w[0] = 0.5 * self.h
        w[-1] = 1.5 * self.h
        return w

    def __eq__(self, other):
        return isinstance(other, Grid) and self.M == other.M

    def __hash__(self):
        return hash(self.M)


def _check_values(values: np.ndarray, role: str) -> None:
    if not np.all(np.isfinite(values)):
        raise QuantileValueError("grid values must be finite")
    if role == UNCONSTRAINED:
        return
    d = np.diff(values, axis=-1)
    if d.size and d.min() < -MONO_TOL:
        k = int(np.argmin(d))
        raise QuantileValueError(
            f"values decrease between nodes {k} and {k + 1} by {-d.min():.3g}")
    if role == QUANTILE and (values.min() < -MONO_TOL or values.max() > 1 + MONO_TOL):
        raise QuantileValueError(
            f"quantile values must lie in [0, 1], got [{values.min():.6g}, {values.max():.6g}]")


@dataclass(frozen=True, eq=False)
class QuantileGrid:
    """Grid function; ``role`` is one of ``quantile``, ``monotone``, ``unconstrained``."""

    grid: Grid
    values: np.ndarray
    role: str = QUANTILE

    def __post_init__(self):
        if self.role not in _ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.M,):
            raise GridMismatchError(f"expected {self.grid.M} values, got shape {v.shape}")
        _check_values(v, self.role)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        return (isinstance(other, QuantileGrid) and self.grid == other.grid
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def __len__(self):
        return self.grid.M

    # Linear combinations leave the space of quantile functions.
    def __add__(self, other):
        return QuantileGrid(self.grid, self.values + _vals(self, other), UNCONSTRAINED)

    def __sub__(self, other):
        return QuantileGrid(self.grid, self.values - _vals(self, other), UNCONSTRAINED)

    def __mul__(self, c: float):
        return QuantileGrid(self.grid, self.values * float(c), UNCONSTRAINED)

    __rmul__ = __mul__

    def __call__(self, x):
        """Evaluate the interpolant at arbitrary points of [0, 1]."""
        return interp(np.asarray(x, dtype=float), self.values, self.grid)


def _vals(f: QuantileGrid, other) -> np.ndarray | float:
    if isinstance(other, QuantileGrid):
        _same_grid(f, other)
        return other.values
    return float(other)


def _same_grid(*fs: QuantileGrid) -> Grid:
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid sizes differ: {grid.M} vs {f.grid.M}")
    return grid


def identity(grid: Grid) -> QuantileGrid:
    return QuantileGrid(grid, grid.points)


def constant(grid: Grid, c: float, role: str = QUANTILE) -> QuantileGrid:
    """Quantile function of the point mass at ``c`` (or any constant)."""
    return QuantileGrid(grid, np.full(grid.M, float(c)), role)


def dirac(grid: Grid, a: float) -> QuantileGrid:
    return constant(grid, a)


# ---------------------------------------------------------------------------
# array kernels (shared with the simulation and estimation code)
# ---------------------------------------------------------------------------

def interp(x: np.ndarray, values: np.ndarray, grid: Grid) -> np.ndarray:
    """Evaluate piecewise-linear grid functions at ``x``.

    ``values`` has shape ``(..., M)`` and ``x`` shape ``(..., K)``; leading
    axes broadcast. Points outside [0, 1] are clamped, and the last cell is
    constant.
    """
    M = grid.M
    s = np.clip(x, 0.0, 1.0) * M
    r = np.rint(s)
    s = np.where(np.abs(s - r) < 1e-9, r, s)
    k = np.minimum(np.floor(s).astype(np.intp), M - 1)
    frac = np.where(k >= M - 1, 0.0, s - k)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1 and k.ndim == 1:
        lo = values[k]
        hi = values[np.minimum(k + 1, M - 1)]
    else:
        nd = max(values.ndim, k.ndim)
        values = values.reshape((1,) * (nd - values.ndim) + values.shape)
        k = k.reshape((1,) * (nd - k.ndim) + k.shape)
        frac = frac.reshape(k.shape)
        lo = np.take_along_axis(values, k, axis=-1)
        hi = np.take_along_axis(values, np.minimum(k + 1, M - 1), axis=-1)
    return lo + frac * (hi - lo)


def left_inverse_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Left-continuous inverse of a nondecreasing grid function, on the grid.

    ``g(q) = inf{x in [0, 1] : f(x) >= q}`` on the interpolant of ``f``; at
    ``q = 0`` the strict version ``f(x) > 0`` is used. Empty sets map to 1.
    """
    v = np.asarray(values, dtype=float)
    M, h = grid.M, grid.h
    q = grid.points
    j = np.searchsorted(v, q, side="left")
    j[0] = np.searchsorted(v, 0.0, side="right")
    out = np.empty(M)
    out[j == 0] = 0.0
    out[j >= M] = 1.0
    mid = (j > 0) & (j < M)
    jm = j[mid]
    lo, hi = v[jm - 1], v[jm]
    out[mid] = (jm - 1) * h + h * (q[mid] - lo) / (hi - lo)
    return out


def project_monotone(y: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """Weighted isotonic regression by pool-adjacent-violators."""
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    means, weights, counts = [], [], []
    for yi, wi in zip(y, w):
        means.append(yi)
        weights.append(wi)
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, c2 = means.pop(), weights.pop(), counts.pop()
            m1, w1, c1 = means.pop(), weights.pop(), counts.pop()
            wt = w1 + w2
            means.append((m1 * w1 + m2 * w2) / wt)
            weights.append(wt)
            counts.append(c1 + c2)
    return np.repeat(means, counts)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def empirical_quantile(samples: Sequence[float], grid: Grid) -> QuantileGrid:
    """Empirical quantile function of a sample on ``[0, 1]``.

    At ``p > 0`` the value is the smallest order statistic whose empirical cdf
    reaches ``p``; at ``p = 0`` it is the sample minimum.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(x)) or x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError(f"samples must lie in [0, 1], got [{x[0]}, {x[-1]}]")
    n = x.size
    idx = np.ceil(n * grid.points - 1e-9).astype(np.intp) - 1
    return QuantileGrid(grid, x[np.clip(idx, 0, n - 1)])


@dataclass(frozen=True)
class SplineSpec:
    """Knots of a natural cubic spline on [0, 1]."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(x), float(y)) for x, y in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 3:
            raise ValueError("a spline needs at least 3 knots")
        xs = np.array([k[0] for k in knots])
        ys = np.array([k[1] for k in knots])
        if np.any(np.diff(xs) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        if np.any(np.diff(ys) < 0):
            raise ValueError("knot ordinates must be nondecreasing")
        if xs.min() < 0 or xs.max() > 1 or ys.min() < 0 or ys.max() > 1:
            raise ValueError("knots must lie in [0, 1] x [0, 1]")

    @property
    def anchored(self) -> bool:
        """True when the spline runs from (0, 0) to (1, 1)."""
        return self.knots[0] == (0.0, 0.0) and self.knots[-1] == (1.0, 1.0)


def spline_monotone(spec: SplineSpec, grid: Grid, *, return_repaired: bool = False):
    """Natural cubic spline through ``spec.knots`` sampled on ``grid``.

    Overshoot that makes the samples decrease is removed by isotonic
    projection, and values are clamped to [0, 1]. With ``return_repaired``
    the result is ``(QuantileGrid, bool)``, the flag telling whether the
    isotonic projection changed anything.
    """
    xs, ys = zip(*spec.knots)
    v = CubicSpline(xs, ys, bc_type="natural")(grid.points)
    repaired = bool(np.diff(v).min() < -MONO_TOL)
    if repaired:
        v = project_monotone(v)
    q = QuantileGrid(grid, np.clip(v, 0.0, 1.0))
    return (q, repaired) if return_repaired else q


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

def left_inverse(f: QuantileGrid) -> QuantileGrid:
    return QuantileGrid(f.grid, left_inverse_values(f.values, f.grid))


def compose(f: QuantileGrid, g: QuantileGrid) -> QuantileGrid:
    """``f o g`` with ``f`` interpolated linearly."""
    grid = _same_grid(f, g)
    role = QUANTILE if f.role == QUANTILE else MONOTONE
    if f.role == UNCONSTRAINED or g.role == UNCONSTRAINED:
        role = UNCONSTRAINED
    return QuantileGrid(grid, interp(g.values, f.values, grid), role)


def ominus(F: QuantileGrid, G: QuantileGrid) -> QuantileGrid:
    """Center ``F`` at ``G``: ``F o G^{-1}``."""
    return compose(F, left_inverse(G))


def oplus(Ftil: QuantileGrid, G: QuantileGrid) -> QuantileGrid:
    """Undo the centering: ``Ftil o G``."""
    return compose(Ftil, G)


def inner_leb(f: QuantileGrid, g: QuantileGrid) -> float:
    """L2 inner product on [0, 1] by the trapezoid rule."""
    grid = _same_grid(f, g)
    return float(np.dot(grid.weights, f.values * g.values))


def wasserstein(F: QuantileGrid, G: QuantileGrid) -> float:
    d = F - G
    return float(np.sqrt(max(inner_leb(d, d), 0.0)))


def frechet_mean(fs: Sequence[QuantileGrid]) -> QuantileGrid:
    if len(fs) == 0:
        raise ValueError("Fréchet mean of an empty list")
    grid = _same_grid(*fs)
    return QuantileGrid(grid, np.mean([f.values for f in fs], axis=0))


def log_leb(F: QuantileGrid) -> QuantileGrid:
    return QuantileGrid(F.grid, F.values - F.grid.points, UNCONSTRAINED)


def in_log_image(values: np.ndarray, grid: Grid, tol: float = MONO_TOL) -> bool:
    q = np.asarray(values) + grid.points
    return bool(np.diff(q, axis=-1).min() >= -tol and q.min() >= -tol and q.max() <= 1 + tol)


def exp_leb(g: QuantileGrid) -> QuantileGrid:
    q = g.values + g.grid.points
    if not in_log_image(g.values, g.grid):
        raise LogImageError(
            "g + id is not a quantile function on [0, 1]; "
            f"min increment {np.diff(q).min():.3g}, range [{q.min():.6g}, {q.max():.6g}]")
    return QuantileGrid(g.grid, np.clip(q, 0.0, 1.0))
