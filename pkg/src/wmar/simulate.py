"""Synthetic WMAR data: random distortions, coefficient matrices, forward runs.

Randomness comes from ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``). Replicate ``r`` of a study uses seed
``base_seed + r``; within a run the distortion coefficients are drawn in
``(t, i)`` order, one vector of ``N`` per step.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .qfun import (
    MONO_TOL,
    Grid,
    LogImageError,
    QuantileGrid,
    SplineSpec,
    interp,
    left_inverse_values,
    spline_monotone,
)
from .series import DistSeries

DEFAULT_G_KNOTS = ((0.0, 0.0), (0.2, 0.1), (0.6, 0.2), (1.0, 1.0))


def default_mean_knots(i: int, N: int) -> SplineSpec:
    """Knots of the Fréchet mean quantile of feature ``i`` (1-based) of ``N``."""
    return SplineSpec(((0.0, 0.0), (0.2, 0.1), (0.6, 0.2 + 0.2 * i / N), (1.0, 1.0)))


def default_means(N: int, grid: Grid) -> list[QuantileGrid]:
    return [spline_monotone(default_mean_knots(i, N), grid) for i in range(1, N + 1)]


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """Precomputed pieces of ``eps = (1+xi)/2 g o h^-1 + (1-xi)/2 h^-1``.

    ``h = (g + id) / 2``. Use :meth:`from_g` or :meth:`from_knots`.
    """

    g: QuantileGrid
    h_inv: QuantileGrid
    g_h_inv: QuantileGrid

    @classmethod
    def from_g(cls, g: QuantileGrid) -> "DistortionSpec":
        grid = g.grid
        if abs(g.values[0]) > MONO_TOL:
            raise ValueError("distortion base g must satisfy g(0) = 0")
        h = 0.5 * (g.values + grid.points)
        h_inv = QuantileGrid(grid, left_inverse_values(h, grid))
        g_h_inv = QuantileGrid(grid, interp(h_inv.values, g.values, grid))
        return cls(g, h_inv, g_h_inv)

    @classmethod
    def from_knots(cls, grid: Grid, knots=DEFAULT_G_KNOTS) -> "DistortionSpec":
        spec = SplineSpec(knots)
        if not spec.anchored:
            raise ValueError("distortion knots must start at (0, 0) and end at (1, 1)")
        return cls.from_g(spline_monotone(spec, grid))

    @property
    def grid(self) -> Grid:
        return self.g.grid


def distortion_values(spec: DistortionSpec, xi) -> np.ndarray:
    """Distortion grid values for an array of coefficients; shape ``xi.shape + (M,)``."""
    xi = np.asarray(xi, dtype=float)[..., None]
    return 0.5 * (1 + xi) * spec.g_h_inv.values + 0.5 * (1 - xi) * spec.h_inv.values


def gen_distortion(spec: DistortionSpec, xi: float) -> QuantileGrid:
    if not -1.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [-1, 1], got {xi}")
    return QuantileGrid(spec.grid, distortion_values(spec, xi))


def sample_xi(rng: np.random.Generator, size=None):
    """Uniform draws on [-1, 1]."""
    return rng.uniform(-1.0, 1.0, size)


@dataclass(frozen=True)
class SimConfig:
    N: int = 10
    T: int = 200
    burn_in: int = 200
    alpha: float = 0.5
    density: float = 0.2
    seed: int = 0
    h: float = 0.01

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        Grid(self.h)

    @property
    def grid(self) -> Grid:
        return Grid(self.h)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown SimConfig keys: {sorted(unknown)}")
        return cls(**data)


def spectral_norm(A, rtol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest singular value by power iteration on ``A^T A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = A.T @ A
    n = B.shape[0]
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ B @ v)
        if abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def gen_coeffs(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Sparse nonnegative matrix with spectral norm ``1 / (2 + alpha)``.

    Off-diagonal entries are kept with probability ``cfg.density``; the
    diagonal is always kept. Kept entries are uniform on (0, 1]. Rows are
    normalized to sum 1, then the matrix is divided by
    ``(2 + alpha) * ||A0||_2``.
    """
    N = cfg.N
    mask = rng.random((N, N)) < cfg.density
    np.fill_diagonal(mask, True)
    A0 = np.where(mask, 1.0 - rng.random((N, N)), 0.0)
    A0 /= A0.sum(axis=1, keepdims=True)
    return A0 / ((2.0 + cfg.alpha) * spectral_norm(A0))


def check_coeffs(A, L: float | None = 2.0) -> None:
    """Raise unless rows of ``A`` lie in the nonnegative l1 ball (and ``||A||_2 < 1/L``)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"coefficient matrix must be square, got {A.shape}")
    if A.min() < -MONO_TOL:
        raise ValueError("coefficients must be nonnegative")
    if A.sum(axis=1).max() > 1 + MONO_TOL:
        raise ValueError("coefficient row sums must not exceed 1")
    if L is not None and spectral_norm(A) >= 1.0 / L:
        raise ValueError(f"spectral norm must be below {1.0 / L}")


def step_values(A: np.ndarray, X_prev: np.ndarray, eps: np.ndarray, grid: Grid) -> np.ndarray:
    """One transition on arrays: ``eps_i o [sum_j A_ij (X_j - id) + id]``."""
    p = grid.points
    inner = A @ (X_prev - p) + p
    if np.diff(inner, axis=-1).min() < -MONO_TOL:
        i = int(np.argmin(np.diff(inner, axis=-1).min(axis=-1)))
        raise LogImageError(f"predictor of feature {i} is not monotone; check A")
    return interp(inner, eps, grid)


def step(A, X_prev: Sequence[QuantileGrid], eps: Sequence[QuantileGrid]) -> list[QuantileGrid]:
    grid = X_prev[0].grid
    A = np.atleast_2d(np.asarray(A, dtype=float))
    X = np.array([x.values for x in X_prev])
    E = np.array([e.values for e in eps])
    if A.shape != (len(X_prev), len(X_prev)) or len(eps) != len(X_prev):
        raise ValueError("A, X_prev and eps disagree on N")
    out = step_values(A, X, E, grid)
    return [QuantileGrid(grid, row) for row in out]


def simulate_centered(A, spec: DistortionSpec, cfg: SimConfig,
                      rng: np.random.Generator) -> DistSeries:
    """Run the chain from ``id`` and return the ``T + 1`` instants after burn-in."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    grid = spec.grid
    N = A.shape[0]
    if N != cfg.N:
        raise ValueError(f"A is {N}x{N} but cfg.N = {cfg.N}")
    X = np.tile(grid.points, (N, 1))
    out = np.empty((N, cfg.T + 1, grid.M))
    for t in range(cfg.burn_in + cfg.T + 1):
        eps = distortion_values(spec, sample_xi(rng, N))
        X = step_values(A, X, eps, grid)
        k = t - cfg.burn_in
        if k >= 0:
            out[:, k] = X
    return DistSeries(grid, out)


def synthesize_raw(centered: DistSeries, means: Sequence[QuantileGrid]) -> DistSeries:
    """Push each feature back to its Fréchet mean: ``F_t = Ftil_t o F_mean``."""
    if len(means) != centered.N:
        raise ValueError("one mean per feature required")
    M = np.array([m.values for m in means])
    raw = interp(M[:, None, :], centered.values, centered.grid)
    return centered.with_values(raw)


@dataclass
class Synthetic:
    """Everything produced by one synthetic run."""

    A: np.ndarray
    centered: DistSeries
    raw: DistSeries
    means: list[QuantileGrid] = field(default_factory=list)


def generate(cfg: SimConfig, A=None, spec: DistortionSpec | None = None,
             means: Sequence[QuantileGrid] | None = None) -> Synthetic:
    """Coefficients (unless given), centered chain and raw series from ``cfg.seed``."""
    grid = cfg.grid
    rng = np.random.default_rng(cfg.seed)
    if A is None:
        A = gen_coeffs(cfg, rng)
    spec = spec or DistortionSpec.from_knots(grid)
    means = list(means) if means is not None else default_means(cfg.N, grid)
    centered = simulate_centered(A, spec, cfg, rng)
    return Synthetic(np.asarray(A), centered, synthesize_raw(centered, means), means)
