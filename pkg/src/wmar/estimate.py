"""Estimation of the WMAR coefficient matrix.

Pipeline: center every feature at its empirical Fréchet mean, form the lag-0
and lag-1 Gram matrices of the log-mapped series, then solve one
simplex-constrained quadratic program per row with accelerated projected
gradient descent.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qfun import (
    MONO_TOL,
    GridMismatchError,
    Grid,
    QuantileGrid,
    interp,
    left_inverse_values,
)
from .series import DistSeries
from .simulate import spectral_norm

COND_MAX = 1e12
# Gram entries are integrals of squared log maps, at most 1 in size.
EIG_FLOOR = 1e-14


class GramSingularError(ValueError):
    """The lag-0 Gram matrix is singular or too ill-conditioned to invert."""


class DegenerateCenteringWarning(UserWarning):
    """A Fréchet mean has a plateau, so its inverse is only left-continuous."""


class ShortSeriesWarning(UserWarning):
    """Fewer transitions than features; the lag-0 Gram matrix is poorly estimated."""


@dataclass(frozen=True)
class FitOptions:
    tol: float = 1e-4
    max_iter: int = 50_000
    ridge: float = 0.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


@dataclass(frozen=True)
class GramPair:
    gamma0: np.ndarray
    gamma1: np.ndarray


@dataclass
class RowFit:
    coef: np.ndarray
    iters: int
    objective: float
    converged: bool
    restart_objectives: list[float] = field(default_factory=list)


@dataclass
class FitReport:
    A_hat: np.ndarray
    gram: GramPair
    means: list[QuantileGrid]
    iters: list[int]
    objective: list[float]
    converged: list[bool]
    options: FitOptions
    features: tuple[str, ...] = ()
    A_unconstrained: np.ndarray | None = None
    ridge_used: bool = False
    unconstrained_feasible: bool = False
    degenerate_centering: bool = False

    @property
    def grid(self) -> Grid:
        return self.means[0].grid

    @property
    def N(self) -> int:
        return self.A_hat.shape[0]

    def to_dict(self) -> dict:
        def mat(a):
            return None if a is None else [[float(x) for x in row] for row in a]

        return {
            "N": self.N,
            "features": list(self.features),
            "h": self.grid.h,
            "M": self.grid.M,
            "A_hat": mat(self.A_hat),
            "A_unconstrained": mat(self.A_unconstrained),
            "gamma0": mat(self.gram.gamma0),
            "gamma1": mat(self.gram.gamma1),
            "means": [[float(x) for x in m.values] for m in self.means],
            "iters": [int(k) for k in self.iters],
            "objective": [float(o) for o in self.objective],
            "converged": [bool(c) for c in self.converged],
            "options": {"tol": self.options.tol, "max_iter": self.options.max_iter,
                        "ridge": self.options.ridge},
            "flags": {"ridge_used": self.ridge_used,
                      "unconstrained_feasible": self.unconstrained_feasible,
                      "degenerate_centering": self.degenerate_centering},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        grid = Grid.from_size(int(d["M"]))
        arr = lambda key: None if d.get(key) is None else np.array(d[key], dtype=float)  # noqa: E731
        flags = d.get("flags", {})
        return cls(
            A_hat=arr("A_hat"),
            gram=GramPair(arr("gamma0"), arr("gamma1")),
            means=[QuantileGrid(grid, m) for m in d["means"]],
            iters=list(d["iters"]),
            objective=list(d["objective"]),
            converged=list(d["converged"]),
            options=FitOptions(**d["options"]),
            features=tuple(d.get("features", ())),
            A_unconstrained=arr("A_unconstrained"),
            ridge_used=flags.get("ridge_used", False),
            unconstrained_feasible=flags.get("unconstrained_feasible", False),
            degenerate_centering=flags.get("degenerate_centering", False),
        )

    @classmethod
    def from_json(cls, text: str) -> "FitReport":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# centering and Gram matrices
# ---------------------------------------------------------------------------

def _is_degenerate(mean: np.ndarray) -> bool:
    return bool(np.diff(mean).min() <= MONO_TOL)


def center_series(raw: DistSeries) -> tuple[DistSeries, list[QuantileGrid]]:
    """Center each feature at its empirical Fréchet mean.

    Returns the centered series and the means; the mean averages all
    ``T + 1`` instants. A mean with a plateau triggers
    :class:`DegenerateCenteringWarning`.
    """
    if raw.T < 1:
        raise ValueError("need at least two instants")
    grid = raw.grid
    mean_vals = raw.values.mean(axis=1)
    inv = np.array([left_inverse_values(m, grid) for m in mean_vals])
    degenerate = [raw.features[i] for i, m in enumerate(mean_vals) if _is_degenerate(m)]
    if degenerate:
        warnings.warn(f"Fréchet mean has a plateau for features {degenerate}",
                      DegenerateCenteringWarning, stacklevel=2)
    centered = interp(inv[:, None, :], raw.values, grid)
    means = [QuantileGrid(grid, np.clip(m, 0.0, 1.0)) for m in mean_vals]
    return raw.with_values(centered), means


def gram(centered: DistSeries) -> GramPair:
    """Lag-0 and lag-1 Gram matrices of the log maps, averaged over ``t = 1 .. T``."""
    if centered.T < 1:
        raise ValueError("need at least two instants")
    w = centered.grid.weights
    L = centered.values - centered.grid.points
    prev, cur = L[:, :-1], L[:, 1:]
    T = centered.T
    g0 = np.einsum("jtm,ltm->jl", prev * w, prev) / T
    g1 = np.einsum("jtm,ltm->jl", cur * w, prev) / T
    return GramPair(0.5 * (g0 + g0.T), g1)


def _check_conditioning(gamma0: np.ndarray) -> None:
    eig = np.linalg.eigvalsh(gamma0)
    lo, hi = eig[0], eig[-1]
    if hi <= EIG_FLOOR or lo <= hi / COND_MAX:
        raise GramSingularError(
            f"gram singular: smallest eigenvalue of gamma0 is {lo:.3e} "
            f"(largest {hi:.3e}, condition limit {COND_MAX:.0e})")


def lse_unconstrained(g: GramPair) -> np.ndarray:
    """``gamma1 @ inv(gamma0)``, solved row-wise."""
    _check_conditioning(g.gamma0)
    return np.linalg.solve(g.gamma0, g.gamma1.T).T


# ---------------------------------------------------------------------------
# constrained rows
# ---------------------------------------------------------------------------

def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) <= 1}``."""
    v = np.asarray(v, dtype=float)
    w = np.maximum(v, 0.0)
    if w.sum() <= 1.0:
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def fit_row(g: GramPair, i: int, opts: FitOptions = FitOptions()) -> RowFit:
    """Minimize ``a G0 a^T / 2 - G1[i] a^T`` over the nonnegative l1 ball.

    FISTA with step ``1 / lambda_max(G0)`` from zero; a step that increases
    the objective is discarded and the momentum reset. Stops once
    consecutive iterates are within ``opts.tol`` in l2.
    """
    G0 = g.gamma0
    b = g.gamma1[i]
    n = b.size

    def objective(a):
        return 0.5 * a @ G0 @ a - b @ a

    lam = spectral_norm(G0)
    if lam <= 0:
        return RowFit(np.zeros(n), 0, 0.0, True, [0.0])
    step = 1.0 / lam
    x = np.zeros(n)
    y = x.copy()
    fx = 0.0
    t = 1.0
    restarts = [fx]
    for k in range(1, opts.max_iter + 1):
        x_new = project_simplex(y - step * (G0 @ y - b))
        f_new = objective(x_new)
        if f_new > fx and t > 1.0:
            y = x.copy()
            t = 1.0
            restarts.append(fx)
            continue
        moved = np.linalg.norm(x_new - x)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, fx, t = x_new, f_new, t_new
        if moved <= opts.tol:
            return RowFit(x, k, float(fx), True, restarts)
    return RowFit(x, opts.max_iter, float(fx), False, restarts)


def fit(raw: DistSeries, opts: FitOptions = FitOptions()) -> FitReport:
    """Center, build Gram matrices and fit every row under the simplex constraint."""
    if raw.T < raw.N:
        warnings.warn(f"T = {raw.T} < N = {raw.N}; gamma0 may be near singular",
                      ShortSeriesWarning, stacklevel=2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateCenteringWarning)
        centered, means = center_series(raw)
    degenerate = any(issubclass(w.category, DegenerateCenteringWarning) for w in caught)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)

    g = gram(centered)
    A_o = None
    ridge_used = False
    try:
        A_o = lse_unconstrained(g)
    except GramSingularError:
        if opts.ridge <= 0:
            raise
        ridge_used = True
        g = GramPair(g.gamma0 + opts.ridge * np.eye(raw.N), g.gamma1)
        _check_conditioning(g.gamma0)

    rows = [fit_row(g, i, opts) for i in range(raw.N)]
    A_hat = np.array([r.coef for r in rows])
    feasible = A_o is not None and bool(
        A_o.min() >= 0 and A_o.sum(axis=1).max() <= 1)
    return FitReport(
        A_hat=A_hat, gram=g, means=means,
        iters=[r.iters for r in rows],
        objective=[r.objective for r in rows],
        converged=[r.converged for r in rows],
        options=opts, features=raw.features,
        A_unconstrained=A_o, ridge_used=ridge_used,
        unconstrained_feasible=feasible, degenerate_centering=degenerate,
    )


def rmsd(A_hat, A) -> float:
    """Relative Frobenius error ``||A_hat - A||_F / ||A||_F``."""
    A_hat = np.asarray(A_hat, dtype=float)
    A = np.asarray(A, dtype=float)
    if A_hat.shape != A.shape:
        raise ValueError(f"shape mismatch {A_hat.shape} vs {A.shape}")
    denom = np.linalg.norm(A)
    if denom == 0:
        raise ValueError("reference matrix is all zero")
    return float(np.linalg.norm(A_hat - A) / denom)


def forecast_values(A_hat: np.ndarray, mean_vals: np.ndarray, last: np.ndarray,
                    grid: Grid) -> np.ndarray:
    inv = np.array([left_inverse_values(m, grid) for m in mean_vals])
    centered = interp(inv, last, grid)
    p = grid.points
    pred = A_hat @ (centered - p) + p
    return interp(mean_vals, pred, grid)


def forecast(report: FitReport, last_raw: Sequence[QuantileGrid]) -> list[QuantileGrid]:
    """One-step-ahead conditional-mean quantile functions."""
    grid = report.grid
    if len(last_raw) != report.N:
        raise ValueError(f"need {report.N} grids, got {len(last_raw)}")
    for f in last_raw:
        if f.grid != grid:
            raise GridMismatchError(f"forecast input has {f.grid.M} nodes, report has {grid.M}")
    means = np.array([m.values for m in report.means])
    last = np.array([f.values for f in last_raw])
    out = forecast_values(report.A_hat, means, last, grid)
    return [QuantileGrid(grid, np.clip(row, 0.0, 1.0)) for row in out]
