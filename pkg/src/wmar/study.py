"""Monte Carlo RMSD study: estimation error against sample size."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .estimate import FitOptions, fit, rmsd
from .simulate import DistortionSpec, SimConfig, gen_coeffs, generate, default_means


@dataclass(frozen=True)
class StudyRow:
    alpha: float
    T: int
    mean: float
    std: float
    seconds: float


def study_coeffs(N: int, alpha: float, density: float, seed: int) -> np.ndarray:
    """True matrix of a study; its stream is disjoint from the replicate seeds."""
    rng = np.random.default_rng([seed, 0xC0EF])
    return gen_coeffs(SimConfig(N=N, alpha=alpha, density=density, seed=seed), rng)


def _replicate(args) -> tuple[list[float], list[float]]:
    A, cfg, horizons, opts = args
    grid = cfg.grid
    syn = generate(cfg, A=A, spec=DistortionSpec.from_knots(grid),
                   means=default_means(cfg.N, grid))
    errs, secs = [], []
    for T in horizons:
        t0 = time.perf_counter()
        rep = fit(syn.raw.head(T + 1), opts)
        secs.append(time.perf_counter() - t0)
        errs.append(rmsd(rep.A_hat, A))
    return errs, secs


def rmsd_study(N: int = 10, alphas=(0.1, 0.5), horizons=(200, 500, 1000, 2000),
               replicates: int = 20, seed: int = 0, density: float = 0.2,
               burn_in: int = 200, h: float = 0.01, opts: FitOptions = FitOptions(),
               jobs: int = 1) -> list[StudyRow]:
    """Mean and standard deviation of RMSD for each ``alpha`` and ``T``.

    Every replicate simulates ``max(horizons)`` transitions once and fits
    the leading ``T + 1`` instants for each ``T``. Replicate ``r`` uses seed
    ``seed + r``.
    """
    horizons = sorted(int(T) for T in horizons)
    tasks, keys = [], []
    for alpha in alphas:
        A = study_coeffs(N, alpha, density, seed)
        for r in range(replicates):
            cfg = SimConfig(N=N, T=horizons[-1], burn_in=burn_in, alpha=alpha,
                            density=density, seed=seed + r, h=h)
            tasks.append((A, cfg, horizons, opts))
            keys.append(alpha)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_replicate, tasks))
    else:
        results = [_replicate(t) for t in tasks]
    rows = []
    for alpha in alphas:
        errs = np.array([res[0] for res, a in zip(results, keys) if a == alpha])
        secs = np.array([res[1] for res, a in zip(results, keys) if a == alpha])
        for k, T in enumerate(horizons):
            rows.append(StudyRow(float(alpha), T, float(errs[:, k].mean()),
                                 float(errs[:, k].std(ddof=1)) if len(errs) > 1 else 0.0,
                                 float(secs[:, k].mean())))
    return rows
