"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are also collected in
the pytest terminal summary.
"""
import time

import numpy as np
import pytest

from conftest import VOLATILE_OUTPUTS, brute_simplex_qp, cli_pipeline, noiseless_chain, record_criterion
from wmar.estimate import FitOptions, center_series, fit, fit_row, gram, project_simplex
from wmar.qfun import Grid, dirac, identity, inner_leb, wasserstein
from wmar.simulate import (
    DistortionSpec,
    SimConfig,
    distortion_values,
    gen_coeffs,
    generate,
    sample_xi,
)
from wmar.study import rmsd_study

GRID = Grid(0.01)


def test_criterion_01_noise_mean_identity():
    t0 = time.perf_counter()
    spec = DistortionSpec.from_knots(GRID)
    E = distortion_values(spec, sample_xi(np.random.default_rng(1), 10 ** 4))
    dev = np.abs(E.mean(axis=0) - GRID.points).max()
    secs = time.perf_counter() - t0
    ok = dev <= 0.02 and secs < 5
    assert record_criterion(1, ok, f"sup|mean - id| = {dev:.5f} (<= 0.02), {secs:.2f} s")


def test_criterion_02_lipschitz_bound():
    t0 = time.perf_counter()
    spec = DistortionSpec.from_knots(GRID)
    E = distortion_values(spec, sample_xi(np.random.default_rng(2), 10 ** 3))
    slope = (np.diff(E, axis=1) / GRID.h).max()
    secs = time.perf_counter() - t0
    ok = slope <= 2 + 1e-6 and secs < 5
    assert record_criterion(2, ok, f"max slope = {slope:.6f} (<= 2 + 1e-6), {secs:.2f} s")


def _study_checks(rows):
    by = {}
    for r in rows:
        by.setdefault(r.alpha, {})[r.T] = r.mean
    decreasing = all(m[500] > m[1000] > m[2000] for m in by.values())
    ratio = {a: m[2000] / m[500] for a, m in by.items()}
    return by, decreasing, ratio, by[0.1][2000] <= by[0.5][2000]


@pytest.mark.slow
def test_criterion_03_rmsd_convergence():
    t0 = time.perf_counter()
    by, decreasing, ratio, alpha_ok = _study_checks(rmsd_study(seed=0))
    # the alpha ordering may fail in at most one of three reruns
    alpha_runs = [alpha_ok] + [_study_checks(rmsd_study(seed=s))[3] for s in (1000, 2000)]
    secs = time.perf_counter() - t0
    ok = (decreasing and max(ratio.values()) < 0.7 and sum(alpha_runs) >= 2 and secs < 600)
    means = "; ".join(f"alpha={a}: " + ", ".join(f"{m[T]:.3f}" for T in sorted(m))
                      for a, m in by.items())
    detail = (f"mean RMSD at T=200,500,1000,2000 {means}; "
              f"ratio 2000/500 = {max(ratio.values()):.3f}; "
              f"alpha ordering held in {sum(alpha_runs)}/3 runs; {secs:.0f} s")
    assert record_criterion(3, ok, detail)


def test_criterion_04_centering_identity():
    syn = generate(SimConfig(N=10, T=500, seed=4))
    centered, _ = center_series(syn.raw)
    dev = np.abs(centered.values.mean(axis=1) - GRID.points).max()
    ok = dev <= 2 * GRID.h
    assert record_criterion(4, ok, f"max deviation = {dev:.2e} (<= {2 * GRID.h})")


def test_criterion_05_quadrature_oracles():
    ii = inner_leb(identity(GRID), identity(GRID))
    dd = max(abs(wasserstein(dirac(GRID, a), dirac(GRID, b)) - abs(a - b))
             for a in np.linspace(0, 1, 11) for b in np.linspace(0, 1, 11))
    wd = wasserstein(identity(GRID), dirac(GRID, 0.5))
    ok = abs(ii - 1 / 3) <= 1e-3 and dd <= 1e-9 and abs(wd - np.sqrt(1 / 12)) <= 1e-3
    assert record_criterion(5, ok, f"<id,id> = {ii:.6f}, dirac error = {dd:.1e}, "
                                   f"W(id, dirac .5) = {wd:.6f} vs {np.sqrt(1 / 12):.6f}")


def test_criterion_06_projection_oracle():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        v = rng.uniform(-1, 2, int(rng.integers(1, 4)))
        worst = max(worst, np.abs(project_simplex(v) - brute_simplex_qp(v, 1e-3)).max())
    ok = worst <= 2e-3
    assert record_criterion(6, ok, f"max deviation from mesh QP = {worst:.2e} (<= 2e-3)")


def test_criterion_07_noiseless_recurrence():
    # the chain is already centered, so it goes straight to the Gram matrices
    chain = noiseless_chain(GRID, 0.4, GRID.points ** 2, 50)
    a = fit_row(gram(chain), 0, FitOptions()).coef[0]
    ok = abs(a - 0.4) <= 1e-3
    assert record_criterion(7, ok, f"fitted a = {a:.6f} (0.4 +/- 1e-3)")


def test_criterion_08_constrained_agrees_with_unconstrained():
    opts = FitOptions()
    gaps, seed = [], 0
    while len(gaps) < 20 and seed < 200:
        syn = generate(SimConfig(N=2, T=2000, alpha=0.1, density=1.0, seed=seed))
        seed += 1
        rep = fit(syn.raw, opts)
        if rep.unconstrained_feasible:
            gaps.append(np.linalg.norm(rep.A_hat - rep.A_unconstrained))
    ok = len(gaps) == 20 and max(gaps) <= 10 * opts.tol
    assert record_criterion(8, ok, f"{len(gaps)} feasible datasets from {seed} seeds, "
                                   f"max ||A - A_o||_F = {max(gaps):.2e} (<= {10 * opts.tol})")


def test_criterion_09_coefficient_generator():
    rng = np.random.default_rng(9)
    worst_norm, worst_row, min_entry = 0.0, 0.0, np.inf
    for k in range(100):
        alpha = (0.1, 0.5, 1.0, 3.0)[k % 4]
        A = gen_coeffs(SimConfig(N=10, alpha=alpha, density=0.2), rng)
        worst_norm = max(worst_norm,
                         abs(np.linalg.svd(A, compute_uv=False)[0] - 1 / (2 + alpha)))
        worst_row = max(worst_row, A.sum(axis=1).max())
        min_entry = min(min_entry, A.min())
    ok = min_entry >= 0 and worst_row <= 1 and worst_norm <= 1e-6
    assert record_criterion(9, ok, f"min entry {min_entry:.3g}, max row sum {worst_row:.4f}, "
                                   f"max norm error {worst_norm:.1e}")


def test_criterion_10_cli_determinism(tmp_path):
    a = cli_pipeline(tmp_path / "a")
    b = cli_pipeline(tmp_path / "b")
    primary = sorted(k for k in a if k.split("/")[-1] not in VOLATILE_OUTPUTS)
    differ = [k for k in primary if a[k] != b.get(k)]
    ok = not differ and set(a) == set(b)
    assert record_criterion(10, ok, f"{len(primary)} primary files byte-identical"
                                    + (f"; differing: {differ}" if differ else ""))
