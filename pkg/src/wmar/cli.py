"""Command-line interface: ``wmar <command> [options]``.

Every command writes its outputs into ``--out-dir`` and exits 0 on success.
On failure a single JSON line ``{"error": ..., "message": ...}`` goes to
stderr and the exit code is 1 (2 for usage errors).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio, graphx, svg
from .estimate import FitOptions, FitReport, center_series, fit, forecast
from .qfun import Grid, wasserstein
from .series import DistSeries
from .simulate import SimConfig, generate
from .study import rmsd_study


def _out(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _read_series(path: str, h: float | None) -> DistSeries:
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
    if header[:3] == ["feature", "time", "value"]:
        return dataio.read_samples_long(path, grid=Grid(h or 0.01))
    manifest = None
    if h is not None:
        manifest = dataio.DatasetManifest("grid-wide", h)
    return dataio.read_grid_wide(path, manifest=manifest)


def _write_means(means, features, path: Path) -> None:
    values = np.array([[m.values] for m in means])
    s = DistSeries(means[0].grid, values, features, ("mean",))
    dataio.write_grid_wide(s, path)


def _fit_options(args) -> FitOptions:
    return FitOptions(tol=args.tol, max_iter=args.max_iter, ridge=args.ridge)


def _formats(args, default):
    return set(args.format) if args.format else set(default)


def cmd_simulate(args) -> list[Path]:
    if args.config:
        cfg = SimConfig.from_json(Path(args.config).read_text())
    else:
        cfg = SimConfig(N=args.features, T=args.horizon, burn_in=args.burn_in,
                        alpha=args.alpha, density=args.density, seed=args.seed, h=args.grid_h)
    out = _out(args)
    syn = generate(cfg)
    labels = tuple(str(i + 1) for i in range(cfg.N))
    raw = DistSeries(syn.raw.grid, syn.raw.values, labels)
    centered = DistSeries(syn.centered.grid, syn.centered.values, labels)
    paths = [out / "config.json", out / "coeffs.json", out / "raw.csv",
             out / "centered.csv", out / "true_means.csv"]
    paths[0].write_text(cfg.to_json() + "\n")
    paths[1].write_text(json.dumps({"N": cfg.N, "alpha": cfg.alpha, "features": list(labels),
                                    "A": syn.A.tolist()}, indent=2) + "\n")
    dataio.write_grid_wide(raw, paths[2])
    dataio.write_grid_wide(centered, paths[3])
    _write_means(syn.means, labels, paths[4])
    if "svg" in _formats(args, ()):
        p = out / "fan.svg"
        p.write_text(svg.quantile_fan(raw.grid.points, raw.values[0],
                                      title=f"feature {labels[0]}: raw quantile functions"))
        paths.append(p)
    return paths


def cmd_fit(args) -> list[Path]:
    series = _read_series(args.input, args.grid_h)
    report = fit(series, _fit_options(args))
    out = _out(args)
    p = out / "fit.json"
    p.write_text(report.to_json() + "\n")
    return [p]


def cmd_forecast(args) -> list[Path]:
    report = FitReport.from_json(Path(args.report).read_text())
    series = _read_series(args.input, report.grid.h)
    if series.features != report.features:
        raise ValueError("input features differ from the fitted report")
    out = _out(args)
    current = series.instant(series.T)
    paths = []
    steps = []
    for _ in range(args.steps):
        current = forecast(report, current)
        steps.append(current)
    values = np.array([[steps[k][i].values for k in range(args.steps)]
                       for i in range(series.N)])
    fc = DistSeries(series.grid, values, series.features,
                    tuple(f"+{k + 1}" for k in range(args.steps)))
    p = out / "forecast.csv"
    dataio.write_grid_wide(fc, p)
    paths.append(p)
    return paths


def cmd_graph(args) -> list[Path]:
    report = FitReport.from_json(Path(args.report).read_text())
    labels = report.features or None
    el = graphx.to_edges(report.A_hat, labels, args.threshold)
    out = _out(args)
    fmts = _formats(args, ("dot", "json", "csv"))
    paths = []
    if "dot" in fmts:
        paths.append(out / "graph.dot")
        paths[-1].write_text(graphx.export_dot(el))
    if "json" in fmts:
        paths.append(out / "graph.json")
        paths[-1].write_text(graphx.export_json(el) + "\n")
    if "csv" in fmts:
        paths.append(out / "edges.csv")
        paths[-1].write_text(graphx.export_csv(el.edges))
        paths.append(out / "topk.csv")
        paths[-1].write_text(graphx.export_csv(graphx.top_k(report.A_hat, labels, args.top_k)))
    return paths


def cmd_center(args) -> list[Path]:
    series = _read_series(args.input, args.grid_h)
    centered, means = center_series(series)
    out = _out(args)
    paths = [out / "centered.csv", out / "means.csv"]
    dataio.write_grid_wide(centered, paths[0])
    _write_means(means, series.features, paths[1])
    return paths


def cmd_distance(args) -> list[Path]:
    series = _read_series(args.input, args.grid_h)
    if args.time is not None and args.time not in series.times:
        raise ValueError(f"unknown time label {args.time!r}")
    times = [args.time] if args.time is not None else list(series.times)
    out = _out(args)
    p = out / "distances.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "feature_a", "feature_b", "distance"])
        for tl in times:
            t = series.times.index(tl)
            grids = series.instant(t)
            for a in range(series.N):
                for b in range(a + 1, series.N):
                    w.writerow([tl, series.features[a], series.features[b],
                                repr(wasserstein(grids[a], grids[b]))])
    return [p]


def cmd_fan(args) -> list[Path]:
    series = _read_series(args.input, args.grid_h)
    feat = args.feature if args.feature is not None else series.features[0]
    if feat not in series.features:
        raise ValueError(f"unknown feature {feat!r}")
    i = series.features.index(feat)
    out = _out(args)
    p = out / "fan.svg"
    p.write_text(svg.quantile_fan(series.grid.points, series.values[i],
                                  title=f"feature {feat}"))
    return [p]


def cmd_rmsd_study(args) -> list[Path]:
    rows = rmsd_study(N=args.features, alphas=args.alpha, horizons=args.horizons,
                      replicates=args.replicates, seed=args.seed, density=args.density,
                      burn_in=args.burn_in, h=args.grid_h, opts=_fit_options(args),
                      jobs=args.jobs)
    out = _out(args)
    paths = [out / "rmsd.csv", out / "rmsd_timing.csv"]
    with open(paths[0], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "T", "mean_rmsd", "std_rmsd"])
        for r in rows:
            w.writerow([repr(r.alpha), r.T, repr(r.mean), repr(r.std)])
    with open(paths[1], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "T", "mean_seconds"])
        for r in rows:
            w.writerow([repr(r.alpha), r.T, f"{r.seconds:.6f}"])
    alphas = sorted({r.alpha for r in rows})

    def curves(attr):
        return [(f"alpha={a:g}", [r.T for r in rows if r.alpha == a],
                 [getattr(r, attr) for r in rows if r.alpha == a]) for a in alphas]

    if "svg" in _formats(args, ("svg",)):
        for attr, name, label in (("mean", "rmsd_mean.svg", "mean RMSD"),
                                  ("std", "rmsd_std.svg", "std of RMSD"),
                                  ("seconds", "rmsd_time.svg", "seconds per fit")):
            p = out / name
            p.write_text(svg.line_chart(curves(attr), title=f"{label}, N={args.features}",
                                        xlabel="T", ylabel=label))
            paths.append(p)
    return paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wmar", description="Wasserstein multivariate autoregression on [0, 1].")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_h_default=None):
        p.add_argument("--out-dir", default=".", help="output directory (default: .)")
        p.add_argument("--grid-h", type=float, default=grid_h_default,
                       help="grid granularity h; 1/h must be an integer")

    def fitting(p):
        p.add_argument("--tol", type=float, default=1e-4,
                       help="stop when consecutive iterates differ by at most this (l2)")
        p.add_argument("--max-iter", type=int, default=50_000, help="iteration cap per row")
        p.add_argument("--ridge", type=float, default=0.0,
                       help="diagonal loading used only if gamma0 is singular (flagged)")

    p = sub.add_parser("simulate", help="simulate a WMAR series with a random sparse A")
    common(p, 0.01)
    p.add_argument("--features", type=int, default=10, help="number of features N")
    p.add_argument("--horizon", type=int, default=200, help="number of transitions T")
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--alpha", type=float, default=0.5, help="A is scaled to norm 1/(2+alpha)")
    p.add_argument("--density", type=float, default=0.2,
                   help="probability of a nonzero off-diagonal coefficient")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="SimConfig JSON; overrides the flags above")
    p.add_argument("--format", action="append", choices=["csv", "svg"],
                   help="add 'svg' for a quantile fan of feature 1")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="estimate A from a series CSV")
    common(p)
    p.add_argument("--input", required=True, help="grid-wide or samples-long CSV")
    p.add_argument("--seed", type=int, default=0, help="unused; fitting is deterministic")
    fitting(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="forecast the next instants from a fit report")
    common(p)
    p.add_argument("--report", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--steps", type=int, default=1, help="number of steps ahead")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("graph", help="export the estimated dependency graph")
    common(p)
    p.add_argument("--report", required=True)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--format", action="append", choices=["dot", "json", "csv"])
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("center", help="center a series at its Fréchet means")
    common(p)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_center)

    p = sub.add_parser("distance", help="pairwise Wasserstein distances between features")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--time", help="restrict to one time label")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("fan", help="quantile fan SVG of one feature")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--feature")
    p.set_defaults(func=cmd_fan)

    p = sub.add_parser("rmsd-study", help="RMSD of the estimator against T")
    common(p, 0.01)
    p.add_argument("--features", type=int, default=10)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.1, 0.5])
    p.add_argument("--horizons", type=int, nargs="+", default=[200, 500, 1000, 2000])
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--density", type=float, default=0.2)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--format", action="append", choices=["csv", "svg"])
    fitting(p)
    p.set_defaults(func=cmd_rmsd_study)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        for p in args.func(args):
            print(p)
    except Exception as exc:  # reported as one machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
