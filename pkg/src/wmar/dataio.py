"""CSV and JSON persistence for distributional series.

Two CSV layouts are understood:

``samples-long``
    header ``feature,time,value``; one raw observation per row, values
    already scaled to [0, 1]. Each (feature, time) cell becomes an empirical
    quantile function.
``grid-wide``
    header ``feature,time,q_0,...,q_{M-1}``; one quantile function per row.

Floats are written with Python's shortest round-trip ``repr`` so a written
series reads back bit for bit.
"""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .qfun import MONO_TOL, Grid, empirical_quantile, wasserstein, QuantileGrid
from .series import DistSeries

FORMATS = ("samples-long", "grid-wide")


class DataFormatError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class DatasetManifest:
    format: str
    h: float
    features: tuple[str, ...] = ()
    times: tuple[str, ...] = ()

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        Grid(self.h)
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "times", tuple(self.times))
        if len(set(self.features)) != len(self.features):
            raise ValueError("feature labels must be unique")
        if len(set(self.times)) != len(self.times):
            raise ValueError("time labels must be unique")

    @property
    def grid(self) -> Grid:
        return Grid(self.h)

    def to_json(self) -> str:
        d = asdict(self)
        d["features"], d["times"] = list(self.features), list(self.times)
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        return cls(**json.loads(text))


def _fmt(x: float) -> str:
    return repr(float(x))


def _ordered(labels, manifest_labels, what):
    if not manifest_labels:
        return labels
    if set(manifest_labels) != set(labels):
        raise DataFormatError(f"{what} labels differ from the manifest")
    return list(manifest_labels)


def read_samples_long(path, grid: Grid | None = None,
                      manifest: DatasetManifest | None = None) -> DistSeries:
    if grid is None:
        grid = manifest.grid if manifest else Grid(0.01)
    cells: dict[tuple[str, str], list[float]] = defaultdict(list)
    features: list[str] = []
    times: list[str] = []
    fseen, tseen = set(), set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["feature", "time", "value"]:
            raise DataFormatError(f"{path}: header must be feature,time,value; got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            f, t, v = row[0].strip(), row[1].strip(), row[2]
            try:
                x = float(v)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: not a number: {v!r}") from None
            if not 0.0 <= x <= 1.0:
                raise DataFormatError(f"{path}:{lineno}: value {x} outside [0, 1]")
            if f not in fseen:
                fseen.add(f)
                features.append(f)
            if t not in tseen:
                tseen.add(t)
                times.append(t)
            cells[(f, t)].append(x)
    features = _ordered(features, manifest.features if manifest else (), "feature")
    times = _ordered(times, manifest.times if manifest else (), "time")
    missing = [(f, t) for f in features for t in times if (f, t) not in cells]
    if missing:
        raise DataFormatError(f"{path}: missing cells, e.g. feature={missing[0][0]} "
                              f"time={missing[0][1]} ({len(missing)} in total)")
    values = np.array([[empirical_quantile(cells[(f, t)], grid).values for t in times]
                       for f in features])
    return DistSeries(grid, values, tuple(features), tuple(times))


def write_grid_wide(series: DistSeries, path) -> None:
    M = series.grid.M
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "time"] + [f"q_{k}" for k in range(M)])
        for i, f in enumerate(series.features):
            for t, tl in enumerate(series.times):
                w.writerow([f, tl] + [_fmt(x) for x in series.values[i, t]])


def read_grid_wide(path, manifest: DatasetManifest | None = None,
                   check_monotone: bool = True) -> DistSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["feature", "time"]:
            raise DataFormatError(f"{path}: header must start with feature,time")
        M = len(header) - 2
        if header[2:] != [f"q_{k}" for k in range(M)]:
            raise DataFormatError(f"{path}: quantile columns must be q_0..q_{M - 1} in order")
        if M < 2:
            raise DataFormatError(f"{path}: need at least 2 quantile columns")
        if manifest is not None and manifest.grid.M != M:
            raise DataFormatError(
                f"{path}: {M} quantile columns but manifest granularity h={manifest.h} "
                f"implies {manifest.grid.M}")
        grid = manifest.grid if manifest else Grid.from_size(M)
        rows: dict[tuple[str, str], np.ndarray] = {}
        features: list[str] = []
        times: list[str] = []
        fseen, tseen = set(), set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != M + 2:
                raise DataFormatError(f"{path}:{lineno}: expected {M + 2} fields, got {len(row)}")
            try:
                v = np.array([float(x) for x in row[2:]])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric quantile value") from None
            if check_monotone and np.diff(v).min() < -MONO_TOL:
                k = int(np.argmin(np.diff(v)))
                raise DataFormatError(
                    f"{path}:{lineno}: quantile row not monotone at q_{k} -> q_{k + 1}")
            f, t = row[0], row[1]
            if (f, t) in rows:
                raise DataFormatError(f"{path}:{lineno}: duplicate cell ({f}, {t})")
            rows[(f, t)] = v
            if f not in fseen:
                fseen.add(f)
                features.append(f)
            if t not in tseen:
                tseen.add(t)
                times.append(t)
    features = _ordered(features, manifest.features if manifest else (), "feature")
    times = _ordered(times, manifest.times if manifest else (), "time")
    missing = [(f, t) for f in features for t in times if (f, t) not in rows]
    if missing:
        raise DataFormatError(f"{path}: missing cells, e.g. feature={missing[0][0]} "
                              f"time={missing[0][1]} ({len(missing)} in total)")
    values = np.array([[rows[(f, t)] for t in times] for f in features])
    return DistSeries(grid, values, tuple(features), tuple(times))


def write_quantile_grid(q: QuantileGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "value"])
        for p, v in zip(q.grid.points, q.values):
            w.writerow([_fmt(p), _fmt(v)])


def read_quantile_grid(path) -> QuantileGrid:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["p", "value"]:
            raise DataFormatError(f"{path}: header must be p,value")
        vals = [float(r[1]) for r in reader if r]
    return QuantileGrid(Grid.from_size(len(vals)), vals)


@dataclass
class Violation:
    feature: str
    time: str
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    drift: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(series: DistSeries) -> ValidationReport:
    """Per-cell monotonicity/range checks and a per-feature drift score.

    The drift score is the Wasserstein distance between the Fréchet means of
    the first and second halves of each feature's series.
    """
    rep = ValidationReport()
    v = series.values
    d = np.diff(v, axis=-1)
    for i, f in enumerate(series.features):
        for t, tl in enumerate(series.times):
            if d[i, t].min() < -MONO_TOL:
                k = int(np.argmin(d[i, t]))
                rep.violations.append(Violation(f, tl, "monotonicity",
                                                f"decrease at q_{k} -> q_{k + 1}"))
            lo, hi = v[i, t].min(), v[i, t].max()
            if lo < -MONO_TOL or hi > 1 + MONO_TOL:
                rep.violations.append(Violation(f, tl, "range",
                                                f"values span [{lo:.6g}, {hi:.6g}]"))
        half = v.shape[1] // 2
        if half >= 1:
            a = QuantileGrid(series.grid, v[i, :half].mean(axis=0), "unconstrained")
            b = QuantileGrid(series.grid, v[i, half:].mean(axis=0), "unconstrained")
            rep.drift[f] = wasserstein(a, b)
    return rep
