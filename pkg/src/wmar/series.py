"""Container for multivariate distributional time series."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qfun import GridMismatchError, Grid, QuantileGrid


@dataclass(frozen=True, eq=False)
class DistSeries:
    """``N`` features observed at ``T + 1`` instants on a common grid.

    ``values[i, t]`` holds the grid values of feature ``i`` at instant ``t``.
    Construction does not check monotonicity; use ``dataio.validate`` or
    ``as_grid`` for that.
    """

    grid: Grid
    values: np.ndarray
    features: tuple[str, ...] = ()
    times: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 3 or v.shape[2] != self.grid.M:
            raise GridMismatchError(
                f"expected array of shape (N, T+1, {self.grid.M}), got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        N, T1, _ = v.shape
        features = tuple(str(f) for f in self.features) or tuple(str(i + 1) for i in range(N))
        times = tuple(str(t) for t in self.times) or tuple(str(t) for t in range(T1))
        if len(features) != N or len(set(features)) != N:
            raise ValueError(f"need {N} unique feature labels, got {features!r}")
        if len(times) != T1 or len(set(times)) != T1:
            raise ValueError(f"need {T1} unique time labels")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "times", times)

    @classmethod
    def from_grids(cls, grids: Sequence[Sequence[QuantileGrid]], features=(), times=()):
        grid = grids[0][0].grid
        for row in grids:
            for g in row:
                if g.grid != grid:
                    raise GridMismatchError("all grids of a series must share one grid")
        values = np.array([[g.values for g in row] for row in grids])
        return cls(grid, values, tuple(features), tuple(times))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        """Number of transitions, i.e. instants minus one."""
        return self.values.shape[1] - 1

    def as_grid(self, i: int, t: int) -> QuantileGrid:
        return QuantileGrid(self.grid, self.values[i, t])

    def instant(self, t: int) -> list[QuantileGrid]:
        return [self.as_grid(i, t) for i in range(self.N)]

    def head(self, n_instants: int) -> "DistSeries":
        """The first ``n_instants`` instants."""
        return DistSeries(self.grid, self.values[:, :n_instants], self.features,
                          self.times[:n_instants])

    def with_values(self, values: np.ndarray) -> "DistSeries":
        return DistSeries(self.grid, values, self.features, self.times)

    def __eq__(self, other):
        return (isinstance(other, DistSeries) and self.grid == other.grid
                and self.features == other.features and self.times == other.times
                and np.array_equal(self.values, other.values))

    __hash__ = None
