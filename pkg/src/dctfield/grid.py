"""Search-region discretization and gridded field values.

A rectangular region is split into ``n_x`` by ``n_y`` cells; field samples and
measurements live at the cell midpoints, addressed by integer position indices
``(ix, iy)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Rectangular search region and its discretization counts."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int
    n_y: int

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid bounds must satisfy x_max > x_min and y_max > y_min")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("grid counts must be >= 1")

    @property
    def delta_x(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def delta_y(self) -> float:
        return (self.y_max - self.y_min) / self.n_y

    @property
    def n_points(self) -> int:
        return self.n_x * self.n_y

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_y)

    def x_centers(self) -> np.ndarray:
        return self.x_min + (0.5 + np.arange(self.n_x)) * self.delta_x

    def y_centers(self) -> np.ndarray:
        return self.y_min + (0.5 + np.arange(self.n_y)) * self.delta_y

    def index_in_grid(self, index: tuple[int, int]) -> bool:
        ix, iy = index
        return 0 <= ix < self.n_x and 0 <= iy < self.n_y

    def coords(self, index: tuple[int, int]) -> tuple[float, float]:
        """Continuous coordinates of the cell midpoint at a position index."""
        if not self.index_in_grid(index):
            raise IndexError(f"position index {index} outside {self.n_x}x{self.n_y} grid")
        ix, iy = index
        return (
            self.x_min + (0.5 + ix) * self.delta_x,
            self.y_min + (0.5 + iy) * self.delta_y,
        )

    def closest_index(self, point: tuple[float, float]) -> tuple[int, int]:
        """Position index whose cell midpoint is nearest to ``point``.

        A point equidistant from two midpoints (i.e. exactly on a cell
        boundary) resolves to the lower index.
        """
        x, y = point
        return (
            _closest_1d(x, self.x_min, self.delta_x, self.n_x),
            _closest_1d(y, self.y_min, self.delta_y, self.n_y),
        )

    def contains(self, point: tuple[float, float]) -> bool:
        x, y = point
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


def _closest_1d(x: float, lo: float, delta: float, n: int) -> int:
    t = (x - lo) / delta
    i = int(np.floor(t))
    # cell-boundary tie goes to the lower index
    if i == t and i > 0:
        i -= 1
    return min(max(i, 0), n - 1)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Field values sampled at every grid midpoint; ``values[ix, iy]``."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != self.spec.shape:
            raise ValueError(f"values shape {arr.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", arr)
