"""Mark/trail algebra: evaporating intensity deposits on discretized spaces.

A trail is a grid of non-negative intensities. Marks (a trapezoid profile on a
1-D value axis, a truncated cone on a 2-D plane) are deposited additively; a
constant amount evaporates from every cell each step, clamped at zero. Trails
built from two sample streams are compared with the Jaccard coefficient
(sum of cell-wise minima over sum of cell-wise maxima).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

DEFAULT_CELL_COUNT = 100
DEFAULT_PLATEAU_FRACTION = 0.5
DEFAULT_CELL_SIZE_M = 50.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TrapezoidMark:
    """Symmetric trapezoid deposit on a value axis.

    Full ``intensity`` within ``plateau_fraction * width / 2`` of ``center``,
    linear falloff to zero at ``width / 2``.
    """

    center: float
    intensity: float = 1.0
    width: float = 0.2
    plateau_fraction: float = DEFAULT_PLATEAU_FRACTION

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError(f"mark width must be positive, got {self.width}")
        if self.intensity < 0:
            raise ValueError("mark intensity must be non-negative")
        if not 0 < self.plateau_fraction <= 1:
            raise ValueError("plateau_fraction must be in (0, 1]")


@dataclass(frozen=True)
class Trail1D:
    """Intensity trail over a discretized value axis."""

    cells: np.ndarray
    axis_min: float = 0.0
    axis_max: float = 1.0

    def __post_init__(self) -> None:
        cells = _readonly(self.cells)
        if cells.ndim != 1 or cells.size < 2:
            raise ValueError("trail needs a 1-D cell vector with >= 2 cells")
        if not np.all(np.isfinite(cells)) or np.any(cells < 0):
            raise ValueError("trail intensities must be finite and non-negative")
        if not self.axis_max > self.axis_min:
            raise ValueError("axis_max must exceed axis_min")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def empty(cls, cell_count: int = DEFAULT_CELL_COUNT,
              axis_min: float = 0.0, axis_max: float = 1.0) -> "Trail1D":
        return cls(np.zeros(cell_count), axis_min, axis_max)

    @property
    def cell_count(self) -> int:
        return self.cells.size

    @property
    def cell_width(self) -> float:
        return (self.axis_max - self.axis_min) / self.cell_count

    @property
    def cell_centers(self) -> np.ndarray:
        return self.axis_min + (np.arange(self.cell_count) + 0.5) * self.cell_width

    def same_axis(self, other: "Trail1D") -> bool:
        return (self.cell_count == other.cell_count
                and self.axis_min == other.axis_min
                and self.axis_max == other.axis_max)


@dataclass(frozen=True)
class ConeMark:
    """Truncated-cone deposit on a 2-D plane (projected meters)."""

    center: tuple[float, float]
    intensity: float
    base_radius: float = 150.0
    top_radius: float = 50.0

    def __post_init__(self) -> None:
        if not 0 < self.top_radius < self.base_radius:
            raise ValueError("need 0 < top_radius < base_radius")
        if self.intensity < 0:
            raise ValueError("mark intensity must be non-negative")


@dataclass(frozen=True)
class Trail2D:
    """Intensity trail over a rectangular grid of square cells.

    ``cells[row, col]`` covers x in [x0 + col*s, x0 + (col+1)*s) and the
    matching y band; row 0 is the southmost band.
    """

    cells: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)
    cell_size: float = DEFAULT_CELL_SIZE_M

    def __post_init__(self) -> None:
        cells = _readonly(self.cells)
        if cells.ndim != 2:
            raise ValueError("trail grid must be 2-D")
        if not np.all(np.isfinite(cells)) or np.any(cells < 0):
            raise ValueError("trail intensities must be finite and non-negative")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def for_box(cls, width_m: float, height_m: float,
                cell_size: float = DEFAULT_CELL_SIZE_M,
                origin: tuple[float, float] = (0.0, 0.0)) -> "Trail2D":
        """Empty trail whose grid covers a width x height box from ``origin``."""
        cols = int(np.ceil(width_m / cell_size))
        rows = int(np.ceil(height_m / cell_size))
        return cls(np.zeros((rows, cols)), origin, cell_size)

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    def contains(self, x: float, y: float) -> bool:
        x0, y0 = self.origin
        return (x0 <= x <= x0 + self.cols * self.cell_size
                and y0 <= y <= y0 + self.rows * self.cell_size)

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        x0, y0 = self.origin
        return (x0 + (col + 0.5) * self.cell_size, y0 + (row + 0.5) * self.cell_size)


def trapezoid_profile(centers: np.ndarray, cell_centers: np.ndarray,
                      width: float | np.ndarray,
                      plateau_fraction: float = DEFAULT_PLATEAU_FRACTION) -> np.ndarray:
    """Unit-height trapezoid profile sampled at ``cell_centers``.

    ``centers`` may carry leading batch dimensions; the cell axis is appended.
    """
    centers = np.asarray(centers, dtype=float)
    r = np.abs(cell_centers - centers[..., None])
    half = np.asarray(width, dtype=float)[..., None] / 2.0
    plat = plateau_fraction * half
    if plateau_fraction >= 1.0:
        return (r <= half).astype(float)
    return np.clip((half - r) / (half - plat), 0.0, 1.0)


def deposit_1d(t: Trail1D, m: TrapezoidMark) -> Trail1D:
    """Add a trapezoid mark to the trail. Centers outside the axis are rejected."""
    if not t.axis_min <= m.center <= t.axis_max:
        raise ValueError(
            f"mark center {m.center} outside axis [{t.axis_min}, {t.axis_max}]")
    profile = m.intensity * trapezoid_profile(
        np.asarray(m.center), t.cell_centers, m.width, m.plateau_fraction)
    return dataclasses.replace(t, cells=t.cells + profile)


def deposit_2d(t: Trail2D, m: ConeMark) -> Trail2D:
    """Add a truncated-cone mark to the grid. Centers outside the box are rejected."""
    cx, cy = m.center
    if not t.contains(cx, cy):
        raise ValueError(f"mark center {m.center} outside grid bounding box")
    x0, y0 = t.origin
    s = t.cell_size
    # Only cells within base_radius of the center can change.
    c_lo = max(0, int((cx - m.base_radius - x0) / s) - 1)
    c_hi = min(t.cols, int((cx + m.base_radius - x0) / s) + 2)
    r_lo = max(0, int((cy - m.base_radius - y0) / s) - 1)
    r_hi = min(t.rows, int((cy + m.base_radius - y0) / s) + 2)
    xs = x0 + (np.arange(c_lo, c_hi) + 0.5) * s
    ys = y0 + (np.arange(r_lo, r_hi) + 0.5) * s
    rr = np.hypot(xs[None, :] - cx, ys[:, None] - cy)
    slope = (m.base_radius - rr) / (m.base_radius - m.top_radius)
    profile = m.intensity * np.clip(np.where(rr <= m.top_radius, 1.0, slope), 0.0, 1.0)
    cells = t.cells.copy()
    cells[r_lo:r_hi, c_lo:c_hi] += profile
    return dataclasses.replace(t, cells=cells)


def evaporate(t, delta: float):
    """Subtract ``delta`` from every cell, clamped at zero. Works on 1-D and 2-D trails."""
    if delta < 0:
        raise ValueError(f"evaporation delta must be non-negative, got {delta}")
    return dataclasses.replace(t, cells=np.maximum(t.cells - delta, 0.0))


def jaccard(t1: Trail1D, t2: Trail1D) -> float:
    """Similarity of two trails: sum of minima over sum of maxima, in [0, 1].

    Two all-zero trails compare as 1 (identical emptiness).
    """
    if not t1.same_axis(t2):
        raise ValueError("trails must share axis bounds and cell count")
    union = np.maximum(t1.cells, t2.cells).sum()
    if union == 0.0:
        return 1.0
    return float(np.minimum(t1.cells, t2.cells).sum() / union)


def to_ascii_grid(t: Trail2D, nodata: float = -9999.0) -> str:
    """Render a 2-D trail as an ESRI-ASCII-grid-style text block."""
    x0, y0 = t.origin
    lines = [
        f"ncols {t.cols}",
        f"nrows {t.rows}",
        f"xllcorner {x0:.6f}",
        f"yllcorner {y0:.6f}",
        f"cellsize {t.cell_size:.6f}",
        f"NODATA_value {nodata:.1f}",
    ]
    for row in range(t.rows - 1, -1, -1):  # northmost row first
        lines.append(" ".join(f"{v:.6g}" for v in t.cells[row]))
    return "\n".join(lines) + "\n"
