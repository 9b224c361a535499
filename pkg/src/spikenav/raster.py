"""Polar LIDAR detections -> binary 59x59 spike frames.

The grid covers a square window of +/- ``half_extent_m`` meters around the
sensor, robot at the center cell. Cells are set to 1 where at least one
detection falls; everything else stays 0, so a frame doubles as one
timestep of spiking input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GRID = 59
DEFAULT_HALF_EXTENT_M = 5.0

TWO_PI = 2.0 * math.pi


def wrap_angle(angle_rad: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    a = math.fmod(angle_rad, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:  # fmod can land exactly on 2*pi after the add
        a = 0.0
    return a


@dataclass(frozen=True)
class LidarDetection:
    """One polar LIDAR return: range in meters, angle in radians [0, 2*pi)."""

    range_m: float
    angle_rad: float

    def __post_init__(self):
        if not math.isfinite(self.range_m) or self.range_m < 0.0:
            raise ValueError(f"range_m must be finite and >= 0, got {self.range_m}")
        if not math.isfinite(self.angle_rad):
            raise ValueError("angle_rad must be finite")
        if not (0.0 <= self.angle_rad < TWO_PI):
            object.__setattr__(self, "angle_rad", wrap_angle(self.angle_rad))


@dataclass(frozen=True)
class CartesianPoint:
    x_m: float
    y_m: float


@dataclass(frozen=True)
class SpikeFrame:
    """Binary 59x59 occupancy grid for one scan, plus its time index."""

    grid: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.uint8)
        if g.shape != (GRID, GRID):
            raise ValueError(f"grid must be {GRID}x{GRID}, got {g.shape}")
        if not np.isin(g, (0, 1)).all():
            raise ValueError("grid cells must be 0 or 1")
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        object.__setattr__(self, "grid", g)

    def popcount(self) -> int:
        return int(self.grid.sum())


def polar_to_cartesian(d: LidarDetection) -> CartesianPoint:
    """(r, theta) -> (r*cos(theta), r*sin(theta))."""
    return CartesianPoint(d.range_m * math.cos(d.angle_rad),
                          d.range_m * math.sin(d.angle_rad))


def cell_size_m(half_extent_m: float = DEFAULT_HALF_EXTENT_M) -> float:
    return 2.0 * half_extent_m / GRID


def point_to_cell(x_m: float, y_m: float,
                  half_extent_m: float = DEFAULT_HALF_EXTENT_M) -> tuple[int, int] | None:
    """Map a Cartesian point to (row, col), or None if it falls outside.

    col = floor((x + R) / rho), row = floor((y + R) / rho) with rho = 2R/59.
    Points with |x| >= R or |y| >= R are dropped rather than clamped so the
    border cells never show phantom obstacles.
    """
    r = half_extent_m
    if abs(x_m) >= r or abs(y_m) >= r:
        return None
    rho = cell_size_m(r)
    col = int(math.floor((x_m + r) / rho))
    row = int(math.floor((y_m + r) / rho))
    # |x| < R guarantees 0 <= col <= 58 up to fp rounding at the open edge
    return min(row, GRID - 1), min(col, GRID - 1)


def cell_center(row: int, col: int,
                half_extent_m: float = DEFAULT_HALF_EXTENT_M) -> tuple[float, float]:
    """Cartesian center of a grid cell (inverse of point_to_cell up to binning)."""
    rho = cell_size_m(half_extent_m)
    return ((col + 0.5) * rho - half_extent_m,
            (row + 0.5) * rho - half_extent_m)


def rasterize_scan(detections: list[LidarDetection],
                   half_extent_m: float = DEFAULT_HALF_EXTENT_M,
                   frame_index: int = 0) -> SpikeFrame:
    """Bin one scan's detections into a binary 59x59 spike frame."""
    if half_extent_m <= 0.0:
        raise ValueError("half_extent_m must be > 0")
    grid = np.zeros((GRID, GRID), dtype=np.uint8)
    for d in detections:
        p = polar_to_cartesian(d)
        cell = point_to_cell(p.x_m, p.y_m, half_extent_m)
        if cell is not None:
            grid[cell] = 1
    return SpikeFrame(grid=grid, frame_index=frame_index)
