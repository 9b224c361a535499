import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikenav.raster import (GRID, LidarDetection, SpikeFrame,
                             cell_center, cell_size_m, point_to_cell,
                             polar_to_cartesian, rasterize_scan, wrap_angle)


def test_polar_axis_aligned():
    p = polar_to_cartesian(LidarDetection(1.0, 0.0))
    assert (p.x_m, p.y_m) == (1.0, 0.0)
    p = polar_to_cartesian(LidarDetection(2.0, math.pi / 2))
    assert abs(p.x_m) < 1e-15 and p.y_m == pytest.approx(2.0, abs=1e-15)


def test_polar_diagonal():
    p = polar_to_cartesian(LidarDetection(1.5, math.pi / 4))
    assert p.x_m == pytest.approx(1.06066, abs=1e-5)
    assert p.y_m == pytest.approx(1.06066, abs=1e-5)
    assert p.x_m == pytest.approx(1.5 * math.cos(math.pi / 4), abs=1e-9)


def test_detection_validation():
    with pytest.raises(ValueError):
        LidarDetection(-1.0, 0.0)
    with pytest.raises(ValueError):
        LidarDetection(float("nan"), 0.0)
    d = LidarDetection(1.0, -math.pi / 2)  # wrapped into [0, 2*pi)
    assert 0.0 <= d.angle_rad < 2 * math.pi


def test_origin_maps_to_center_cell():
    frame = rasterize_scan([LidarDetection(0.0, 0.0)])
    assert frame.grid[29, 29] == 1
    assert frame.popcount() == 1


def test_empty_scan_is_all_zero():
    frame = rasterize_scan([])
    assert frame.grid.shape == (GRID, GRID)
    assert frame.popcount() == 0


def test_out_of_extent_detection_dropped():
    # x = 5.1 with R = 5 falls outside and must not be clamped to the border
    frame = rasterize_scan([LidarDetection(5.1, 0.0)])
    assert frame.popcount() == 0
    # |x| == R exactly is dropped too (open boundary)
    assert point_to_cell(5.0, 0.0) is None
    assert point_to_cell(-5.0, 0.0) is None


def test_spikeframe_validation():
    with pytest.raises(ValueError):
        SpikeFrame(grid=np.zeros((5, 5), dtype=np.uint8))
    with pytest.raises(ValueError):
        SpikeFrame(grid=np.full((GRID, GRID), 2, dtype=np.uint8))


@st.composite
def detections(draw):
    r = draw(st.floats(0.0, 8.0, allow_nan=False))
    a = draw(st.floats(0.0, 2 * math.pi, exclude_max=True, allow_nan=False))
    return LidarDetection(r, a)


@given(st.lists(detections(), max_size=50))
@settings(max_examples=100, deadline=None)
def test_popcount_bounded_and_binary(ds):
    frame = rasterize_scan(ds)
    assert set(np.unique(frame.grid)) <= {0, 1}
    assert frame.popcount() <= len(ds)


@given(st.lists(detections(), min_size=1, max_size=50))
@settings(max_examples=100, deadline=None)
def test_rasterize_idempotent_on_cell_centers(ds):
    frame = rasterize_scan(ds)
    redo = []
    for row, col in zip(*np.nonzero(frame.grid)):
        x, y = cell_center(int(row), int(col))
        r = math.hypot(x, y)
        theta = wrap_angle(math.atan2(y, x))
        redo.append(LidarDetection(r, theta))
    frame2 = rasterize_scan(redo)
    assert np.array_equal(frame.grid, frame2.grid)


@given(st.lists(detections(), min_size=1, max_size=30))
@settings(max_examples=100, deadline=None)
def test_every_set_cell_backed_by_a_detection(ds):
    frame = rasterize_scan(ds)
    rho = cell_size_m()
    points = [polar_to_cartesian(d) for d in ds]
    for row, col in zip(*np.nonzero(frame.grid)):
        lo_x, hi_x = col * rho - 5.0, (col + 1) * rho - 5.0
        lo_y, hi_y = row * rho - 5.0, (row + 1) * rho - 5.0
        assert any(lo_x <= p.x_m < hi_x and lo_y <= p.y_m < hi_y for p in points)


def test_custom_half_extent():
    # R = 1: a point at 0.5 m lands in the upper half of the grid
    frame = rasterize_scan([LidarDetection(0.5, 0.0)], half_extent_m=1.0)
    assert frame.popcount() == 1
    row, col = [int(v[0]) for v in np.nonzero(frame.grid)]
    assert col == int(math.floor((0.5 + 1.0) / (2.0 / GRID)))
    with pytest.raises(ValueError):
        rasterize_scan([], half_extent_m=0.0)
