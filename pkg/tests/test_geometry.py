import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import boxes
from sparsetrack.geometry import (
    BBox,
    iou,
    iou_distance_matrix,
    iou_matrix,
    pseudo_depth,
    tlbr_to_xyah,
    xyah_to_tlbr,
)


def test_iou_examples():
    a = BBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BBox(20, 20, 30, 30)) == 0.0
    assert iou(a, BBox(5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-15)


def test_zero_area_box_has_zero_iou():
    z = BBox(5, 5, 5, 5)
    assert iou(z, z) == 0.0
    assert iou(z, BBox(0, 0, 10, 10)) == 0.0


def test_distance_matrix_examples():
    assert iou_distance_matrix([], [BBox(0, 0, 1, 1)] * 3).shape == (0, 3)
    assert iou_distance_matrix([BBox(0, 0, 10, 10)], [BBox(0, 0, 10, 10)]).tolist() == [[0.0]]
    d = iou_distance_matrix([BBox(0, 0, 10, 10)], [BBox(5, 0, 15, 10)])
    assert d[0, 0] == pytest.approx(2 / 3, abs=1e-15)


def test_disjoint_boxes_give_all_ones():
    rows = [BBox(i * 100, 0, i * 100 + 10, 10) for i in range(3)]
    cols = [BBox(i * 100 + 50, 0, i * 100 + 60, 10) for i in range(4)]
    assert np.all(iou_distance_matrix(rows, cols) == 1.0)


@pytest.mark.parametrize("y2,expected", [(980, 100), (1080, 0), (1100, -20)])
def test_pseudo_depth_examples(y2, expected):
    assert pseudo_depth(BBox(0, y2 - 50, 10, y2), 1080) == expected


def test_pseudo_depth_rejects_bad_height():
    with pytest.raises(ValueError):
        pseudo_depth(BBox(0, 0, 1, 1), 0)


@given(boxes(), boxes())
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0


@given(boxes(min_size=1), boxes(min_size=1), st.integers(-300, 300), st.integers(-300, 300))
def test_iou_translation_invariant(a, b, dx, dy):
    assert iou(a.shifted(dx, dy), b.shifted(dx, dy)) == pytest.approx(iou(a, b), abs=1e-9)


@given(st.lists(boxes(), max_size=6), st.lists(boxes(), max_size=6))
def test_matrix_agrees_with_scalar(rows, cols):
    m = iou_matrix(rows, cols)
    assert m.shape == (len(rows), len(cols))
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            assert m[i, j] == pytest.approx(iou(a, b), abs=1e-12)
    d = iou_distance_matrix(rows, cols)
    assert np.all((d >= 0) & (d <= 1))


@given(boxes(min_size=1e-3))
def test_xyah_round_trip(b):
    back = BBox.from_xyah(*b.to_xyah())
    assert all(math.isclose(u, v, abs_tol=1e-9 * max(1.0, abs(v))) for u, v in zip(back, b))
    arr = np.array([tuple(b)])
    assert np.allclose(xyah_to_tlbr(tlbr_to_xyah(arr)), arr, atol=1e-9 * max(1.0, np.abs(arr).max()))


@given(boxes(), st.floats(1, 50), st.floats(100, 3000))
def test_pseudo_depth_strictly_decreasing_in_y2(b, dy, H):
    lower = BBox(b.x1, b.y1, b.x2, b.y2 + dy)
    assert pseudo_depth(lower, H) < pseudo_depth(b, H)
    assert pseudo_depth(b, H) == H - b.y2


def test_tlwh_round_trip():
    b = BBox.from_tlwh(100, 200, 50, 80)
    assert b == BBox(100, 200, 150, 280)
    assert b.to_tlwh() == (100, 200, 50, 80)
