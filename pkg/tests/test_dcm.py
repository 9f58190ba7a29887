import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsetrack.assignment import solve_lap
from sparsetrack.dcm import dcm, depth_range, partition, partition_by_range, split_levels
from sparsetrack.geometry import iou_distance_matrix

H = 100.0
# two tracks and two detections, track/detection 0 nearer than 1; flat matching crosses levels
CROSS_TRACKS = np.array([[2, 52, 12, 92], [0, 47, 10, 87]], float)
CROSS_DETS = np.array([[1, 56, 11, 96], [1, 53, 11, 93]], float)
# near track 0 and far track 1 both fit far detection 1; level order decides who gets it
CONTEST_TRACKS = np.array([[3, 45, 13, 85], [10, 42, 20, 82]], float)
CONTEST_DETS = np.array([[11, 45, 21, 85], [7, 43, 17, 83]], float)


def depths(b):
    return (H - b[:, 3]).tolist()


def test_depth_range_examples():
    assert depth_range([100]) == (100, 100)
    assert depth_range([10, 55, 119]) == (10, 119)
    assert depth_range([-5, 0, 7]) == (-5, 7)
    assert depth_range([]) is None


def test_split_levels_examples():
    assert [(iv.lo, iv.hi, iv.closed) for iv in split_levels(0, 120, 3)] == [(0, 40, False), (40, 80, False), (80, 120, True)]
    assert [(iv.lo, iv.hi) for iv in split_levels(5, 5, 4)] == [(5, 5)] * 4
    assert [(iv.lo, iv.hi, iv.closed) for iv in split_levels(0, 100, 1)] == [(0, 100, True)]
    with pytest.raises(ValueError):
        split_levels(0, 1, 0)


def test_partition_examples():
    assert partition_by_range([10, 55, 119], 2).subsets == [[0, 1], [2]]
    assert partition_by_range([10, 55, 119], 1).subsets == [[0, 1, 2]]
    assert partition_by_range([7, 7, 7], 3).subsets == [[0, 1, 2], [], []]
    # 40 sits on the boundary between [0, 40) and [40, 80)
    assert partition([0, 40, 120], split_levels(0, 120, 3)).subsets == [[0], [1], [2]]


def reference_level(d, intervals):
    """Scan oracle: highest-index interval that contains d."""
    hits = [iv.index for iv in intervals if iv.contains(d)]
    return hits[-1] if hits else 0


depth_lists = st.lists(st.floats(-2000, 2000, allow_nan=False).map(lambda v: round(v, 1)), min_size=1, max_size=20)


@given(depth_lists, st.integers(1, 10))
def test_partition_total_disjoint_and_correct(ds, k):
    part = partition_by_range(ds, k)
    flat = sorted(i for s in part.subsets for i in s)
    assert flat == list(range(len(ds)))
    degenerate = min(ds) == max(ds)
    for lv, members in enumerate(part.subsets):
        for i in members:
            if degenerate:
                assert lv == 0
            else:
                assert part.intervals[lv].contains(ds[i])
                assert lv == reference_level(ds[i], part.intervals)
    iv = part.intervals
    assert all(a.hi == b.lo for a, b in zip(iv, iv[1:]))
    assert iv[-1].closed and not any(x.closed for x in iv[:-1])


def test_k1_is_plain_matching():
    c = iou_distance_matrix(CROSS_TRACKS, CROSS_DETS)
    res = dcm(CROSS_TRACKS, depths(CROSS_TRACKS), CROSS_DETS, depths(CROSS_DETS), 1, 0.5)
    assert sorted(res.matched) == solve_lap(c, 0.5).matches


def test_no_detections():
    res = dcm(CROSS_TRACKS, depths(CROSS_TRACKS), np.zeros((0, 4)), [], 3, 0.5)
    assert res.matched == [] and res.unmatched_tracks == [0, 1] and res.unmatched_detections == []


def test_crossing_resolved_within_levels():
    flat = dcm(CROSS_TRACKS, depths(CROSS_TRACKS), CROSS_DETS, depths(CROSS_DETS), 1, 0.5)
    cascade = dcm(CROSS_TRACKS, depths(CROSS_TRACKS), CROSS_DETS, depths(CROSS_DETS), 2, 0.5)
    assert sorted(flat.matched) == [(0, 1), (1, 0)]
    assert sorted(cascade.matched) == [(0, 0), (1, 1)]


def test_level_order_matters():
    t, d = CONTEST_TRACKS, CONTEST_DETS
    near_first = dcm(t, depths(t), d, depths(d), 2, 0.5)
    far_first = dcm(t, [-v for v in depths(t)], d, [-v for v in depths(d)], 2, 0.5)
    assert near_first.matched == [(1, 0)]
    assert far_first.matched == [(1, 1)]


def test_shared_range_flag_changes_levels():
    # detections alone span one narrow range, so independent binning splits them
    t = np.array([[0, 0, 10, 90], [0, 0, 10, 10]], float)
    d = np.array([[0, 0, 10, 50], [0, 0, 10, 49]], float)
    own = dcm(t, depths(t), d, depths(d), 2, 1.0)
    shared = dcm(t, depths(t), d, depths(d), 2, 1.0, shared_depth_range=True)
    assert own.matched != shared.matched


@st.composite
def scenes(draw):
    n = draw(st.integers(0, 7))
    m = draw(st.integers(0, 7))

    def box():
        x = draw(st.integers(0, 60))
        y2 = draw(st.integers(20, 100))
        h = draw(st.integers(10, 40))
        return [x, y2 - h, x + draw(st.integers(5, 20)), y2]

    tb = np.array([box() for _ in range(n)], float).reshape(-1, 4)
    db = np.array([box() for _ in range(m)], float).reshape(-1, 4)
    return tb, db, draw(st.integers(1, 9)), draw(st.sampled_from([0.3, 0.5, 0.8, 1.0]))


@given(scenes(), st.booleans())
def test_dcm_conservation_and_gate(scene, shared):
    tb, db, k, tau = scene
    res = dcm(tb, depths(tb), db, depths(db), k, tau, shared_depth_range=shared)
    mt = [t for t, _ in res.matched]
    md = [d for _, d in res.matched]
    assert sorted(mt + res.unmatched_tracks) == list(range(len(tb)))
    assert sorted(md + res.unmatched_detections) == list(range(len(db)))
    c = iou_distance_matrix(tb, db)
    assert all(c[t, d] <= tau for t, d in res.matched)


@given(scenes())
def test_k1_reduction_exact(scene):
    tb, db, _, tau = scene
    res = dcm(tb, depths(tb), db, depths(db), 1, tau)
    ref = solve_lap(iou_distance_matrix(tb, db), tau)
    assert res.matched == ref.matches
    assert res.unmatched_tracks == ref.unmatched_rows and res.unmatched_detections == ref.unmatched_cols


@given(st.integers(1, 6), st.integers(1, 5), st.randoms(use_true_random=False))
def test_no_stranded_pairs(n, k, rnd):
    # each track has an exact twin detection, so every level has a perfect matching
    tb = np.array([[i * 50, 0, i * 50 + 20, 20 + rnd.randint(0, 80)] for i in range(n)], float)
    order = list(range(n))
    rnd.shuffle(order)
    db = tb[order]
    res = dcm(tb, depths(tb), db, depths(db), k, 0.5)
    assert len(res.matched) == n
    assert all(order[d] == t for t, d in res.matched)
