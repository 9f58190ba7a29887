"""Two-stage score-split association with depth cascade matching.

``SparseTracker`` runs depth cascade matching in both the high-score and the
low-score stage. ``ByteTracker`` is the same lifecycle with a single
full-matrix assignment per stage; it is kept as the reference the sparse
pipeline must reduce to when both stages use one depth level.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from sparsetrack.assignment import solve_lap
from sparsetrack.dcm import DcmResult, dcm
from sparsetrack.geometry import BBox, iou_distance_matrix, xyah_to_tlbr
from sparsetrack.motion import (
    DEFAULT_NOISE,
    NoiseModel,
    is_identity_warp,
    kf_initiate,
    predict_many,
    update_many,
    warp_many,
)


class TrackState(enum.Enum):
    TENTATIVE = "tentative"
    TRACKED = "tracked"
    LOST = "lost"
    REMOVED = "removed"


_LEGAL = {
    TrackState.TENTATIVE: {TrackState.TRACKED, TrackState.REMOVED},
    TrackState.TRACKED: {TrackState.LOST},
    TrackState.LOST: {TrackState.TRACKED, TrackState.REMOVED},
    TrackState.REMOVED: set(),
}


@dataclass
class TrackerConfig:
    tau_high: float = 0.6
    tau_low: float = 0.1
    k_high: int = 1
    k_low: int = 8
    match_thresh_high: float = 0.8
    match_thresh_low: float = 0.5
    match_thresh_unconfirmed: float = 0.7
    new_track_thresh: float = 0.7
    max_lost: int = 30
    image_height: float | None = None
    use_warp: bool = True
    shared_depth_range: bool = False
    std_weight_position: float = 1.0 / 20
    std_weight_velocity: float = 1.0 / 160

    def __post_init__(self):
        if not 0 <= self.tau_low < self.tau_high <= 1:
            raise ValueError(f"need 0 <= tau_low < tau_high <= 1, got {self.tau_low}, {self.tau_high}")
        if self.k_high < 1 or self.k_low < 1:
            raise ValueError(f"depth levels must be >= 1, got k_high={self.k_high}, k_low={self.k_low}")
        if self.max_lost < 0:
            raise ValueError(f"max_lost must be >= 0, got {self.max_lost}")
        for name in ("match_thresh_high", "match_thresh_low", "match_thresh_unconfirmed"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.image_height is not None and self.image_height <= 0:
            raise ValueError(f"image_height must be positive, got {self.image_height}")

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(self.std_weight_position, self.std_weight_velocity)

    def replace(self, **changes) -> "TrackerConfig":
        d = asdict(self)
        d.update(changes)
        return TrackerConfig(**d)

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}


@dataclass(frozen=True)
class Detection:
    bbox: BBox
    score: float
    pseudo_depth: float

    @classmethod
    def from_bbox(cls, bbox, score: float, image_height: float) -> "Detection":
        bbox = BBox(*map(float, bbox))
        return cls(bbox, float(score), image_height - bbox.y2)


@dataclass
class Track:
    id: int
    state: TrackState
    mean: np.ndarray
    covariance: np.ndarray
    score: float
    start_frame: int
    last_frame: int
    frames_since_update: int = 0

    @property
    def tlbr(self) -> np.ndarray:
        return xyah_to_tlbr(self.mean[:4])

    @property
    def tlwh(self) -> tuple[float, float, float, float]:
        x1, y1, x2, y2 = self.tlbr.tolist()
        return (x1, y1, x2 - x1, y2 - y1)


@dataclass
class FrameResult:
    frame: int
    outputs: list[tuple[int, tuple[float, float, float, float], float]] = field(default_factory=list)


def split_by_score(dets: Iterable[Detection], cfg: TrackerConfig) -> tuple[list[Detection], list[Detection]]:
    high, low = [], []
    for d in dets:
        if d.score > cfg.tau_high:
            high.append(d)
        elif d.score >= cfg.tau_low:
            low.append(d)
    return high, low


def _det_arrays(dets: Sequence[Detection]) -> tuple[np.ndarray, np.ndarray]:
    if not dets:
        return np.zeros((0, 4)), np.zeros(0)
    return np.array([d.bbox for d in dets], dtype=float), np.array([d.pseudo_depth for d in dets], dtype=float)


class _TrackerBase:
    def __init__(self, cfg: TrackerConfig | None = None):
        self.cfg = cfg or TrackerConfig()
        if self.cfg.image_height is None:
            raise ValueError("TrackerConfig.image_height must be set before tracking")
        self.noise = self.cfg.noise
        self.tracks: list[Track] = []
        self.removed: list[Track] = []
        self.frame: int | None = None
        self._next_id = 1

    def _associate(self, t_boxes, t_depths, d_boxes, d_depths, k: int, tau: float) -> DcmResult:
        raise NotImplementedError

    @staticmethod
    def _transition(track: Track, new: TrackState) -> None:
        if new is not track.state and new not in _LEGAL[track.state]:
            raise AssertionError(f"illegal transition {track.state} -> {new} for track {track.id}")
        track.state = new

    def step(self, frame: int, dets: Sequence[Detection], warp=None) -> FrameResult:
        if self.frame is not None and frame <= self.frame:
            raise ValueError(f"frame {frame} is not after previous frame {self.frame}")
        self.frame = frame
        cfg = self.cfg
        live = self.tracks

        # predict (+ camera motion) and current pseudo-depths
        if live:
            means = np.stack([t.mean for t in live])
            covs = np.stack([t.covariance for t in live])
            means, covs = predict_many(means, covs, self.noise)
            if cfg.use_warp and not is_identity_warp(warp):
                means, covs = warp_many(means, covs, warp)
            for t, m, c in zip(live, means, covs):
                t.mean, t.covariance = m, c
            boxes = xyah_to_tlbr(means[:, :4])
        else:
            boxes = np.zeros((0, 4))
        depths = cfg.image_height - boxes[:, 3]

        high, low = split_by_score(dets, cfg)
        hb, hd = _det_arrays(high)
        lb, ld = _det_arrays(low)
        updates: list[tuple[int, Detection]] = []

        # high-score stage over confirmed and lost tracks
        pool = [i for i, t in enumerate(live) if t.state in (TrackState.TRACKED, TrackState.LOST)]
        first = self._associate(boxes[pool], depths[pool], hb, hd, cfg.k_high, cfg.match_thresh_high)
        updates.extend((pool[ti], high[di]) for ti, di in first.matched)

        # low-score stage: only unmatched tracks that are not lost
        remain = [pool[ti] for ti in first.unmatched_tracks if live[pool[ti]].state is TrackState.TRACKED]
        second = self._associate(boxes[remain], depths[remain], lb, ld, cfg.k_low, cfg.match_thresh_low)
        updates.extend((remain[ti], low[di]) for ti, di in second.matched)
        for ti in second.unmatched_tracks:
            self._transition(live[remain[ti]], TrackState.LOST)

        # leftover high-score detections vs tracks born last frame
        unconf = [i for i, t in enumerate(live) if t.state is TrackState.TENTATIVE]
        left = first.unmatched_detections
        third = solve_lap(iou_distance_matrix(boxes[unconf], hb[left]), cfg.match_thresh_unconfirmed)
        updates.extend((unconf[r], high[left[c]]) for r, c in third.matches)
        for r in third.unmatched_rows:
            self._transition(live[unconf[r]], TrackState.REMOVED)

        # correct matched tracks
        if updates:
            idx = [i for i, _ in updates]
            zs = np.array([d.bbox.to_xyah() for _, d in updates], dtype=float)
            means = np.stack([live[i].mean for i in idx])
            covs = np.stack([live[i].covariance for i in idx])
            means, covs = update_many(means, covs, zs, self.noise)
            for (i, d), m, c in zip(updates, means, covs):
                t = live[i]
                t.mean, t.covariance = m, c
                t.score = d.score
                t.last_frame = frame
                self._transition(t, TrackState.TRACKED)
        updated = {i for i, _ in updates}

        for t in live:
            t.frames_since_update = frame - t.last_frame
            if t.state is TrackState.LOST and t.frames_since_update > cfg.max_lost:
                self._transition(t, TrackState.REMOVED)

        # births from leftover high-score detections
        born = []
        for c in third.unmatched_cols:
            d = high[left[c]]
            if d.score > cfg.new_track_thresh and d.bbox.height > 0:
                s = kf_initiate(d.bbox.to_xyah(), self.noise)
                born.append(Track(self._next_id, TrackState.TENTATIVE, s.mean, s.covariance, d.score, frame, frame))
                self._next_id += 1

        outputs = []
        for i, t in enumerate(live):
            if i in updated and t.state is TrackState.TRACKED:
                outputs.append((t.id, t.tlwh, t.score))
        outputs.sort(key=lambda o: o[0])

        self.removed.extend(t for t in live if t.state is TrackState.REMOVED)
        self.tracks = [t for t in live if t.state is not TrackState.REMOVED] + born
        return FrameResult(frame, outputs)


class SparseTracker(_TrackerBase):
    def _associate(self, t_boxes, t_depths, d_boxes, d_depths, k, tau):
        return dcm(t_boxes, t_depths, d_boxes, d_depths, k, tau, shared_depth_range=self.cfg.shared_depth_range)


class ByteTracker(_TrackerBase):
    def _associate(self, t_boxes, t_depths, d_boxes, d_depths, k, tau):
        res = solve_lap(iou_distance_matrix(t_boxes, d_boxes), tau)
        return DcmResult(res.matches, res.unmatched_rows, res.unmatched_cols)


def _frames(dets_per_frame, n_frames: int | None):
    if isinstance(dets_per_frame, Mapping):
        last = max(dets_per_frame, default=0)
        n = max(last, n_frames or 0)
        return [(f, dets_per_frame.get(f, [])) for f in range(1, n + 1)]
    seq = list(dets_per_frame)
    n = max(len(seq), n_frames or 0)
    return [(f, seq[f - 1] if f <= len(seq) else []) for f in range(1, n + 1)]


def run_sequence(
    dets_per_frame,
    warps: Mapping[int, np.ndarray] | None = None,
    cfg: TrackerConfig | None = None,
    baseline: bool = False,
    n_frames: int | None = None,
) -> list[FrameResult]:
    """Fold a fresh tracker over frames 1..n.

    ``dets_per_frame`` is either a list (entry ``i`` is frame ``i + 1``) or a
    mapping frame -> detections; missing frames are empty.
    """
    tracker = (ByteTracker if baseline else SparseTracker)(cfg)
    warps = warps or {}
    return [tracker.step(f, dets, warps.get(f)) for f, dets in _frames(dets_per_frame, n_frames)]
