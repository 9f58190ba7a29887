"""Depth-cascade multi-object tracking on pseudo-depth scene decomposition."""

from sparsetrack.geometry import BBox, iou, iou_distance_matrix, pseudo_depth
from sparsetrack.assignment import AssignmentResult, solve_lap, brute_force_lap
from sparsetrack.dcm import DcmResult, DepthInterval, DepthPartition, dcm, depth_range, partition, split_levels
from sparsetrack.tracker import (
    ByteTracker,
    Detection,
    FrameResult,
    SparseTracker,
    Track,
    TrackerConfig,
    TrackState,
    run_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "iou",
    "iou_distance_matrix",
    "pseudo_depth",
    "AssignmentResult",
    "solve_lap",
    "brute_force_lap",
    "DcmResult",
    "DepthInterval",
    "DepthPartition",
    "dcm",
    "depth_range",
    "partition",
    "split_levels",
    "ByteTracker",
    "Detection",
    "FrameResult",
    "SparseTracker",
    "Track",
    "TrackerConfig",
    "TrackState",
    "run_sequence",
]
