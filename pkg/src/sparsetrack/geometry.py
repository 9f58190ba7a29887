"""Box representations, IoU similarity and pseudo-depth."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np


class BBox(NamedTuple):
    """Axis-aligned box in pixels, image origin top-left, y grows downward."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return max(self.x2 - self.x1, 0.0) * max(self.y2 - self.y1, 0.0)

    @classmethod
    def from_tlwh(cls, left: float, top: float, w: float, h: float) -> "BBox":
        return cls(left, top, left + w, top + h)

    def to_tlwh(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2 - self.x1, self.y2 - self.y1)

    @classmethod
    def from_xyah(cls, cx: float, cy: float, a: float, h: float) -> "BBox":
        w = a * h
        return cls(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)

    def to_xyah(self) -> tuple[float, float, float, float]:
        h = self.y2 - self.y1
        w = self.x2 - self.x1
        return ((self.x1 + self.x2) / 2, (self.y1 + self.y2) / 2, w / h, h)

    def shifted(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


def xyah_to_tlbr(xyah: np.ndarray) -> np.ndarray:
    """Vectorized (cx, cy, a, h) -> (x1, y1, x2, y2) over the last axis."""
    xyah = np.asarray(xyah, dtype=float)
    w = xyah[..., 2] * xyah[..., 3]
    h = xyah[..., 3]
    out = np.empty(xyah.shape[:-1] + (4,))
    out[..., 0] = xyah[..., 0] - w / 2
    out[..., 1] = xyah[..., 1] - h / 2
    out[..., 2] = xyah[..., 0] + w / 2
    out[..., 3] = xyah[..., 1] + h / 2
    return out


def tlbr_to_xyah(tlbr: np.ndarray) -> np.ndarray:
    tlbr = np.asarray(tlbr, dtype=float)
    w = tlbr[..., 2] - tlbr[..., 0]
    h = tlbr[..., 3] - tlbr[..., 1]
    out = np.empty(tlbr.shape[:-1] + (4,))
    out[..., 0] = tlbr[..., 0] + w / 2
    out[..., 1] = tlbr[..., 1] + h / 2
    out[..., 2] = w / h
    out[..., 3] = h
    return out


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; zero-area boxes score 0 against everything."""
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    if union <= 0:
        return 0.0
    return float(inter / union)


def _as_tlbr_array(boxes: Sequence[BBox] | np.ndarray) -> np.ndarray:
    arr = np.asarray(boxes, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 4))
    return arr.reshape(-1, 4)


def iou_matrix(rows: Sequence[BBox] | np.ndarray, cols: Sequence[BBox] | np.ndarray) -> np.ndarray:
    a = _as_tlbr_array(rows)
    b = _as_tlbr_array(cols)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    iw = np.clip(iw, 0.0, None)
    ih = np.clip(ih, 0.0, None)
    inter = iw * ih
    area_a = np.clip(a[:, 2] - a[:, 0], 0.0, None) * np.clip(a[:, 3] - a[:, 1], 0.0, None)
    area_b = np.clip(b[:, 2] - b[:, 0], 0.0, None) * np.clip(b[:, 3] - b[:, 1], 0.0, None)
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=(union > 0) & (inter > 0))
    return out


def iou_distance_matrix(rows: Sequence[BBox] | np.ndarray, cols: Sequence[BBox] | np.ndarray) -> np.ndarray:
    """Cost matrix of ``1 - IoU``, shape ``(len(rows), len(cols))``."""
    return 1.0 - iou_matrix(rows, cols)


def pseudo_depth(b: BBox, image_height: float) -> float:
    """Distance from the box bottom to the image bottom edge; smaller is nearer.

    Not clamped: boxes extending past the bottom edge go negative.
    """
    if image_height <= 0:
        raise ValueError(f"image_height must be positive, got {image_height}")
    return image_height - b[3]
