"""Synthetic crowded scenes seen by a raised, tilted pinhole camera.

Agents walk on a flat ground plane with piecewise-constant velocity and wrap
around the walkable region. Occlusion is computed in image space: an agent's
visibility is the part of its box not covered by agents strictly nearer to the
camera. Detection scores fall with occlusion and heavily occluded agents are
sometimes missed, which is the regime a score-split tracker sees on crowded
benchmarks.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from sparsetrack.geometry import BBox
from sparsetrack.mot_io import GtBox
from sparsetrack.tracker import Detection


@dataclass(frozen=True)
class SimulatorConfig:
    n_agents: int = 10
    n_frames: int = 200
    image_width: float = 1920.0
    image_height: float = 1080.0
    focal_length: float = 1200.0
    camera_height: float = 6.0
    camera_tilt: float = 15.0  # degrees below horizontal
    ground_near: float = 8.0  # meters along the optical axis' ground projection
    ground_far: float = 30.0
    ground_half_width: float | None = None  # None: derived from the near field of view
    fps: float = 25.0
    speed_min: float = 0.6
    speed_max: float = 1.6
    heading_change_period: float = 40.0  # mean frames between heading changes
    agent_height: float = 1.7
    agent_width: float = 0.5
    base_score: float = 0.92
    occlusion_score_slope: float = 0.8
    score_noise_std: float = 0.04
    miss_visibility_threshold: float = 0.15
    miss_probability: float = 0.5
    bbox_jitter_std: float = 1.5
    seed: int = 0

    def __post_init__(self):
        for name in ("n_agents", "n_frames"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("base_score", "miss_visibility_threshold", "miss_probability"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError(f"need 0 < speed_min <= speed_max, got {self.speed_min}, {self.speed_max}")
        if not 0 < self.ground_near < self.ground_far:
            raise ValueError(f"need 0 < ground_near < ground_far, got {self.ground_near}, {self.ground_far}")
        if self.image_width <= 0 or self.image_height <= 0 or self.focal_length <= 0:
            raise ValueError("image size and focal length must be positive")
        if self.heading_change_period <= 0 or self.fps <= 0:
            raise ValueError("heading_change_period and fps must be positive")
        if self.bbox_jitter_std < 0 or self.score_noise_std < 0:
            raise ValueError("noise standard deviations must be >= 0")

    @property
    def camera(self) -> "Camera":
        return Camera(self.camera_height, self.camera_tilt, self.focal_length, self.image_width, self.image_height)

    def as_dict(self) -> dict:
        return asdict(self)


PRESETS = {
    "sparse": dict(n_agents=8),
    "medium": dict(n_agents=20),
    # 40 agents, heavy mutual occlusion; misses below 0.15 visibility
    "dense": dict(
        n_agents=40,
        n_frames=300,
        ground_near=8.0,
        ground_far=14.0,
        miss_visibility_threshold=0.15,
        miss_probability=0.5,
    ),
}


def preset(name: str, **overrides) -> SimulatorConfig:
    return SimulatorConfig(**{**PRESETS[name], **overrides})


@dataclass(frozen=True)
class Camera:
    height: float
    tilt_deg: float
    focal: float
    image_width: float
    image_height: float

    def project(self, points: np.ndarray) -> np.ndarray:
        """World points ``(..., 3)`` as (X lateral, Y up, Z forward) -> pixels ``(..., 2)``.

        Raises for points at or behind the image plane.
        """
        th = math.radians(self.tilt_deg)
        s, c = math.sin(th), math.cos(th)
        x = points[..., 0]
        dy = points[..., 1] - self.height
        z = points[..., 2]
        zc = -dy * s + z * c
        yc = -dy * c - z * s
        if np.any(zc <= 1e-9):
            raise ValueError("point behind camera")
        u = self.image_width / 2 + self.focal * x / zc
        v = self.image_height / 2 + self.focal * yc / zc
        return np.stack([u, v], axis=-1)


def _corners(pos: np.ndarray, agent_height: float, agent_width: float) -> np.ndarray:
    """(n, 2) ground positions (X, Z) -> (n, 4, 3) slab corners."""
    pos = np.atleast_2d(np.asarray(pos, dtype=float))
    n = len(pos)
    hw = agent_width / 2
    out = np.zeros((n, 4, 3))
    out[:, :, 0] = pos[:, :1] + np.array([-hw, hw, -hw, hw])
    out[:, :, 1] = np.array([0.0, 0.0, agent_height, agent_height])
    out[:, :, 2] = pos[:, 1:2]
    return out


def project_boxes(pos: np.ndarray, cfg_or_camera, agent_height: float, agent_width: float = 0.5) -> np.ndarray:
    cam = cfg_or_camera.camera if isinstance(cfg_or_camera, SimulatorConfig) else cfg_or_camera
    uv = cam.project(_corners(pos, agent_height, agent_width))
    return np.concatenate([uv.min(axis=1), uv.max(axis=1)], axis=1)


def project_agent(position, agent_height: float, camera: Camera, agent_width: float = 0.5) -> BBox:
    """Image box of an agent standing at ground point ``(X, Z)``."""
    return BBox(*project_boxes(np.asarray(position, dtype=float)[None], camera, agent_height, agent_width)[0].tolist())


def covered_fraction(target: np.ndarray, occluders: np.ndarray) -> float:
    """Fraction of ``target`` (tlbr) covered by the union of ``occluders``."""
    area = (target[2] - target[0]) * (target[3] - target[1])
    if area <= 0 or len(occluders) == 0:
        return 0.0
    r = occluders.copy()
    r[:, 0] = np.maximum(r[:, 0], target[0])
    r[:, 1] = np.maximum(r[:, 1], target[1])
    r[:, 2] = np.minimum(r[:, 2], target[2])
    r[:, 3] = np.minimum(r[:, 3], target[3])
    r = r[(r[:, 2] > r[:, 0]) & (r[:, 3] > r[:, 1])]
    if len(r) == 0:
        return 0.0
    xs = np.unique(np.concatenate([r[:, 0], r[:, 2]]))
    ys = np.unique(np.concatenate([r[:, 1], r[:, 3]]))
    cx = (xs[:-1] + xs[1:]) / 2
    cy = (ys[:-1] + ys[1:]) / 2
    inside_x = (cx[None, :] > r[:, :1]) & (cx[None, :] < r[:, 2:3])  # (m, nx)
    inside_y = (cy[None, :] > r[:, 1:2]) & (cy[None, :] < r[:, 3:4])  # (m, ny)
    covered = (inside_y[:, :, None] & inside_x[:, None, :]).any(axis=0)
    cell = np.diff(ys)[:, None] * np.diff(xs)[None, :]
    return float(min((cell * covered).sum() / area, 1.0))


def visibilities(boxes: np.ndarray, ground_depth: np.ndarray) -> np.ndarray:
    n = len(boxes)
    vis = np.ones(n)
    for i in range(n):
        nearer = ground_depth < ground_depth[i]
        if nearer.any():
            vis[i] = 1.0 - covered_fraction(boxes[i], boxes[nearer])
    return vis


@dataclass
class SimOutput:
    config: SimulatorConfig
    gt: dict[int, list[GtBox]]
    detections: dict[int, list[Detection]]
    ground_depth: dict[int, np.ndarray]


def walkable_half_width(cfg: SimulatorConfig) -> float:
    """Half-width of the walkable strip so agents at the near edge stay in frame."""
    if cfg.ground_half_width is not None:
        return cfg.ground_half_width
    cam = cfg.camera
    th = math.radians(cfg.camera_tilt)
    # widest image extent is at the near edge, on whichever slab end is closest to the image plane
    y = max(cfg.agent_height, 0.0)
    zc = min(cam.height - y, cam.height) * math.sin(th) + cfg.ground_near * math.cos(th)
    margin = 2.0  # pixels
    return (cfg.image_width / 2 - margin) * zc / cfg.focal_length - cfg.agent_width / 2


def _check_fits(cfg: SimulatorConfig, half_width: float) -> None:
    if half_width <= 0:
        raise ValueError("walkable region has no width inside the image")
    probe = np.array(
        [[-half_width, cfg.ground_near], [half_width, cfg.ground_near], [-half_width, cfg.ground_far], [half_width, cfg.ground_far]]
    )
    try:
        boxes = project_boxes(probe, cfg, cfg.agent_height, cfg.agent_width)
    except ValueError:
        raise ValueError("walkable region extends behind the camera") from None
    if boxes[:, 0].min() < 0 or boxes[:, 2].max() > cfg.image_width or boxes[:, 1].min() < 0 or boxes[:, 3].max() > cfg.image_height:
        raise ValueError(f"agents do not fit in a {cfg.image_width:g}x{cfg.image_height:g} frame: {boxes.round(1).tolist()}")


def generate(cfg: SimulatorConfig) -> SimOutput:
    half_width = walkable_half_width(cfg)
    _check_fits(cfg, half_width)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_agents
    lo = np.array([-half_width, cfg.ground_near])
    span = np.array([2 * half_width, cfg.ground_far - cfg.ground_near])
    pos = lo + rng.random((n, 2)) * span

    def draw_velocity(m: int) -> np.ndarray:
        heading = rng.uniform(0, 2 * math.pi, m)
        speed = rng.uniform(cfg.speed_min, cfg.speed_max, m) / cfg.fps
        return np.stack([np.cos(heading) * speed, np.sin(heading) * speed], axis=1)

    vel = draw_velocity(n)
    change_p = 1.0 / cfg.heading_change_period
    gt: dict[int, list[GtBox]] = {}
    dets: dict[int, list[Detection]] = {}
    depth_log: dict[int, np.ndarray] = {}
    for frame in range(1, cfg.n_frames + 1):
        if frame > 1:
            turn = rng.random(n) < change_p
            new_vel = draw_velocity(n)
            vel = np.where(turn[:, None], new_vel, vel)
            pos = lo + np.mod(pos + vel - lo, span)
        boxes = project_boxes(pos, cfg, cfg.agent_height, cfg.agent_width)
        depth = pos[:, 1].copy()
        vis = visibilities(boxes, depth)

        miss_draw = rng.random(n)
        score_noise = rng.normal(0.0, cfg.score_noise_std, n) if cfg.score_noise_std > 0 else np.zeros(n)
        jitter = rng.normal(0.0, cfg.bbox_jitter_std, (n, 4)) if cfg.bbox_jitter_std > 0 else np.zeros((n, 4))
        order = rng.permutation(n)

        gt[frame] = [GtBox(i + 1, BBox(*boxes[i].tolist()), float(vis[i])) for i in range(n)]
        frame_dets = []
        for i in order.tolist():
            if vis[i] < cfg.miss_visibility_threshold and miss_draw[i] < cfg.miss_probability:
                continue
            score = float(np.clip(cfg.base_score - cfg.occlusion_score_slope * (1.0 - vis[i]) + score_noise[i], 0.0, 1.0))
            b = boxes[i] + jitter[i]
            x1, x2 = sorted((b[0], b[2]))
            y1, y2 = sorted((b[1], b[3]))
            frame_dets.append(Detection.from_bbox((x1, y1, x2, y2), score, cfg.image_height))
        dets[frame] = frame_dets
        depth_log[frame] = depth
    return SimOutput(cfg, gt, dets, depth_log)


def with_seed(cfg: SimulatorConfig, seed: int) -> SimulatorConfig:
    return replace(cfg, seed=seed)
