"""MOT Challenge text files, warp sidecars, sequence folders and run config."""

from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from sparsetrack.geometry import BBox
from sparsetrack.tracker import Detection, FrameResult, TrackerConfig


class MotFormatError(ValueError):
    def __init__(self, path, line: int, field: str, detail: str):
        super().__init__(f"{path}:{line}: bad field '{field}': {detail}")
        self.path, self.line, self.field = path, line, field


@dataclass(frozen=True)
class GtBox:
    id: int
    bbox: BBox
    visibility: float
    flag: int = 1
    cls: int = 1


DET_FIELDS = ("frame", "id", "bb_left", "bb_top", "bb_width", "bb_height", "conf")
GT_FIELDS = ("frame", "id", "bb_left", "bb_top", "bb_width", "bb_height", "flag", "class", "visibility")


def _rows(path, min_fields: int, names: tuple[str, ...], sep: str | None = ","):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in (line.split(sep) if sep else line.split())]
            if len(parts) < min_fields:
                raise MotFormatError(path, lineno, names[min(len(parts), len(names) - 1)], f"expected >= {min_fields} fields, got {len(parts)}")
            yield lineno, parts


def _num(path, lineno, name, text, kind=float):
    try:
        v = kind(float(text)) if kind is int else float(text)
    except ValueError:
        raise MotFormatError(path, lineno, name, f"not a number: {text!r}") from None
    if kind is float and not math.isfinite(v):
        raise MotFormatError(path, lineno, name, f"non-finite value {text!r}")
    if kind is int and float(text) != v:
        raise MotFormatError(path, lineno, name, f"not an integer: {text!r}")
    return v


def parse_detections(path, image_height: float) -> dict[int, list[Detection]]:
    """Frame -> detections in file order (stable within each frame)."""
    out: dict[int, list[Detection]] = {}
    for lineno, p in _rows(path, 7, DET_FIELDS):
        frame = _num(path, lineno, "frame", p[0], int)
        if frame < 1:
            raise MotFormatError(path, lineno, "frame", f"frame must be >= 1, got {frame}")
        left, top, w, h, conf = (_num(path, lineno, n, v) for n, v in zip(DET_FIELDS[2:], p[2:7]))
        if w < 0 or h < 0:
            raise MotFormatError(path, lineno, "bb_width" if w < 0 else "bb_height", "negative size")
        out.setdefault(frame, []).append(Detection.from_bbox(BBox.from_tlwh(left, top, w, h), conf, image_height))
    return dict(sorted(out.items()))


def parse_ground_truth(path) -> dict[int, list[GtBox]]:
    out: dict[int, list[GtBox]] = {}
    for lineno, p in _rows(path, 6, GT_FIELDS):
        frame = _num(path, lineno, "frame", p[0], int)
        tid = _num(path, lineno, "id", p[1], int)
        if frame < 1:
            raise MotFormatError(path, lineno, "frame", f"frame must be >= 1, got {frame}")
        if tid < 1:
            raise MotFormatError(path, lineno, "id", f"id must be >= 1, got {tid}")
        left, top, w, h = (_num(path, lineno, n, v) for n, v in zip(GT_FIELDS[2:6], p[2:6]))
        flag = _num(path, lineno, "flag", p[6], int) if len(p) > 6 else 1
        cls = _num(path, lineno, "class", p[7], int) if len(p) > 7 else 1
        vis = _num(path, lineno, "visibility", p[8]) if len(p) > 8 else 1.0
        if not 0.0 <= vis <= 1.0:
            raise MotFormatError(path, lineno, "visibility", f"outside [0, 1]: {vis}")
        out.setdefault(frame, []).append(GtBox(tid, BBox.from_tlwh(left, top, w, h), vis, flag, cls))
    return dict(sorted(out.items()))


def parse_results(path) -> dict[int, list[tuple[int, BBox, float]]]:
    """Tracker output rows: frame -> [(id, bbox, score)]."""
    out: dict[int, list[tuple[int, BBox, float]]] = {}
    for lineno, p in _rows(path, 6, DET_FIELDS):
        frame = _num(path, lineno, "frame", p[0], int)
        tid = _num(path, lineno, "id", p[1], int)
        left, top, w, h = (_num(path, lineno, n, v) for n, v in zip(DET_FIELDS[2:6], p[2:6]))
        score = _num(path, lineno, "conf", p[6]) if len(p) > 6 else 1.0
        out.setdefault(frame, []).append((tid, BBox.from_tlwh(left, top, w, h), score))
    return dict(sorted(out.items()))


def _f2(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def format_results(results: Iterable[FrameResult]) -> str:
    lines = []
    for fr in results:
        for tid, (x, y, w, h), score in fr.outputs:
            lines.append(f"{fr.frame},{tid},{_f2(x)},{_f2(y)},{_f2(w)},{_f2(h)},{_f2(score)},-1,-1,-1\n")
    return "".join(lines)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_results(path, results: Iterable[FrameResult]) -> None:
    atomic_write_text(path, format_results(results))


def write_detections(path, dets_per_frame: Mapping[int, list[Detection]]) -> None:
    lines = []
    for frame in sorted(dets_per_frame):
        for d in dets_per_frame[frame]:
            x, y, w, h = d.bbox.to_tlwh()
            lines.append(f"{frame},-1,{_f2(x)},{_f2(y)},{_f2(w)},{_f2(h)},{d.score:.4f},-1,-1,-1\n")
    atomic_write_text(path, "".join(lines))


def write_ground_truth(path, gt: Mapping[int, list[GtBox]]) -> None:
    lines = []
    for frame in sorted(gt):
        for g in gt[frame]:
            x, y, w, h = g.bbox.to_tlwh()
            lines.append(f"{frame},{g.id},{_f2(x)},{_f2(y)},{_f2(w)},{_f2(h)},{g.flag},{g.cls},{g.visibility:.4f}\n")
    atomic_write_text(path, "".join(lines))


def validate_results_file(path) -> int:
    """Check a tracker output file is well-formed; returns the row count."""
    n = 0
    seen: set[tuple[int, int]] = set()
    for lineno, p in _rows(path, 10, DET_FIELDS + ("x", "y", "z")):
        if len(p) != 10:
            raise MotFormatError(path, lineno, "row", f"expected 10 fields, got {len(p)}")
        frame = _num(path, lineno, "frame", p[0], int)
        tid = _num(path, lineno, "id", p[1], int)
        if frame < 1 or tid < 1:
            raise MotFormatError(path, lineno, "frame" if frame < 1 else "id", "must be >= 1")
        for name, v in zip(DET_FIELDS[2:], p[2:7]):
            _num(path, lineno, name, v)
            if "." not in v or len(v.split(".")[1]) != 2:
                raise MotFormatError(path, lineno, name, f"expected 2-decimal fixed point, got {v!r}")
        if float(p[4]) < 0 or float(p[5]) < 0:
            raise MotFormatError(path, lineno, "bb_width", "negative size")
        if p[7:] != ["-1", "-1", "-1"]:
            raise MotFormatError(path, lineno, "x", "expected -1 placeholders")
        if (frame, tid) in seen:
            raise MotFormatError(path, lineno, "id", f"duplicate id {tid} in frame {frame}")
        seen.add((frame, tid))
        n += 1
    return n


# --- warps ---------------------------------------------------------------------

def parse_warps(path) -> dict[int, np.ndarray]:
    from sparsetrack.motion import check_warp

    out: dict[int, np.ndarray] = {}
    names = ("frame", "a11", "a12", "a13", "a21", "a22", "a23")
    for lineno, p in _rows(path, 7, names, sep=None):
        if len(p) != 7:
            raise MotFormatError(path, lineno, "row", f"expected 7 fields, got {len(p)}")
        frame = _num(path, lineno, "frame", p[0], int)
        if frame in out:
            raise MotFormatError(path, lineno, "frame", f"duplicate warp for frame {frame}")
        coeffs = [_num(path, lineno, n, v) for n, v in zip(names[1:], p[1:])]
        try:
            out[frame] = check_warp(np.array(coeffs).reshape(2, 3))
        except ValueError as e:
            raise MotFormatError(path, lineno, "a11", str(e)) from None
    return dict(sorted(out.items()))


def write_warps(path, warps: Mapping[int, np.ndarray]) -> None:
    lines = []
    for frame in sorted(warps):
        w = np.asarray(warps[frame], dtype=float).ravel()
        lines.append(f"{frame} " + " ".join(repr(float(v)) for v in w) + "\n")
    atomic_write_text(path, "".join(lines))


# --- sequence folders ------------------------------------------------------------

@dataclass
class SequenceInfo:
    name: str
    im_width: float | None
    im_height: float | None
    seq_length: int | None


def read_seqinfo(seq_dir) -> SequenceInfo:
    seq_dir = Path(seq_dir)
    ini = seq_dir / "seqinfo.ini"
    if not ini.exists():
        return SequenceInfo(seq_dir.name, None, None, None)
    cp = configparser.ConfigParser()
    cp.read(ini, encoding="utf-8")
    s = cp["Sequence"] if "Sequence" in cp else {}
    def get(key, kind):
        return kind(s[key]) if key in s else None
    return SequenceInfo(s.get("name", seq_dir.name), get("imWidth", float), get("imHeight", float), get("seqLength", int))


def write_seqinfo(seq_dir, info: SequenceInfo) -> None:
    text = (
        "[Sequence]\n"
        f"name={info.name}\n"
        "imDir=img1\n"
        "frameRate=30\n"
        f"seqLength={info.seq_length}\n"
        f"imWidth={int(info.im_width)}\n"
        f"imHeight={int(info.im_height)}\n"
        "imExt=.jpg\n"
    )
    atomic_write_text(Path(seq_dir) / "seqinfo.ini", text)


# --- config ----------------------------------------------------------------------

MANIFEST_KIND = "sparsetrack-run-manifest"


def load_config(path):
    """Flat JSON object -> (TrackerConfig, SimulatorConfig).

    Each key must name a field of at least one of the two; a key shared by
    both (``image_height``) sets both. A run manifest is accepted too; its
    config snapshot is used, so a run can be repeated from its manifest.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise MotFormatError(path, e.lineno, "json", e.msg) from None
    if isinstance(raw, dict) and raw.get("kind") == MANIFEST_KIND:
        raw = raw["config"]
    return config_from_dict(raw, source=path)


def config_from_dict(raw, source="<config>"):
    from sparsetrack.simulator import SimulatorConfig

    if not isinstance(raw, dict):
        raise MotFormatError(source, 1, "json", "top level must be an object")
    t_names = TrackerConfig.field_names()
    s_names = {f.name for f in fields(SimulatorConfig)}
    unknown = sorted(set(raw) - t_names - s_names)
    if unknown:
        raise MotFormatError(source, 1, unknown[0], f"unknown config key(s): {', '.join(unknown)}")
    for key, v in raw.items():
        if isinstance(v, (dict, list)):
            raise MotFormatError(source, 1, key, "nested values are not allowed")
    tcfg = TrackerConfig(**{k: v for k, v in raw.items() if k in t_names})
    scfg = SimulatorConfig(**{k: v for k, v in raw.items() if k in s_names})
    return tcfg, scfg
