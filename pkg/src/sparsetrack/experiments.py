"""Seed-parallel loops from simulated scenes to tracking scores."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from sparsetrack.geometry import BBox
from sparsetrack.metrics import clear_metrics, filter_ground_truth, idf1
from sparsetrack.simulator import SimOutput, SimulatorConfig, generate
from sparsetrack.tracker import FrameResult, TrackerConfig, run_sequence


@dataclass
class RunScore:
    seed: int
    label: str
    idf1: float
    mota: float
    idsw: int
    fp: int
    fn: int

    def as_row(self) -> dict:
        return dict(seed=self.seed, label=self.label, idf1=self.idf1, mota=self.mota, idsw=self.idsw, fp=self.fp, fn=self.fn)


def results_to_pred(results: Iterable[FrameResult]) -> dict[int, list[tuple[int, BBox]]]:
    return {r.frame: [(tid, BBox.from_tlwh(*box)) for tid, box, _ in r.outputs] for r in results}


def score(gt, results: Sequence[FrameResult], seed: int = 0, label: str = "") -> RunScore:
    gt_rows = filter_ground_truth(gt)
    pred = results_to_pred(results)
    c = clear_metrics(gt_rows, pred)
    i = idf1(gt_rows, pred)
    return RunScore(seed, label, i.idf1, c.mota, c.idsw, c.fp, c.fn)


def track_sim(sim: SimOutput, cfg: TrackerConfig, baseline: bool = False) -> list[FrameResult]:
    cfg = replace(cfg, image_height=sim.config.image_height)
    return run_sequence(sim.detections, cfg=cfg, baseline=baseline, n_frames=sim.config.n_frames)


def _variants_for_seed(args):
    sim_cfg, seed, variants = args
    sim = generate(replace(sim_cfg, seed=seed))
    out = []
    for label, cfg, baseline in variants:
        out.append(score(sim.gt, track_sim(sim, cfg, baseline), seed, label))
    return out


def worker_count() -> int:
    env = os.environ.get("ST_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def compare(
    sim_cfg: SimulatorConfig,
    seeds: Sequence[int],
    variants: Sequence[tuple[str, TrackerConfig, bool]],
    workers: int | None = None,
) -> list[RunScore]:
    """Score every (label, tracker config, baseline?) variant on the same simulated seeds."""
    jobs = [(sim_cfg, s, list(variants)) for s in seeds]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        chunks = [_variants_for_seed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_variants_for_seed, jobs))
    return [r for chunk in chunks for r in chunk]


def summarize(scores: Sequence[RunScore]) -> list[dict]:
    labels = list(dict.fromkeys(s.label for s in scores))
    rows = []
    for label in labels:
        sel = [s for s in scores if s.label == label]
        f = np.array([s.idf1 for s in sel])
        m = np.array([s.mota for s in sel])
        w = np.array([s.idsw for s in sel], dtype=float)
        rows.append(
            dict(
                label=label,
                n=len(sel),
                idf1_mean=float(f.mean()),
                idf1_std=float(f.std(ddof=1)) if len(f) > 1 else 0.0,
                mota_mean=float(m.mean()),
                mota_std=float(m.std(ddof=1)) if len(m) > 1 else 0.0,
                idsw_mean=float(w.mean()),
                idsw_std=float(w.std(ddof=1)) if len(w) > 1 else 0.0,
            )
        )
    return rows


def level_sweep_variants(base: TrackerConfig, ks: Sequence[int]) -> list[tuple[str, TrackerConfig, bool]]:
    return [(f"k={k}", replace(base, k_low=k), False) for k in ks]
