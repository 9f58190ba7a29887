"""Command-line entry point: track, simulate, eval, sweep, overlay."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

from sparsetrack import __version__
from sparsetrack.dcm import partition_by_range
from sparsetrack.experiments import results_to_pred, worker_count
from sparsetrack.geometry import BBox
from sparsetrack.metrics import clear_metrics, filter_ground_truth, format_table, idf1
from sparsetrack.mot_io import (
    MANIFEST_KIND,
    SequenceInfo,
    atomic_write_text,
    load_config,
    format_results,
    parse_detections,
    parse_ground_truth,
    parse_results,
    parse_warps,
    read_seqinfo,
    write_detections,
    write_ground_truth,
    write_seqinfo,
)
from sparsetrack.simulator import PRESETS, SimulatorConfig, generate
from sparsetrack.tracker import TrackerConfig, run_sequence

class CliError(Exception):
    pass


def _read_config(path) -> tuple[TrackerConfig, SimulatorConfig, dict]:
    """Config file or a previous run manifest -> (tracker cfg, sim cfg, raw keys)."""
    if path is None:
        return TrackerConfig(), SimulatorConfig(), {}
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError:
            raw = {}
    if isinstance(raw, dict) and raw.get("kind") == MANIFEST_KIND:
        raw = raw["config"]
    tcfg, scfg = load_config(path)
    return tcfg, scfg, raw if isinstance(raw, dict) else {}


def _write_manifest(out_path: Path, command: str, config: dict, inputs: dict, outputs: dict, started: float) -> None:
    manifest = {
        "kind": MANIFEST_KIND,
        "tool_version": __version__,
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "duration_s": round(time.perf_counter() - started, 3),
    }
    atomic_write_text(out_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _seq_files(seq_dir: Path) -> tuple[Path, Path | None, SequenceInfo]:
    if not seq_dir.is_dir():
        raise CliError(f"sequence directory not found: {seq_dir}")
    det = seq_dir / "det" / "det.txt"
    if not det.exists():
        raise CliError(f"missing detections file: {det}")
    gt = seq_dir / "gt" / "gt.txt"
    return det, (gt if gt.exists() else None), read_seqinfo(seq_dir)


def _resolve_height(tcfg: TrackerConfig, info: SequenceInfo) -> TrackerConfig:
    if tcfg.image_height is not None:
        return tcfg
    if info.im_height is None:
        raise CliError("image_height is neither in the config nor in seqinfo.ini")
    return replace(tcfg, image_height=info.im_height)


def track_sequence(seq_dir: Path, tcfg: TrackerConfig, warps_path=None, baseline: bool = False):
    det_path, _, info = _seq_files(seq_dir)
    tcfg = _resolve_height(tcfg, info)
    dets = parse_detections(det_path, tcfg.image_height)
    warps = parse_warps(warps_path) if warps_path else None
    return run_sequence(dets, warps, tcfg, baseline=baseline, n_frames=info.seq_length), tcfg


# --- commands ----------------------------------------------------------------

def cmd_track(args) -> int:
    started = time.perf_counter()
    tcfg, _, _ = _read_config(args.config)
    results, tcfg = track_sequence(Path(args.seq), tcfg, args.warps, baseline=args.baseline == "byte")
    out = Path(args.out)
    atomic_write_text(out, format_results(results))
    config = asdict(tcfg)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "track",
        config,
        {"seq": str(args.seq), "warps": args.warps, "baseline": args.baseline},
        {"results": str(out)},
        started,
    )
    n = sum(len(r.outputs) for r in results)
    print(f"tracked {len(results)} frames, {n} boxes -> {out}")
    return 0


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    if args.config:
        _, scfg, raw = _read_config(args.config)
    else:
        scfg, raw = SimulatorConfig(), {}
    if args.preset:
        keys = {k: v for k, v in raw.items() if k in asdict(scfg)}
        scfg = SimulatorConfig(**{**PRESETS[args.preset], **keys})
    out_dir = Path(args.out)
    for i in range(args.seeds):
        cfg = replace(scfg, seed=scfg.seed + i)
        sim = generate(cfg)
        seq = out_dir / f"sim-{cfg.seed:04d}"
        write_ground_truth(seq / "gt" / "gt.txt", sim.gt)
        write_detections(seq / "det" / "det.txt", sim.detections)
        write_seqinfo(seq, SequenceInfo(seq.name, cfg.image_width, cfg.image_height, cfg.n_frames))
        _write_manifest(seq / "manifest.json", "simulate", asdict(cfg), {"config": args.config, "preset": args.preset},
                        {"gt": "gt/gt.txt", "det": "det/det.txt"}, started)
        print(f"wrote {seq}")
    return 0


def evaluate_files(gt_path, res_path) -> dict:
    gt = filter_ground_truth(parse_ground_truth(gt_path))
    pred = {f: [(tid, box) for tid, box, _ in rows] for f, rows in parse_results(res_path).items()}
    c = clear_metrics(gt, pred)
    i = idf1(gt, pred)
    return {**c.as_dict(), **i.as_dict()}


def cmd_eval(args) -> int:
    report = evaluate_files(args.gt, args.res)
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        cols = ["mota", "idf1", "fp", "fn", "idsw", "idtp", "idfp", "idfn", "gt_count"]
        print(format_table([report], cols))
    return 0


def _sweep_job(job):
    seq_dir, tcfg, k, baseline = job
    det, gt, _ = _seq_files(Path(seq_dir))
    if gt is None:
        raise CliError(f"sequence {seq_dir} has no gt/gt.txt")
    results, _ = track_sequence(Path(seq_dir), replace(tcfg, k_low=k), baseline=baseline)
    gt_rows = filter_ground_truth(parse_ground_truth(gt))
    pred = results_to_pred(results)
    c = clear_metrics(gt_rows, pred)
    i = idf1(gt_rows, pred)
    return dict(seq=Path(seq_dir).name, label="byte" if baseline else f"k={k}", idf1=i.idf1, mota=c.mota, idsw=c.idsw)


def cmd_sweep(args) -> int:
    import numpy as np

    tcfg, _, _ = _read_config(args.config)
    try:
        ks = [int(v) for v in args.k.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"--k expects comma-separated integers, got {args.k!r}") from None
    if not ks or min(ks) < 1:
        raise CliError("--k needs at least one level count >= 1")
    root = Path(args.set)
    seqs = sorted(p for p in root.iterdir() if (p / "det" / "det.txt").exists()) if root.is_dir() else []
    if not seqs:
        raise CliError(f"no sequences with det/det.txt under {root}")
    jobs = [(str(s), tcfg, k, False) for k in ks for s in seqs]
    if args.baseline:
        jobs = [(str(s), tcfg, ks[0], True) for s in seqs] + jobs
    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["seq", "label", "idf1", "mota", "idsw"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "idf1": f"{r['idf1']:.6f}", "mota": f"{r['mota']:.6f}"})
    atomic_write_text(args.out, buf.getvalue())

    table = []
    for label in dict.fromkeys(r["label"] for r in rows):
        sel = [r for r in rows if r["label"] == label]
        row = {"levels": label, "n": len(sel)}
        for m in ("idf1", "mota", "idsw"):
            v = np.array([r[m] for r in sel], dtype=float)
            row[f"{m}_mean"] = float(v.mean())
            row[f"{m}_std"] = float(v.std(ddof=1)) if len(v) > 1 else 0.0
        table.append(row)
    cols = ["levels", "n", "idf1_mean", "idf1_std", "mota_mean", "mota_std", "idsw_mean", "idsw_std"]
    print(format_table(table, cols))
    return 0


LEVEL_COLORS = ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45",
                "#469990", "#9a6324", "#800000", "#000075"]


def render_svg(width: float, height: float, frame: int, boxes: list[tuple[int, BBox]], levels: list[int]) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" viewBox="0 0 {width:g} {height:g}">',
        f'<rect x="0" y="0" width="{width:g}" height="{height:g}" fill="#ffffff"/>',
        f'<text x="8" y="20" font-family="monospace" font-size="16">frame {frame}</text>',
    ]
    for (tid, b), lv in zip(boxes, levels):
        color = LEVEL_COLORS[lv % len(LEVEL_COLORS)]
        parts.append(
            f'<rect x="{b.x1:.2f}" y="{b.y1:.2f}" width="{b.width:.2f}" height="{b.height:.2f}" '
            f'fill="none" stroke="{color}" stroke-width="2" data-level="{lv}" data-id="{tid}"/>'
        )
        parts.append(f'<text x="{b.x1:.2f}" y="{b.y1 - 3:.2f}" font-family="monospace" font-size="12" fill="{color}">{tid}:{lv}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_overlay(args) -> int:
    tcfg, _, _ = _read_config(args.config)
    seq = Path(args.seq)
    if not seq.is_dir():
        raise CliError(f"sequence directory not found: {seq}")
    info = read_seqinfo(seq)
    tcfg = _resolve_height(tcfg, info)
    width = info.im_width or 1920.0
    k = args.k or tcfg.k_low
    results = parse_results(args.res)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_frames = info.seq_length or max(results, default=0)
    for frame in range(1, n_frames + 1):
        rows = results.get(frame, [])
        boxes = [(tid, b) for tid, b, _ in rows]
        depths = [tcfg.image_height - b.y2 for _, b in boxes]
        part = partition_by_range(depths, k)
        levels = [0] * len(boxes)
        for lv, members in enumerate(part.subsets):
            for i in members:
                levels[i] = lv
        atomic_write_text(out / f"{frame:06d}.svg", render_svg(width, tcfg.image_height, frame, boxes, levels))
    print(f"wrote {n_frames} frames -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparsetrack", description="Pseudo-depth cascade multi-object tracking.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="track one MOT-format sequence")
    t.add_argument("--seq", required=True, help="sequence dir with det/det.txt and seqinfo.ini")
    t.add_argument("--config", help="flat JSON config or a previous run manifest")
    t.add_argument("--warps", help="warp sidecar: 'frame a11 a12 a13 a21 a22 a23' per line")
    t.add_argument("--baseline", choices=["byte"], help="run the BYTE reference association instead")
    t.add_argument("--out", required=True, help="result file to write")
    t.set_defaults(func=cmd_track)

    s = sub.add_parser("simulate", help="generate synthetic crowded sequences")
    s.add_argument("--config", help="flat JSON with SimulatorConfig keys")
    s.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset; config keys override it")
    s.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds from the config seed")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("eval", help="score a result file against ground truth")
    e.add_argument("--gt", required=True)
    e.add_argument("--res", required=True)
    e.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    e.set_defaults(func=cmd_eval)

    w = sub.add_parser("sweep", help="depth-level ablation over a set of sequences")
    w.add_argument("--set", required=True, help="directory of sequence dirs, each with det/ and gt/")
    w.add_argument("--k", default="1,2,5,7,9", help="comma-separated low-score level counts")
    w.add_argument("--config", help="flat JSON tracker config")
    w.add_argument("--baseline", action="store_true", help="also score the BYTE reference")
    w.add_argument("--out", required=True, help="CSV of per-sequence scores")
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("overlay", help="write one SVG per frame, boxes colored by depth level")
    o.add_argument("--seq", required=True)
    o.add_argument("--res", required=True)
    o.add_argument("--config", help="flat JSON tracker config (image_height, k_low)")
    o.add_argument("--k", type=int, help="depth levels to color by (default: k_low)")
    o.add_argument("--out", required=True, help="output directory")
    o.set_defaults(func=cmd_overlay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, KeyError) as e:
        msg = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"sparsetrack {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
