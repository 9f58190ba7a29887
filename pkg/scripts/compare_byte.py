"""Depth cascade vs. the flat two-stage baseline on a simulator preset.

    python3 scripts/compare_byte.py --preset dense --seeds 10 --k-low 8
"""

import argparse
import json
from dataclasses import replace

from sparsetrack.experiments import compare, summarize
from sparsetrack.metrics import format_table
from sparsetrack.simulator import PRESETS, preset
from sparsetrack.tracker import TrackerConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="dense", choices=sorted(PRESETS))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--k-low", type=int, default=8)
    ap.add_argument("--shared-depth-range", action="store_true")
    ap.add_argument("--sim", default="{}", help="JSON overrides for the simulator preset")
    ap.add_argument("--json", action="store_true", help="print per-seed scores as JSON")
    args = ap.parse_args()

    sim_cfg = preset(args.preset, **json.loads(args.sim))
    base = TrackerConfig(shared_depth_range=args.shared_depth_range)
    variants = [("byte", base, True), (f"k_low={args.k_low}", replace(base, k_low=args.k_low), False)]
    seeds = range(args.first_seed, args.first_seed + args.seeds)
    runs = compare(sim_cfg, list(seeds), variants)
    if args.json:
        print(json.dumps([r.as_row() for r in runs], indent=2))
    rows = summarize(runs)
    print(format_table(rows, ["label", "n", "idf1_mean", "idf1_std", "mota_mean", "idsw_mean", "idsw_std"]))
    by_seed = {}
    for r in runs:
        by_seed.setdefault(r.seed, {})[r.label] = r.idf1
    wins = sum(v[variants[1][0]] > v["byte"] for v in by_seed.values())
    losses = sum(v[variants[1][0]] < v["byte"] for v in by_seed.values())
    print(f"per-seed IDF1: {wins} wins, {losses} losses, {len(by_seed) - wins - losses} ties")


if __name__ == "__main__":
    main()
