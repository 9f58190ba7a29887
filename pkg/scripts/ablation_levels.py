"""Sweep the number of low-score depth levels on a simulator preset.

    python3 scripts/ablation_levels.py --preset dense --seeds 10 --k 1,2,3,4,5,6,7,8,9
"""

import argparse
import json

from sparsetrack.experiments import compare, level_sweep_variants, summarize
from sparsetrack.metrics import format_table
from sparsetrack.simulator import PRESETS, preset
from sparsetrack.tracker import TrackerConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="dense", choices=sorted(PRESETS))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--k", default="1,2,5,7,9")
    ap.add_argument("--k-high", type=int, default=1)
    ap.add_argument("--shared-depth-range", action="store_true")
    ap.add_argument("--sim", default="{}", help="JSON overrides for the simulator preset")
    args = ap.parse_args()

    ks = [int(v) for v in args.k.split(",")]
    base = TrackerConfig(k_high=args.k_high, shared_depth_range=args.shared_depth_range)
    variants = [("byte", base, True)] + level_sweep_variants(base, ks)
    seeds = list(range(args.first_seed, args.first_seed + args.seeds))
    runs = compare(preset(args.preset, **json.loads(args.sim)), seeds, variants)
    print(format_table(summarize(runs), ["label", "n", "idf1_mean", "idf1_std", "mota_mean", "mota_std", "idsw_mean", "idsw_std"]))


if __name__ == "__main__":
    main()
