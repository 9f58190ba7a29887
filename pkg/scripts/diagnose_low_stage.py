"""Count how often the cascade and flat matching disagree in the low-score stage.

Replays each simulated sequence with the baseline tracker and, at every frame,
also solves the low-score stage with the cascade on the same inputs.

    python3 scripts/diagnose_low_stage.py --preset dense --seeds 3 --k-low 8
"""

import argparse

from sparsetrack.dcm import dcm
from sparsetrack.simulator import PRESETS, generate, preset
from sparsetrack.tracker import ByteTracker, TrackerConfig


class _Probe(ByteTracker):
    def __init__(self, cfg, k_probe):
        super().__init__(cfg)
        self.k_probe = k_probe
        self.calls = self.contested = self.differ = 0

    def _associate(self, t_boxes, t_depths, d_boxes, d_depths, k, tau):
        flat = super()._associate(t_boxes, t_depths, d_boxes, d_depths, k, tau)
        if tau == self.cfg.match_thresh_low and len(t_boxes) and len(d_boxes):
            self.calls += 1
            self.contested += len(t_boxes) > 1 and len(d_boxes) > 1
            cascade = dcm(t_boxes, t_depths, d_boxes, d_depths, self.k_probe, tau)
            self.differ += sorted(cascade.matched) != sorted(flat.matched)
        return flat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="dense", choices=sorted(PRESETS))
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--k-low", type=int, default=8)
    args = ap.parse_args()
    for seed in range(args.seeds):
        sim = generate(preset(args.preset, seed=seed))
        probe = _Probe(TrackerConfig(image_height=sim.config.image_height), args.k_low)
        for f in range(1, sim.config.n_frames + 1):
            probe.step(f, sim.detections.get(f, []))
        print(f"seed {seed}: low-stage solves {probe.calls}, with >1 candidate on both sides {probe.contested}, cascade differs {probe.differ}")


if __name__ == "__main__":
    main()
