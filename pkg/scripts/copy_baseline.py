"""Delayed-copy baseline: loss ratio of final to first quarter over seeds.

    python scripts/copy_baseline.py --seeds 0 1 2 --steps 30000
"""
import argparse
import time
from pathlib import Path

from biomamba.harness.config import RunConfig
from biomamba.harness.train import TrainerState, quarter_loss_ratio, run

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "delayed_copy.yaml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(DEFAULT))
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--steps", type=int, default=None)
    args = ap.parse_args()

    cfg = RunConfig.load(args.config)
    if args.steps:
        cfg = cfg.replace(steps=args.steps)
    print("seed\tfirst_q\tfinal_q\tratio\tfinal_acc\tspikes_per_step\tseconds")
    for seed in args.seeds:
        c = cfg.replace(seed=seed, task_seed=seed)
        t0 = time.perf_counter()
        res = run(TrainerState.initial(c))
        first, last, ratio = quarter_loss_ratio(res.records)
        q = len(res.records) // 4
        acc = sum(r.accuracy for r in res.records[-q:]) / q
        rate = res.records[-1].spikes / res.records[-1].step
        print(f"{seed}\t{first:.4f}\t{last:.4f}\t{ratio:.3f}\t{acc:.3f}\t{rate:.2f}\t"
              f"{time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
