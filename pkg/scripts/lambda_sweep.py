"""Final-quarter loss on the delayed-copy task across balance factors."""
import argparse
from pathlib import Path

from biomamba.harness.config import RunConfig
from biomamba.harness.energy import energy_report
from biomamba.harness.train import TrainerState, quarter_loss_ratio, run

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "delayed_copy.yaml"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(DEFAULT))
    ap.add_argument("--lams", type=float, nargs="+", default=[1.0, 0.9, 0.5, 0.0])
    ap.add_argument("--steps", type=int, default=10000)
    ap.add_argument("--pruning", action="store_true")
    args = ap.parse_args()

    base = RunConfig.load(args.config).replace(steps=args.steps, pruning=args.pruning)
    print("lam\tfirst_q\tfinal_q\tratio\tsynop_ratio\tsparsity")
    for lam in args.lams:
        res = run(TrainerState.initial(base.replace(lam=lam)))
        first, last, ratio = quarter_loss_ratio(res.records)
        e = energy_report(res.records)
        print(f"{lam}\t{first:.4f}\t{last:.4f}\t{ratio:.3f}\t{e.synop_ratio:.4f}\t{e.sparsity:.3f}")


if __name__ == "__main__":
    main()
