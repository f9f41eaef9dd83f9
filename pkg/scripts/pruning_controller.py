"""Sparsity trajectories of the pruning controller on a static weight matrix.

Prints how many evaluations each target takes, for the small-weight
orientation used in training and for the literal (large-weight) form.
"""
import argparse

import numpy as np

from biomamba.harness.tasks import philox
from biomamba.pruning import PruningState, controller_tick, measure_sparsity


def trajectory(rho, evaluations, literal, seed):
    rng = philox(seed, int(rho * 1000))
    w = rng.uniform(-1.0, 1.0, size=(100, 100))
    state = PruningState.full(w.shape, rho=rho, eq9_literal=literal)
    out = []
    for _ in range(evaluations):
        state = controller_tick(w, state, rng)
        out.append((measure_sparsity(state), state.theta))
    return np.array(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.5, 0.8, 0.9])
    ap.add_argument("--evaluations", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=14)
    args = ap.parse_args()

    print("orientation\trho\tfirst_within_0.05\tfinal_sparsity\tmax_overshoot\tfinal_theta")
    for literal in (False, True):
        for rho in args.rho:
            traj = trajectory(rho, args.evaluations, literal, args.seed)
            s = traj[:, 0]
            inside = np.flatnonzero(np.abs(s - rho) <= 0.05)
            first = str(inside[0] + 1) if inside.size else "never"
            print(f"{'literal' if literal else 'small-first'}\t{rho}\t{first}\t{s[-1]:.4f}\t"
                  f"{max(0.0, s.max() - rho):.4f}\t{traj[-1, 1]:.4f}")


if __name__ == "__main__":
    main()
