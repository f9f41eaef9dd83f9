"""Probe the weight change against spike lag and fit both exponential flanks."""
import argparse

from biomamba.harness.probe import fit_window, format_probe, probe_stdp_window
from biomamba.learning.hybrid import HybridRuleConfig
from biomamba.learning.stdp import StdpConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau-plus", type=float, default=20.0)
    ap.add_argument("--tau-minus", type=float, default=20.0)
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--grid", default="-40,-20,-10,-5,-2,-1,0,1,2,5,10,20,40")
    args = ap.parse_args()

    stdp = StdpConfig(tau_plus=args.tau_plus, tau_minus=args.tau_minus)
    table = probe_stdp_window(stdp, HybridRuleConfig(eta=1.0, lam=args.lam),
                              [float(x) for x in args.grid.split(",")])
    print(format_probe(table), end="")
    fit = fit_window([row for row in table if row[0] != 0])
    print(f"# fitted tau+ {fit['tau_plus']:.3f} ms, tau- {fit['tau_minus']:.3f} ms")


if __name__ == "__main__":
    main()
