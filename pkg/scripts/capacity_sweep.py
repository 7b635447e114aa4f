"""Holevo capacity of BSC embeddings over a crossover grid, as CSV.

Example:
    python3 scripts/capacity_sweep.py --steps 11 > sweep.csv
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from cqid.channels import bsc, depolarized, pure_state_channel
from cqid.cli import Report, emit_plot_data, parallel_map
from cqid.measures import holevo_capacity


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=11)
    ap.add_argument("--pmax", type=float, default=0.5)
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--quantum", action="store_true",
                    help="also sweep a depolarized non-orthogonal pure-state channel")
    args = ap.parse_args()

    grid = np.linspace(0.0, args.pmax, args.steps)
    rep = Report("capacity-sweep")
    for p, res in zip(grid, parallel_map(lambda p: holevo_capacity(bsc(float(p)), args.tol), grid)):
        rep.add("C_bsc", res.value, res.gap_estimate, f"p={p:.4g}")
    if args.quantum:
        base = pure_state_channel([[1, 0], [np.cos(0.4), np.sin(0.4)]])
        chans = [depolarized(base, float(p)) for p in grid]
        for p, res in zip(grid, parallel_map(lambda ch: holevo_capacity(ch, args.tol), chans)):
            rep.add("C_depolarized", res.value, res.gap_estimate, f"p={p:.4g}")
    emit_plot_data(rep, sys.stdout)


if __name__ == "__main__":
    main()
