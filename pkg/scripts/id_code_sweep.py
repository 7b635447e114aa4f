"""Build ID codes on a channel for several block lengths and tabulate their errors.

For each n the transmission code has M = 2^floor(rate n) codewords (at
least 16, so the eps = 1/16 set family is non-empty), and the assembled
code is evaluated exactly.
The implied rate columns compare log log N / n with the capacity.
"""

from __future__ import annotations

import argparse
import math
import sys

from cqid.channels import as_family, load_channel
from cqid.cli import Report, emit_plot_data
from cqid.idcodes import assemble_id_code, build_transmission_code, gilbert_family
from cqid.measures import compound_capacity


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("channel", help="channel or compound family document")
    ap.add_argument("--n", type=int, nargs="+", default=[6, 8, 10])
    ap.add_argument("--rate", type=float, default=0.5)
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--lam", type=float, default=0.9)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    fam = as_family(load_channel(args.channel))
    cap = compound_capacity(fam).value
    rep = Report("id-sweep")
    rep.add("capacity", cap)
    for n in args.n:
        m = min(2 ** max(4, math.floor(args.rate * n)), fam.alphabet_size**n)
        tc = build_transmission_code(fam, n, m, seed=args.seed)
        sf = gilbert_family(m, 1 / 16, args.lam, args.N, seed=args.seed)
        code = assemble_id_code(tc, sf)
        tag = f"n={n},M={m}"
        rep.add("lambda_transmission", tc.max_error, None, tag)
        rep.add("lambda1", code.lambda1, None, tag)
        rep.add("lambda2", code.lambda2, None, tag)
        rep.add("max_intersection", sf.max_intersection(), None, f"{tag},k={sf.subset_size}")
        rep.add("loglogN_over_n", math.log2(math.log2(args.N)) / n, cap, tag)
    emit_plot_data(rep, sys.stdout)


if __name__ == "__main__":
    main()
