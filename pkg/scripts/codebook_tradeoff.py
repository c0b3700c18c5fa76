#!/usr/bin/env python3
"""Minimum RVQ codebook size needed to hold a target outage probability as
channel persistence drops (voice-grade 1% and best-effort 10% targets)."""

import argparse
import csv
import sys

import numpy as np

from bfoutage import PersistenceSpec, SystemConfig, min_codebook_size


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nt", type=int, default=4)
    ap.add_argument("--snr-db", type=float, default=15.0)
    ap.add_argument("--targets", default="0.01,0.1")
    ap.add_argument("--n-max", type=int, default=1 << 14)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    targets = [float(t) for t in args.targets.split(",")]
    rho_grid = 1.0 - np.geomspace(0.002, 0.06, 12)
    rows = []
    for target in targets:
        for rho in sorted(rho_grid, reverse=True):
            cfg = SystemConfig(
                n_t=args.nt, rate_bits=2.0, snr_linear=10 ** (args.snr_db / 10),
                persistence=PersistenceSpec.from_rho(float(rho)),
            )
            res = min_codebook_size(target, cfg, n_max=args.n_max)
            rows.append([
                target, round(float(rho), 6),
                res.size if res.size is not None else "",
                str(res.attainable).lower(), res.pbf_floor,
            ])

    sink = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["target", "rho", "min_size", "attainable", "pbf_floor"])
    writer.writerows(rows)
    if sink is not sys.stdout:
        sink.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
