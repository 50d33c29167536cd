"""Levi certificate of the Green-function candidate along a ray of centres.

Prints the pass fraction per centre norm and the smallest norm beyond which
every certificate reaches the requested level.
"""
import argparse
import os

import numpy as np

from wermerdomain import greenfn, report
from wermerdomain.config import build_config
from wermerdomain.experiments import green_centers


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--norm-max", type=float, default=1.2)
    ap.add_argument("--count", type=int, default=17)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="out/scripts")
    args = ap.parse_args()

    norms = ",".join(repr(float(x)) for x in np.linspace(0, args.norm_max, args.count))
    cfg = build_config(overrides={"delta": args.delta, "norms": norms, "samples": args.samples, "seed": args.seed})
    scan = greenfn.scan_green_threshold(cfg.delta, green_centers(cfg), cfg.params(), samples=cfg.samples,
                                        seed=cfg.seed, max_tries=200_000)
    rows = [(r["norm"], r["samples"], r["pass_fraction"], r["psh_fraction"]) for r in scan["rows"]]
    for r in rows:
        print(f"norm={r[0]:.4f}  samples={r[1]:>4d}  pass={r[2]:.3f}  psh={r[3]:.3f}")
    print(f"C1={scan['c1']:.5g}  threshold={scan['threshold']:.4g}")
    report.ensure_dir(args.outdir)
    report.write_csv(os.path.join(args.outdir, "green_threshold.csv"),
                     ["norm", "samples", "pass_fraction", "psh_fraction"], rows, cfg.seed, cfg.hash())


if __name__ == "__main__":
    main()
