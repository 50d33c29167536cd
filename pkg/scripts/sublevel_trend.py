"""Sublevel volumes of phi_tilde inside A, and the volume of A itself, versus sample size.

Shows how many Monte Carlo hits the thin domain A receives in a box, which
decides whether the sublevel profile can resolve anything at a given N.
"""
import argparse
import os

from wermerdomain import analysis, report
from wermerdomain.config import RunConfig, build_config
from wermerdomain.experiments import region_predicate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--box", type=float, default=2.0, help="half-width of the cube K")
    ap.add_argument("--sizes", default="1e5,1e6,1e7")
    ap.add_argument("--deltas", default="1,0.5,0.25,0.125")
    ap.add_argument("--level", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--outdir", default="out/scripts")
    args = ap.parse_args()

    cfg = build_config(overrides={"level": args.level, "box": f"{-args.box},{args.box}", "region": "A"})
    deltas = [float(x) for x in args.deltas.split(",")]
    rows = []
    for N in (int(float(x)) for x in args.sizes.split(",")):
        vol = analysis.mc_volume(region_predicate(cfg), cfg.box4(), N, args.seed, threads=args.threads)
        subs = analysis.sublevel_decay_profile(cfg.box4(), 1.0, deltas, cfg.params(), N, args.seed,
                                               threads=args.threads)
        rows.append([N, vol.hits, vol.value, vol.stderr] + [e.hits for e in subs])
        print(f"N={N:>10d}  A hits={vol.hits:>6d}  vol(A)={vol.value:.4g} +- {vol.stderr:.2g}  "
              f"sublevel hits={[e.hits for e in subs]}")
    report.ensure_dir(args.outdir)
    header = ["N", "A_hits", "A_volume", "A_stderr"] + [f"hits_delta_{d:g}" for d in deltas]
    report.write_csv(os.path.join(args.outdir, "sublevel_trend.csv"), header, rows, args.seed, cfg.hash())


if __name__ == "__main__":
    main()
