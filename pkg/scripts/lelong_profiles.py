"""Finite-radius Lelong ratios of phi_n and phi_tilde at regular points of E_n.

For each level n the base point is chosen where the regular part of phi_n
vanishes, so the phi_n ratio approaches 2**-n without a 1/log r bias.
"""
import argparse
import os

import numpy as np

from wermerdomain import analysis, report, wermer
from wermerdomain.config import build_config
from wermerdomain.potentials import phi_tilde


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", default="1,2,3,4")
    ap.add_argument("--radii", default="1e-2,1e-3,1e-4,1e-5,1e-6")
    ap.add_argument("--directions", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="out/scripts")
    args = ap.parse_args()

    radii = [float(r) for r in args.radii.split(",")]
    rows = []
    for n in (int(x) for x in args.levels.split(",")):
        cfg = build_config(overrides={"level": n})
        params = cfg.params()
        z0 = analysis.regular_zero_point(n, params.sched)
        zeta0 = (z0, wermer.sheet_value(z0, wermer.SheetLabel.plus(n), params.sched))
        f_n = lambda z, w, n=n: wermer.phi_n(z, w, n, params.sched)
        f_t = lambda z, w: phi_tilde(z, w, params, strict=False)
        pn = analysis.lelong_ratio_profile(zeta0, f_n, radii, args.directions, args.seed)
        pt = analysis.lelong_ratio_profile(zeta0, f_t, radii, args.directions, args.seed)
        for r, a, b in zip(radii, pn.ratios, pt.ratios):
            rows.append((n, z0, r, a, b, 2.0 ** -n))
        print(f"n={n} z0={z0:.6g}  phi_n ratios {np.round(pn.ratios, 5).tolist()}  target {2.0 ** -n:g}  "
              f"phi_tilde domain errors {len(pt.errors)}")
    report.ensure_dir(args.outdir)
    report.write_csv(os.path.join(args.outdir, "lelong_profiles.csv"),
                     ["n", "z0", "radius", "ratio_phi_n", "ratio_phi_tilde", "target"], rows, args.seed,
                     build_config().hash())


if __name__ == "__main__":
    main()
