"""The named experiments behind the command-line subcommands.

Each experiment maps a :class:`RunConfig` to an :class:`Outcome`: a results
dict, named invariant checks, CSV tables and optional heatmaps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, continuation, greenfn, hyperbolicity, lattice, wermer
from .config import RunConfig, parse_complex, parse_floats
from .potentials import PointClass, classify_point, phi_tilde, phi_total

# opening of the spiral, read off the enumeration of Z + iZ
SPIRAL_HEAD = [(0, 0), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (2, -1), (2, 0)]


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    invariants: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    images: dict = field(default_factory=dict)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.invariants.append({"name": name, "pass": bool(ok), "detail": detail})

    @property
    def passed(self) -> bool:
        return all(i["pass"] for i in self.invariants)


def run_spiral(cfg: RunConfig) -> Outcome:
    out = Outcome()
    pts = [lattice.gauss_point(k) for k in range(1, cfg.count + 1)]
    out.tables["spiral"] = (["index", "re", "im"], [(k, p.re, p.im) for k, p in enumerate(pts, 1)])
    head = [tuple(p) for p in pts[:len(SPIRAL_HEAD)]]
    out.check("spiral_head", head == SPIRAL_HEAD[:len(head)], f"first {len(head)} points")
    out.check("inverse", all(lattice.spiral_index(*p) == k for k, p in enumerate(pts, 1)),
              "spiral_index inverts gauss_point")
    out.results["points"] = [list(p) for p in pts]
    return out


def run_slice(cfg: RunConfig) -> Outcome:
    out = Outcome()
    sched = cfg.params().sched
    z0 = parse_complex(cfg.z0, "z0")
    s = wermer.slice_points(z0, cfg.n, sched)
    rows = [(i, str(s.label(i)), p.real, p.imag) for i, p in enumerate(s.points)]
    out.tables["slice"] = (["index", "sheet", "re", "im"], rows)
    key = lambda a: sorted(zip(a.real.tolist(), a.imag.tolist()))
    out.check("negation_symmetric", key(s.points) == key(-s.points), "set equals its negation exactly")
    cert = wermer.cluster_certificate(z0, cfg.n, sched)
    out.check("cluster_certificate", cert.valid, f"margin={float(cert.margin)!r} depth={cert.worst_depth}")
    distinct = wermer.distinct_slice_count(z0, cfg.n, sched)
    out.check("distinct_points", distinct == 2 ** cfg.n, f"{distinct} of {2 ** cfg.n}")
    out.results.update(z0=z0, n=cfg.n, points=len(s), distinct=distinct, cluster_gap=s.cluster_gap,
                       certificate_margin=cert.margin)
    return out


def run_phi_map(cfg: RunConfig) -> Outcome:
    out = Outcome()
    params = cfg.params()
    c = parse_complex(cfg.center, "center")
    fixed = parse_complex(cfg.fixed, "fixed")
    # pixel centres, so a symmetric window never lands on lattice points
    step = 2 * cfg.half_width / cfg.pixels
    ax = -cfg.half_width + step * (np.arange(cfg.pixels) + 0.5)
    grid = c + ax[None, :] + 1j * ax[::-1, None]
    z, w = (grid, np.full_like(grid, fixed)) if cfg.plane == "z" else (np.full_like(grid, fixed), grid)
    on_pole = np.isin(z, wermer.poles(params.level))
    z_safe = np.where(on_pole, z + step / 2, z)
    if cfg.field == "phi_n":
        vals = wermer.phi_n(z_safe, w, params.level, params.sched)
    else:
        vals = phi_tilde(z_safe, w, params, strict=False)
    vals = np.where(on_pole, np.nan, vals)
    out.results["pole_pixels"] = int(on_pole.sum())
    out.images["phi_map"] = vals
    finite = np.isfinite(vals)
    out.results.update(field=cfg.field, plane=cfg.plane, pixels=cfg.pixels,
                       finite_fraction=float(finite.mean()),
                       min=float(vals[finite].min()) if finite.any() else math.nan,
                       max=float(vals[finite].max()) if finite.any() else math.nan)
    if cfg.field == "phi_n":
        out.check("no_nan", not np.isnan(vals[~on_pole]).any(), "phi_n is defined off the poles")
    else:
        ok = np.isnan(vals) == ~(phi_total(z_safe, w, params) < 0)
        out.check("domain", bool(ok[~on_pole].all()), "phi_tilde undefined exactly where phi_total >= 0")
    return out


def run_levi(cfg: RunConfig) -> Outcome:
    out = Outcome()
    params = cfg.params()
    smp = analysis.sample_in_A(params, cfg.samples, cfg.seed, z_radius=cfg.z_radius, w_spread=cfg.w_spread,
                               exclusion=10 * cfg.h)
    res = analysis.levi_check_batch(smp.z, smp.w, params, cfg.h, cfg.tol, distances=smp.distance)
    rows = [(z.real, z.imag, w.real, w.imag, r.distance, r.min_eig, r.bound, r.passed)
            for z, w, r in zip(smp.z, smp.w, res)]
    out.tables["levi"] = (["re_z", "im_z", "re_w", "im_w", "distance", "min_eig", "bound", "pass"], rows)
    frac = float(np.mean([r.passed for r in res])) if res else math.nan
    fails = [r for r in res if not r.passed]
    out.results.update(samples=len(res), tries=smp.tries, pass_fraction=frac,
                       failure_min_distance=min((r.distance for r in fails), default=math.nan))
    out.check("levi_bound", len(res) == cfg.samples and frac >= 0.99,
              f"{frac:.4f} of {len(res)} admissible points")
    return out


def lelong_point(cfg: RunConfig):
    sched = cfg.params().sched
    z0 = (analysis.regular_zero_point(cfg.lelong_level, sched) if cfg.lelong_z0 == "auto"
          else parse_complex(cfg.lelong_z0, "lelong_z0"))
    w0 = wermer.sheet_value(z0, wermer.SheetLabel.plus(cfg.lelong_level), sched)
    return z0, w0


def lelong_profiles(cfg: RunConfig, zeta0=None):
    params = cfg.params(level=cfg.lelong_level)
    zeta0 = lelong_point(cfg) if zeta0 is None else zeta0
    radii = parse_floats(cfg.radii, "radii")
    f_n = lambda z, w: wermer.phi_n(z, w, cfg.lelong_level, params.sched)
    f_t = lambda z, w: phi_tilde(z, w, params, strict=False)
    pn = analysis.lelong_ratio_profile(zeta0, f_n, radii, cfg.directions, cfg.seed)
    pt = analysis.lelong_ratio_profile(zeta0, f_t, radii, cfg.directions, cfg.seed)
    return zeta0, pn, pt


def run_lelong(cfg: RunConfig) -> Outcome:
    out = Outcome()
    zeta0, pn, pt = lelong_profiles(cfg)
    target = 2.0 ** -cfg.lelong_level
    out.tables["lelong"] = (["radius", "ratio_phi_n", "ratio_phi_tilde"],
                            list(zip(pn.radii, pn.ratios, pt.ratios)))
    out.results.update(z0=zeta0[0], w0=zeta0[1], target=target, phi_n=pn.ratios, phi_tilde=pt.ratios,
                       phi_tilde_domain_errors=len(pt.errors))
    out.check("phi_n_ratio", abs(pn.ratios[-1] - target) <= 0.1 * target,
              f"{float(pn.ratios[-1])!r} vs {float(target)!r}")
    last, first = pt.ratios[-1], pt.ratios[0]
    out.check("phi_tilde_ratio", bool(last < 0.05 and last < first),
              f"r_min ratio {float(last)!r}, r_max ratio {float(first)!r}, {len(pt.errors)} domain errors")
    return out


def region_predicate(cfg: RunConfig):
    params = cfg.params()
    if cfg.region == "ball":
        return lambda x: np.sum(x * x, axis=1) < 1.0

    def pred(x):
        z = x[:, 0] + 1j * x[:, 1]
        w = x[:, 2] + 1j * x[:, 3]
        c = np.asarray(classify_point(z, w, params))
        if cfg.region == "U":
            return c != PointClass.OUTSIDE_U
        return (c == PointClass.IN_A) | (c == PointClass.ON_VARIETY)
    return pred


def run_volume(cfg: RunConfig) -> Outcome:
    out = Outcome()
    est = analysis.mc_volume(region_predicate(cfg), cfg.box4(), cfg.N, cfg.seed, threads=cfg.threads)
    out.tables["volume"] = (["region", "N", "value", "stderr", "hits", "errors"],
                            [(cfg.region, est.samples, est.value, est.stderr, est.hits, est.errors)])
    out.results.update(region=cfg.region, value=est.value, stderr=est.stderr, hits=est.hits, errors=est.errors)
    if cfg.region == "ball" and all(lo <= -1 and hi >= 1 for lo, hi in cfg.box4()):
        exact = math.pi ** 2 / 2
        out.check("ball_volume", abs(est.value - exact) <= 3 * est.stderr,
                  f"{float(est.value)!r} vs {float(exact)!r} (stderr {float(est.stderr)!r})")
    out.check("no_predicate_errors", est.errors == 0, f"{est.errors} predicate errors")
    return out


def run_sublevel_decay(cfg: RunConfig) -> Outcome:
    out = Outcome()
    deltas = parse_floats(cfg.deltas, "deltas")
    ests = analysis.sublevel_decay_profile(cfg.box4(), cfg.a, deltas, cfg.params(), cfg.N, cfg.seed,
                                           threads=cfg.threads)
    out.tables["sublevel_decay"] = (["delta", "level", "value", "stderr", "hits"],
                                    [(d, -cfg.a / d, e.value, e.stderr, e.hits) for d, e in zip(deltas, ests)])
    out.results.update(deltas=deltas, values=[e.value for e in ests], stderr=[e.stderr for e in ests])
    strict = all(a.value - b.value > 3 * math.hypot(a.stderr, b.stderr) for a, b in zip(ests, ests[1:]))
    mono = all(b.value <= a.value + 3 * math.hypot(a.stderr, b.stderr) for a, b in zip(ests, ests[1:]))
    out.check("monotone", mono, "nonincreasing within 3 stderr")
    out.check("strict_decay", strict, "consecutive drops exceed 3 stderr")
    return out


def _window(cfg: RunConfig) -> continuation.LevelWindow:
    m, n = (int(v) for v in parse_floats(cfg.window, "window"))
    return continuation.LevelWindow(m, n)


def run_lift(cfg: RunConfig) -> Outcome:
    out = Outcome()
    sched = cfg.params().sched
    win = _window(cfg)
    sheet = wermer.SheetLabel.of(1 if c == "+" else -1 for c in cfg.sheet)
    a = lattice.pole(cfg.j)
    curve = continuation.PlanarCurve(a + cfg.loop_radius * np.exp(2j * np.pi * np.arange(65) / 64))
    res = continuation.lift_curve(curve, sheet, win, sched)
    half = continuation.lift_curve(curve, sheet, win, sched, max_step=0.05, record=False)
    expect = sheet.flip(cfg.j - win.m + 1) if win.m <= cfg.j <= win.n else sheet
    out.tables["lift"] = (["re_z", "im_z", "re_w", "im_w"],
                          [(z.real, z.imag, w.real, w.imag) for z, w in res.path])
    z_end, w_end = res.end_point
    on = abs(wermer.sheet_value(z_end, res.end_sheet, sched, win.m) - w_end)
    out.results.update(end_sheet=str(res.end_sheet), steps=res.steps, min_clearance=res.min_clearance_used)
    out.check("monodromy", res.end_sheet == expect, f"{res.end_sheet} vs {expect}")
    out.check("step_halving", half.end_sheet == res.end_sheet, "same end sheet at half the step")
    out.check("on_variety", on <= 1e-10, f"{float(on)!r}")
    return out


def run_monodromy(cfg: RunConfig) -> Outcome:
    out = Outcome()
    sched = cfg.params().sched
    rng = np.random.default_rng(cfg.seed)
    win = continuation.LevelWindow(1, max(cfg.j_max, 1))
    rows, ok, twice = [], True, True
    for j in range(1, cfg.j_max + 1):
        for _ in range(cfg.basepoints):
            base = complex(*rng.uniform(-2.5, 2.5, 2))
            act = continuation.monodromy_loop(j, base, 0.25, win, sched)
            good = act.flipped == (j,)
            ok &= good
            rows.append((j, base.real, base.imag, " ".join(map(str, act.flipped)), good))
        base = complex(*rng.uniform(-2.5, 2.5, 2))
        twice &= continuation.monodromy_loop(j, base, 0.25, win, sched, times=2).is_identity
    out.tables["monodromy"] = (["j", "re_base", "im_base", "flipped", "pass"], rows)
    out.results.update(loops=len(rows))
    out.check("single_bit_flip", ok, f"{len(rows)} loops, j <= {cfg.j_max}")
    out.check("involution", twice, "double loops act trivially")
    return out


def walk_endpoints(cfg: RunConfig, rng: np.random.Generator):
    sched = cfg.params().sched
    N = cfg.walk_levels
    zp, zq = parse_complex(cfg.zp, "zp"), parse_complex(cfg.zq, "zq")
    sp = wermer.SheetLabel.from_index(int(rng.integers(2 ** N)), N)
    sq = wermer.SheetLabel.from_index(int(rng.integers(2 ** N)), N)
    return (zp, wermer.sheet_value(zp, sp, sched)), (zq, wermer.sheet_value(zq, sq, sched))


def run_walk(cfg: RunConfig) -> Outcome:
    out = Outcome()
    sched = cfg.params().sched
    p, q = walk_endpoints(cfg, np.random.default_rng(cfg.seed))
    res = continuation.walk_to_point(p, q, cfg.n, sched, cfg.walk_levels)
    bound = 2.0 ** (1 - cfg.n)
    out.tables["walk"] = (["n", "m_n", "error", "bound", "tail_bound"],
                          [(cfg.n, res.trace["m_n"], res.error, bound, res.trace["bound"])])
    out.results.update(p=p, q=q, q_star=res.q_star, error=res.error, bound=bound, trace=res.trace)
    out.check("walk_bound", res.error < bound, f"{float(res.error)!r} < {float(bound)!r}")
    out.check("tail_bound", res.error < res.trace["bound"] or res.error == 0.0,
              f"{float(res.error)!r} < {float(res.trace['bound'])!r}")
    return out


def run_disk_probe(cfg: RunConfig) -> Outcome:
    out = Outcome()
    params = cfg.params()
    est = hyperbolicity.empirical_r0(cfg.t, params, cfg.centers, cfg.seed, re_half=cfg.re_half,
                                     im_half=cfg.im_half)
    best = est.argmax
    ts = [cfg.t, cfg.t - 0.5, cfg.t - 1.0, cfg.t - 2.0]
    radii = [hyperbolicity.affine_disk_radius(best.center, best.direction, t, params, tol=1e-4).radius
             for t in ts]
    out.tables["disk_probe"] = (["t", "radius"], list(zip(ts, radii)))
    out.results.update(r0_hat=est.r0_hat, center=best.center, direction=best.direction, probes=est.probes,
                       capped=best.capped)
    out.check("finite", math.isfinite(est.r0_hat) and not best.capped, f"r0_hat={float(est.r0_hat)!r}")
    out.check("monotone_in_t", all(b <= a for a, b in zip(radii, radii[1:])), f"{radii}")
    return out


def green_centers(cfg: RunConfig):
    sched = cfg.params().sched
    out = []
    for x in parse_floats(cfg.norms, "norms"):
        z = complex(x, 0.05)
        out.append((z, wermer.sheet_value(z, wermer.SheetLabel.plus(cfg.level), sched)))
    return out


def run_green_cert(cfg: RunConfig) -> Outcome:
    out = Outcome()
    params = cfg.params()
    scan = greenfn.scan_green_threshold(cfg.delta, green_centers(cfg), params, samples=cfg.samples,
                                        h=cfg.h, tol=cfg.tol, seed=cfg.seed, max_tries=200_000)
    rows = [(r["norm"], r["z"], r["w"], r["samples"], r["pass_fraction"], r["psh_fraction"]) for r in scan["rows"]]
    out.tables["green_cert"] = (["norm", "z", "w", "samples", "pass_fraction", "psh_fraction"], rows)
    out.results.update(c1=scan["c1"], threshold=scan["threshold"], rows=scan["rows"])
    beyond = [r for r in scan["rows"] if r["samples"] > 0 and r["norm"] >= scan["threshold"]]
    out.check("certificate", math.isfinite(scan["threshold"]) and all(r["pass_fraction"] >= 0.99 for r in beyond),
              f"threshold {float(scan['threshold'])!r}, {len(beyond)} certified centres")
    return out


COMMANDS = {
    "spiral": run_spiral,
    "slice": run_slice,
    "phi-map": run_phi_map,
    "levi": run_levi,
    "lelong": run_lelong,
    "volume": run_volume,
    "sublevel-decay": run_sublevel_decay,
    "lift": run_lift,
    "monodromy": run_monodromy,
    "walk": run_walk,
    "disk-probe": run_disk_probe,
    "green-cert": run_green_cert,
}
