"""Reduced-scale invariant suites, one per module (all together well under a minute)."""
from __future__ import annotations

import math

import numpy as np

from . import analysis, continuation, greenfn, hyperbolicity, lattice, wermer
from .experiments import SPIRAL_HEAD, Outcome
from .potentials import PotentialParams, phi_tilde


def check_lattice(out: Outcome) -> None:
    head = [tuple(lattice.gauss_point(k)) for k in range(1, 12)]
    out.check("lattice.spiral_head", head == SPIRAL_HEAD)
    out.check("lattice.inverse", all(lattice.spiral_index(*lattice.gauss_point(k)) == k for k in range(1, 2000)))
    b = [lattice.tail_delta_bound(m, 2.0) for m in range(1, 8)]
    out.check("lattice.tail_decreasing", all(y < x for x, y in zip(b, b[1:])))


def check_wermer(out: Outcome) -> None:
    rng = np.random.default_rng(1)
    z = rng.normal(size=40) + 1j * rng.normal(size=40)
    w = rng.normal(size=40) + 1j * rng.normal(size=40)
    n = 8
    a, b = wermer.phi_n(z, w, n), wermer.phi_n(z, w, n, mode="direct")
    out.check("wermer.oracle", bool(np.all(np.abs(a - b) <= 1e-9 * np.maximum(1, np.abs(b)))))
    s = wermer.slice_points(0.5 + 0.5j, 10)
    key = lambda p: sorted(zip(p.real.tolist(), p.imag.tolist()))
    out.check("wermer.negation", key(s.points) == key(-s.points))
    out.check("wermer.certificate", wermer.cluster_certificate(0.5 + 0.5j, 10).valid)
    e8 = wermer.slice_points(2.3 - 0.7j, 8).points
    e9 = wermer.slice_points(2.3 - 0.7j, 9).points
    bound = lattice.epsilon(9) * abs(wermer.sqrt_branch(2.3 - 0.7j, 9)) + 1e-12
    out.check("wermer.hausdorff", wermer.hausdorff_distance(e8, e9) <= bound)


def check_analysis(out: Outcome) -> None:
    f = lambda z, w: np.abs(z) ** 2 + 2 * np.abs(w) ** 2
    H = analysis.fd_complex_hessian(f, (0.05 + 0.02j, -0.03 + 0.04j)).matrix
    out.check("analysis.quadratic_exact", bool(np.allclose(H, np.diag([1, 2]), atol=1e-8)))
    out.check("analysis.hermitian", bool(np.allclose(H, H.conj().T, rtol=1e-10, atol=0)))
    ball = lambda x: np.sum(x * x, axis=1) < 1
    v1 = analysis.mc_volume(ball, [(-1, 1)] * 4, 200_000, 5)
    v2 = analysis.mc_volume(ball, [(-1, 1)] * 4, 200_000, 5, chunk=1 << 12)
    out.check("analysis.mc_reproducible", v1.value == v2.value and v1.stderr == v2.stderr)
    out.check("analysis.mc_calibrated", abs(v1.value - math.pi ** 2 / 2) <= 3 * v1.stderr)
    p = PotentialParams()
    smp = analysis.sample_in_A(p, 50, 3, z_radius=0.05)
    res = analysis.levi_check_batch(smp.z, smp.w, p, distances=smp.distance)
    out.check("analysis.levi", np.mean([r.passed for r in res]) >= 0.99, f"{len(res)} points")
    ests = analysis.sublevel_decay_profile([(-2, 2)] * 4, 1.0, [1, 0.5], p, 100_000, 1)
    out.check("analysis.sublevel_monotone",
              ests[1].value <= ests[0].value + 3 * math.hypot(ests[0].stderr, ests[1].stderr))


def check_continuation(out: Outcome) -> None:
    win = continuation.LevelWindow(1, 5)
    act = continuation.monodromy_loop(3, 0.3 + 0.2j, 0.25, win)
    out.check("continuation.flip", act.flipped == (3,))
    out.check("continuation.involution", continuation.monodromy_loop(3, 0.3 + 0.2j, 0.25, win, times=2).is_identity)
    cert = continuation.decompose_levels(0.7 - 0.3j, 10, 4)
    out.check("continuation.decompose", cert.valid and cert.discrepancy <= 1e-12)
    sp = wermer.SheetLabel.from_index(123, 12)
    sq = wermer.SheetLabel.from_index(3001, 12)
    p = (0.5 + 0.5j, wermer.sheet_value(0.5 + 0.5j, sp))
    q = (2.3 - 0.7j, wermer.sheet_value(2.3 - 0.7j, sq))
    out.check("continuation.walk", all(continuation.walk_to_point(p, q, n, N=12).error < 2.0 ** (1 - n)
                                       for n in (1, 4)))


def check_hyperbolicity(out: Outcome) -> None:
    p = PotentialParams()
    c = (0.3 + 0.2j, wermer.sheet_value(0.3 + 0.2j, wermer.SheetLabel.plus(6)))
    r = [hyperbolicity.affine_disk_radius(c, (0, 1), t, p, tol=1e-4).radius for t in (-1.0, -1.5, -2.0)]
    out.check("hyperbolicity.monotone", r[0] >= r[1] >= r[2], f"{r}")
    out.check("hyperbolicity.open", r[0] > 0)
    out.check("hyperbolicity.kobayashi", hyperbolicity.kobayashi_lower_bound((0, 0), (3, 0), 1.5) == 2.0)


def check_greenfn(out: Outcome) -> None:
    out.check("greenfn.plateaus", greenfn.chi_cutoff((0.3, 0)) == 1.0 and greenfn.chi_cutoff((1.2, 0)) == 0.0)
    c1a, c1b = greenfn.c1_estimate(grid_density=32), greenfn.c1_estimate(grid_density=64)
    out.check("greenfn.c1_stable", abs(c1a - c1b) <= 0.05 * c1b, f"{c1a} vs {c1b}")
    p = PotentialParams()
    zk = (1.2 + 0.05j, wermer.sheet_value(1.2 + 0.05j, wermer.SheetLabel.plus(6)))
    far = (0.05 + 0j, 0.1 + 0j)
    u = greenfn.u_delta_k(far, 0.1, zk, p)
    out.check("greenfn.outside_ball", u == 0.1 * phi_tilde(far[0], far[1], p), f"{u}")


SUITES = {
    "lattice": check_lattice,
    "wermer": check_wermer,
    "analysis": check_analysis,
    "continuation": check_continuation,
    "hyperbolicity": check_hyperbolicity,
    "greenfn": check_greenfn,
}

COMMAND_MODULE = {
    "spiral": "lattice",
    "slice": "wermer",
    "phi-map": "wermer",
    "levi": "analysis",
    "lelong": "analysis",
    "volume": "analysis",
    "sublevel-decay": "analysis",
    "lift": "continuation",
    "monodromy": "continuation",
    "walk": "continuation",
    "disk-probe": "hyperbolicity",
    "green-cert": "greenfn",
}


def run_selftest(modules=None) -> Outcome:
    out = Outcome()
    for name in (modules or SUITES):
        try:
            SUITES[name](out)
        except Exception as exc:  # a crash is a failed invariant, not a usage error
            out.check(f"{name}.crashed", False, f"{type(exc).__name__}: {exc}")
    out.results["modules"] = list(modules or SUITES)
    return out
