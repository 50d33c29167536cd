"""Affine holomorphic disks inside the sublevel sets ``U_t``.

Only affine disks ``lambda -> center + lambda * direction`` are probed.
Their radii bound the extremal radius of general holomorphic disks from
below, so ``empirical_r0`` is a lower estimate of the true constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CenterOutside
from .potentials import PotentialParams, phi_total
from .lattice import spiral_index
from .wermer import sheet_values

__all__ = [
    "DiskProbeResult",
    "R0Estimate",
    "disk_inside",
    "affine_disk_radius",
    "box_cells",
    "empirical_r0",
    "kobayashi_lower_bound",
]


@dataclass(frozen=True)
class DiskProbeResult:
    center: tuple[complex, complex]
    direction: tuple[complex, complex]
    radius: float
    boundary_samples: int
    violating_angle: float | None = None
    capped: bool = False


def _disk_points(center, direction, r: float, samples: int, rings: int):
    theta = 2 * np.pi * np.arange(samples) / samples
    radii = r * np.arange(1, rings + 2) / (rings + 1)  # interior rings, then the boundary
    lam = (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
    return center[0] + lam * direction[0], center[1] + lam * direction[1], theta


def disk_inside(center, direction, r: float, t: float, params: PotentialParams,
                samples: int = 64, rings: int = 8) -> tuple[bool, float | None]:
    """Whether every sampled point of the disk of radius ``r`` lies in ``U_t``.

    Returns ``(inside, angle)``, where ``angle`` is the first boundary angle
    (or interior-ring angle) found outside.
    """
    if r == 0:
        return True, None
    z, w, theta = _disk_points(center, direction, r, samples, rings)
    bad = ~(phi_total(z, w, params) < t)
    if not bad.any():
        return True, None
    return False, float(theta[int(np.flatnonzero(bad)[0]) % samples])


def _bisect(center, direction, t, params, samples, rings, tol, r_max):
    lo, hi = 0.0, r_max
    ok, ang = disk_inside(center, direction, r_max, t, params, samples, rings)
    if ok:
        return r_max, None, True
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, a = disk_inside(center, direction, mid, t, params, samples, rings)
        if ok:
            lo = mid
        else:
            hi, ang = mid, a
    return lo, ang, False


def affine_disk_radius(center, direction, t: float, params: PotentialParams,
                       angular_samples: int = 64, tol: float = 1e-6, *, rings: int = 8,
                       r_max: float = 4.0) -> DiskProbeResult:
    """Largest sampled-certified radius of the affine disk inside ``U_t``.

    Bisection runs on the fixed bracket ``[0, r_max]``, so the result is
    monotone in ``t``.  The returned radius is re-checked with four times the
    angular samples; if that fails the bisection is redone at that density.
    """
    center = (complex(center[0]), complex(center[1]))
    direction = (complex(direction[0]), complex(direction[1]))
    norm = math.hypot(abs(direction[0]), abs(direction[1]))
    if abs(norm - 1) > 1e-9:
        raise ValueError(f"direction must be a unit vector, got norm {norm}")
    if not phi_total(center[0], center[1], params) < t:
        raise CenterOutside(f"center {center} is not in U_{t}")
    r, ang, capped = _bisect(center, direction, t, params, angular_samples, rings, tol, r_max)
    if not disk_inside(center, direction, r, t, params, 4 * angular_samples, rings)[0]:
        r, ang, capped = _bisect(center, direction, t, params, 4 * angular_samples, rings, tol, r)
    return DiskProbeResult(center, direction, r, angular_samples, ang, capped)


def box_cells(re_half: float, im_half: float) -> list[tuple[int, int]]:
    """Unit lattice cells meeting the box, ordered by the spiral index of their corner."""
    xs = range(math.floor(-re_half), math.ceil(re_half))
    ys = range(math.floor(-im_half), math.ceil(im_half))
    return sorted(((x, y) for x in xs for y in ys), key=lambda c: spiral_index(*c))


def _probe_point(seed: int, cell: tuple[int, int], j: int, params: PotentialParams,
                 re_half: float, im_half: float):
    rng = np.random.default_rng([seed, spiral_index(*cell), j])
    x0, x1 = max(cell[0], -re_half), min(cell[0] + 1, re_half)
    y0, y1 = max(cell[1], -im_half), min(cell[1] + 1, im_half)
    z = complex(rng.uniform(x0, x1), rng.uniform(y0, y1))
    sheets = sheet_values(z, params.level, params.sched)
    w = complex(sheets[int(rng.integers(len(sheets)))])
    g = rng.normal(size=4)
    g /= np.linalg.norm(g)
    return (z, w), (complex(g[0], g[1]), complex(g[2], g[3]))


@dataclass(frozen=True)
class R0Estimate:
    r0_hat: float
    argmax: DiskProbeResult
    probes: int


def empirical_r0(t: float, params: PotentialParams, centers: int, seed: int, *,
                 re_half: float = 10.0, im_half: float = 10.0, angular_samples: int = 64,
                 tol: float = 1e-4) -> R0Estimate:
    """Maximum affine-disk radius over seeded random probes on ``E_n``.

    Probe ``i`` goes to the ``(i mod C)``-th of the ``C`` box cells in spiral
    order, so cells nearest the origin are probed first.  Its centre (a
    uniform point of the cell on a uniform sheet) and its direction come
    from a generator keyed by the seed, the cell and the probe's rank in
    that cell.  Hence more centres give a superset of probes, and enlarging
    the box at fixed probes per cell keeps every earlier probe.
    """
    if centers < 1:
        raise ValueError("centers must be >= 1")
    cells = box_cells(re_half, im_half)
    best = None
    for i in range(int(centers)):
        cell = cells[i % len(cells)]
        c, d = _probe_point(seed, cell, i // len(cells), params, re_half, im_half)
        res = affine_disk_radius(c, d, t, params, angular_samples, tol)
        if best is None or res.radius > best.radius:
            best = res
    return R0Estimate(best.radius, best, int(centers))


def kobayashi_lower_bound(zeta1, zeta2, r0: float) -> float:
    """Euclidean distance divided by ``r0``."""
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    d = math.hypot(abs(complex(zeta1[0]) - complex(zeta2[0])), abs(complex(zeta1[1]) - complex(zeta2[1])))
    return d / r0
