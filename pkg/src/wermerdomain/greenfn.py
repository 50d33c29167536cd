"""Lower comparison functions for the pluricomplex Green function of ``A``.

``u = delta * phi_tilde + chi(zeta - zeta_k) log ||zeta - zeta_k||`` is
negative on ``A`` and has a logarithmic pole at ``zeta_k``.  It is
plurisubharmonic once ``delta * rho_tilde'`` beats the negative part ``C1``
of the Levi form of ``chi log ||.||^2``; :func:`psh_certificate` checks this
numerically on samples.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import fd_complex_hessian_batch, sample_in_A
from .errors import OutsideDomainOfDefinition
from .potentials import PotentialParams, phi_tilde

log = logging.getLogger(__name__)

__all__ = [
    "CutoffProfile",
    "chi_cutoff",
    "c1_estimate",
    "u_delta_k",
    "PshCertificate",
    "psh_certificate",
    "scan_green_threshold",
]


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff: 1 for ``||zeta|| <= inner``, 0 for ``||zeta|| >= outer``."""

    inner: float = 0.5
    outer: float = 1.0

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")


def _flat(x):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def chi_radial(r, profile: CutoffProfile = CutoffProfile()):
    """The cutoff as a function of the radius; smooth with all derivatives."""
    x = (np.asarray(r, dtype=float) - profile.inner) / (profile.outer - profile.inner)
    a, b = _flat(1 - x), _flat(x)
    return a / (a + b)


def chi_cutoff(zeta, profile: CutoffProfile = CutoffProfile()):
    z, w = zeta
    r = np.sqrt(np.abs(np.asarray(z)) ** 2 + np.abs(np.asarray(w)) ** 2)
    out = chi_radial(r, profile)
    return float(out) if np.ndim(out) == 0 else out


def _chi_log(profile):
    def f(z, w):
        s = np.abs(z) ** 2 + np.abs(w) ** 2
        with np.errstate(divide="ignore"):
            return chi_radial(np.sqrt(s), profile) * np.log(s)
    return f


def c1_estimate(profile: CutoffProfile = CutoffProfile(), grid_density: int = 64, h: float = 1e-4,
                margin: float = 0.1) -> float:
    """Numerical ``C1`` with ``i ddbar(chi log||.||^2) >= -C1 i ddbar||.||^2``.

    The Levi form is estimated on ``grid_density`` radii spanning the
    annulus ``1/4 <= ||zeta|| <= 5/4``, each in four fixed directions
    (the field is radial, so these are consistency checks).  The result
    carries a relative safety ``margin``.
    """
    radii = np.linspace(0.25, 1.25, grid_density)
    dirs = np.array([[1, 0], [0, 1], [1, 1j], [0.6, 0.8j]], dtype=complex)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    Z = (radii[:, None] * dirs[None, :, 0]).ravel()
    W = (radii[:, None] * dirs[None, :, 1]).ravel()
    H, bad = fd_complex_hessian_batch(_chi_log(profile), Z, W, h)
    if bad.any():
        log.warning("c1_estimate: %d stencils excluded", int(bad.sum()))
    lam = np.linalg.eigvalsh(H[~bad])[:, 0]
    return (1 + margin) * max(0.0, -float(lam.min()))


def u_delta_k(zeta, delta: float, zeta_k, params: PotentialParams,
              profile: CutoffProfile = CutoffProfile(), *, strict: bool = True):
    """``delta * phi_tilde(zeta) + chi(zeta - zeta_k) * log||zeta - zeta_k||``."""
    z, w = np.asarray(zeta[0], dtype=complex), np.asarray(zeta[1], dtype=complex)
    base = delta * np.asarray(phi_tilde(z, w, params, strict=False))
    if strict and np.any(np.isnan(base)):
        raise OutsideDomainOfDefinition("phi_total >= 0 at some requested point")
    d2 = np.abs(z - zeta_k[0]) ** 2 + np.abs(w - zeta_k[1]) ** 2
    chi = chi_radial(np.sqrt(d2), profile)
    with np.errstate(divide="ignore", invalid="ignore"):
        extra = np.where(chi > 0, chi * 0.5 * np.log(np.where(d2 > 0, d2, 1.0)), 0.0)
        extra = np.where(d2 == 0, -np.inf, extra)
    out = base + extra
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PshCertificate:
    pass_fraction: float
    samples: int
    c1: float
    failures: list = field(default_factory=list)
    psh_fraction: float = math.nan


def psh_certificate(delta: float, zeta_k, params: PotentialParams, samples: int = 200, h: float = 1e-4,
                    tol: float = 1e-2, *, seed: int = 0, c1: float | None = None,
                    profile: CutoffProfile = CutoffProfile(), z_radius: float = 1.0,
                    w_spread: float = 0.1, max_tries: int = 100_000) -> PshCertificate:
    """Fraction of samples of ``A`` near ``zeta_k`` meeting the Levi lower bound.

    A sample passes when ``lambda_min`` of the FD Levi form of ``u`` is at
    least ``delta * rho_tilde'(||zeta||^2) - C1 - tol``.  ``psh_fraction``
    reports how often ``lambda_min >= -tol`` holds outright.  Failures are
    listed as ``(z, w, lambda_min, bound)``.
    """
    c1 = c1_estimate(profile) if c1 is None else c1
    zk = (complex(zeta_k[0]), complex(zeta_k[1]))
    smp = sample_in_A(params, samples, seed, z_center=zk[0], z_radius=z_radius, w_spread=w_spread,
                      exclusion=10 * h, ball=zk, max_tries=max_tries)
    far = np.abs(smp.z - zk[0]) ** 2 + np.abs(smp.w - zk[1]) ** 2 >= (10 * h) ** 2
    Z, W = smp.z[far], smp.w[far]
    if len(Z) == 0:
        return PshCertificate(math.nan, 0, c1)
    f = lambda z, w: u_delta_k((z, w), delta, zk, params, profile, strict=False)
    H, bad = fd_complex_hessian_batch(f, Z, W, h)
    lam = np.full(len(Z), np.nan)
    if (~bad).any():
        lam[~bad] = np.linalg.eigvalsh(H[~bad])[:, 0]
    _, d1, _ = params.rho_tilde.evaluate(np.abs(Z) ** 2 + np.abs(W) ** 2)
    bound = delta * d1 - c1
    ok = ~bad & (lam >= bound - tol)
    failures = [(complex(Z[i]), complex(W[i]), float(lam[i]), float(bound[i]))
                for i in np.flatnonzero(~ok)]
    for i in np.flatnonzero(bad):
        log.info("psh_certificate: stencil error at (%s, %s)", Z[i], W[i])
    psh = float(np.mean(~bad & (lam >= -tol)))
    return PshCertificate(float(ok.mean()), int(len(Z)), c1, failures, psh)


def scan_green_threshold(delta: float, centers, params: PotentialParams, samples: int = 200,
                         h: float = 1e-4, tol: float = 1e-2, *, seed: int = 0, level: float = 0.99,
                         c1: float | None = None, **kw) -> dict:
    """Certificates along a list of centres and the empirical norm threshold.

    The threshold is the smallest centre norm beyond which every certificate
    that found samples reaches ``level``; NaN if none qualifies.
    """
    c1 = c1_estimate() if c1 is None else c1
    rows = []
    for i, ck in enumerate(centers):
        cert = psh_certificate(delta, ck, params, samples, h, tol, seed=seed + i, c1=c1, **kw)
        norm = math.hypot(abs(complex(ck[0])), abs(complex(ck[1])))
        rows.append({"norm": norm, "z": complex(ck[0]), "w": complex(ck[1]),
                     "pass_fraction": cert.pass_fraction, "psh_fraction": cert.psh_fraction,
                     "samples": cert.samples})
    rows.sort(key=lambda r: r["norm"])
    threshold = math.nan
    for r in reversed([r for r in rows if r["samples"] > 0]):
        if r["pass_fraction"] >= level:
            threshold = r["norm"]
        else:
            break
    return {"c1": c1, "threshold": threshold, "rows": rows}
