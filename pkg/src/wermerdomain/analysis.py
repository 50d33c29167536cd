"""Finite-difference Levi forms, Lelong ratios and Monte Carlo volumes.

Scalar fields on C^2 are callables ``f(z, w) -> ndarray`` taking broadcast
complex arrays.  Points are ``(z, w)`` pairs; boxes in R^4 are four
``(lo, hi)`` intervals ordered ``(Re z, Im z, Re w, Im w)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import StencilHitsSingularity, TooCloseToVariety
from .lattice import EpsilonSchedule
from .potentials import PointClass, PotentialParams, classify_point, phi_tilde, phi_total
from .wermer import sheet_values

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

__all__ = [
    "HessianEstimate",
    "fd_complex_hessian",
    "fd_complex_hessian_batch",
    "LeviResult",
    "levi_check",
    "levi_check_batch",
    "distance_to_variety",
    "RatioProfile",
    "lelong_ratio_profile",
    "VolumeEstimate",
    "uniform_box_samples",
    "mc_volume",
    "sublevel_decay_profile",
    "DomainSample",
    "sample_in_A",
    "phi_regular_part",
    "regular_zero_point",
]

# complex directions whose line Laplacians determine a 2x2 Hermitian form
_DIRS = np.array([[1, 0], [0, 1], [1, 1], [1, -1j]], dtype=complex)
_DIRS[2:] /= math.sqrt(2)
_ROT = np.array([1, -1, 1j, -1j])


@dataclass(frozen=True)
class HessianEstimate:
    """``matrix[i, j] ~ d^2 f / d zeta_i d conj(zeta_j)``."""

    matrix: np.ndarray
    step: float
    richardson_order: int

    @property
    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def _stencil(Z: np.ndarray, W: np.ndarray, h: float):
    # (P, 4 directions, 4 rotations)
    disp = h * _DIRS[:, None, :] * _ROT[None, :, None]  # (4, 4, 2)
    zs = Z[:, None, None] + disp[None, :, :, 0]
    ws = W[:, None, None] + disp[None, :, :, 1]
    return zs, ws


def _hessian_once(f: Field, Z, W, h):
    zs, ws = _stencil(Z, W, h)
    allz = np.concatenate([Z[:, None], zs.reshape(len(Z), -1)], axis=1)
    allw = np.concatenate([W[:, None], ws.reshape(len(W), -1)], axis=1)
    vals = np.asarray(f(allz, allw), dtype=float)
    bad = ~np.isfinite(vals)
    centre, ring = vals[:, 0], vals[:, 1:].reshape(len(Z), 4, 4)
    with np.errstate(invalid="ignore"):  # non-finite stencils are flagged in ``bad``
        q = (ring.sum(axis=2) - 4 * centre[:, None]) / (4 * h * h)
    H = np.empty((len(Z), 2, 2), dtype=complex)
    H[:, 0, 0] = q[:, 0]
    H[:, 1, 1] = q[:, 1]
    mean = 0.5 * (q[:, 0] + q[:, 1])
    H[:, 0, 1] = (q[:, 2] - mean) + 1j * (mean - q[:, 3])
    H[:, 1, 0] = np.conj(H[:, 0, 1])
    return H, bad.any(axis=1)


def fd_complex_hessian_batch(f: Field, Z, W, h: float = 1e-4, richardson: bool = True):
    """Complex Hessians at many points; returns ``(H, bad)``.

    ``H`` has shape ``(P, 2, 2)``; ``bad[p]`` flags a stencil that touched a
    non-finite value.  Each quadratic form ``v* H v`` comes from the
    five-point Laplacian of ``f`` along the complex line through the point
    in direction ``v``; four directions recover the Hermitian matrix
    (17 evaluations per step).  With ``richardson`` the steps ``h`` and
    ``h/2`` are combined to cancel the ``h**2`` error term.
    """
    Z = np.atleast_1d(np.asarray(Z, dtype=complex))
    W = np.atleast_1d(np.asarray(W, dtype=complex))
    H, bad = _hessian_once(f, Z, W, h)
    if richardson:
        H2, bad2 = _hessian_once(f, Z, W, h / 2)
        with np.errstate(invalid="ignore"):
            H = (4 * H2 - H) / 3
        bad = bad | bad2
    return H, bad


def fd_complex_hessian(f: Field, zeta, h: float = 1e-4, richardson: bool = True) -> HessianEstimate:
    z, w = zeta
    H, bad = fd_complex_hessian_batch(f, z, w, h, richardson)
    if bad[0]:
        raise StencilHitsSingularity(f"stencil of size {h} around {zeta} reached a singular value")
    return HessianEstimate(H[0], h, int(richardson))


def distance_to_variety(z, w, n: int, sched: EpsilonSchedule, grid: int = 256, iters: int = 40,
                        chunk: int = 64) -> np.ndarray:
    """Euclidean distance from ``(z, w)`` to ``E_n`` in C^2 (numerical).

    The vertical distance ``d_v`` bounds the true distance, so the nearest
    point of ``E_n`` has its ``z`` inside the disk of radius ``d_v``.  That
    disk is scanned on a fixed random grid and the best candidate refined by
    a shrinking compass search, vectorized over all points.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    rng = np.random.default_rng(12345)
    offs = np.concatenate([[0], np.sqrt(rng.random(grid)) * np.exp(2j * np.pi * rng.random(grid))])
    compass = np.exp(2j * np.pi * np.arange(8) / 8)
    out = np.empty(len(z))
    for s in range(0, len(z), chunk):
        zc, wc = z[s:s + chunk], w[s:s + chunk]

        def g(zp):
            hv = sheet_values(zp, n, sched)
            return np.abs(zp - zc[:, None]) ** 2 + np.min(np.abs(wc[:, None] - hv), axis=0) ** 2

        dv = np.min(np.abs(wc[None, :] - sheet_values(zc, n, sched)), axis=0)
        cand = zc[:, None] + dv[:, None] * offs[None, :]
        vals = g(cand)
        k = np.argmin(vals, axis=1)
        best = cand[np.arange(len(zc)), k]
        gbest = vals[np.arange(len(zc)), k]
        step = dv / math.sqrt(grid)
        for _ in range(iters):
            nb = best[:, None] + step[:, None] * compass[None, :]
            gv = g(nb)
            j = np.argmin(gv, axis=1)
            gj = gv[np.arange(len(zc)), j]
            better = gj < gbest
            best = np.where(better, nb[np.arange(len(zc)), j], best)
            gbest = np.where(better, gj, gbest)
            step = np.where(better, step, 0.5 * step)
        out[s:s + chunk] = np.sqrt(np.minimum(gbest, dv ** 2))
    return out


@dataclass(frozen=True)
class LeviResult:
    min_eig: float
    bound: float
    passed: bool
    distance: float = math.nan


def _phi_tilde_field(params: PotentialParams) -> Field:
    return lambda z, w: phi_tilde(z, w, params, strict=False)


def levi_check_batch(Z, W, params: PotentialParams, h: float = 1e-4, tol: float = 1e-2,
                     exclusion: float | None = None, distances=None) -> list[LeviResult]:
    """Compare ``lambda_min`` of the FD Levi form of ``phi_tilde`` with ``rho_tilde'``.

    Points closer than ``exclusion`` (default ``10 h``) to ``E_n`` raise
    :class:`TooCloseToVariety`; so do points outside ``U``.
    """
    Z = np.atleast_1d(np.asarray(Z, dtype=complex))
    W = np.atleast_1d(np.asarray(W, dtype=complex))
    exclusion = 10 * h if exclusion is None else exclusion
    cls = np.atleast_1d(classify_point(Z, W, params))
    if np.any((cls != PointClass.IN_A) & (cls != PointClass.IN_U_NOT_A)):
        raise TooCloseToVariety("levi_check needs points of U off the variety")
    if distances is None:
        distances = distance_to_variety(Z, W, params.level, params.sched)
    distances = np.atleast_1d(distances)
    if np.any(distances < exclusion):
        raise TooCloseToVariety(f"point within {exclusion} of E_{params.level}")
    H, bad = fd_complex_hessian_batch(_phi_tilde_field(params), Z, W, h)
    if np.any(bad):
        raise StencilHitsSingularity("Levi stencil left the domain of phi_tilde")
    lam = np.linalg.eigvalsh(H)[:, 0]
    _, d1, _ = params.rho_tilde.evaluate(np.abs(Z) ** 2 + np.abs(W) ** 2)
    return [LeviResult(float(l), float(b), bool(l >= b - tol), float(d))
            for l, b, d in zip(lam, np.atleast_1d(d1), distances)]


def levi_check(zeta, params: PotentialParams, h: float = 1e-4, tol: float = 1e-2) -> LeviResult:
    z, w = zeta
    return levi_check_batch(z, w, params, h, tol)[0]


@dataclass(frozen=True)
class RatioProfile:
    radii: np.ndarray
    ratios: np.ndarray
    errors: list = field(default_factory=list)


def _unit_directions(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rand = g[:, :2] + 1j * g[:, 2:]
    coord = np.array([[1, 0], [0, 1], [1j, 0], [0, 1j]], dtype=complex)
    return np.concatenate([rand, coord])


def lelong_ratio_profile(zeta0, f: Field, radii: Sequence[float], directions: int = 32,
                         seed: int = 0) -> RatioProfile:
    """``min_u f(zeta0 + r u) / log r`` for each radius (``u`` unit in C^2).

    Samples where ``f`` raises or is not finite are recorded in ``errors``
    as ``(radius, direction_index, reason)`` and left out of the minimum.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any((radii <= 0) | (radii >= 1)):
        raise ValueError("radii must lie in (0, 1)")
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    z0, w0 = zeta0
    U = _unit_directions(directions, seed)
    errors = []
    ratios = np.empty(len(radii))
    for i, r in enumerate(radii):
        zs, ws = z0 + r * U[:, 0], w0 + r * U[:, 1]
        try:
            vals = np.asarray(f(zs, ws), dtype=float)
        except Exception:
            vals = np.empty(len(U))
            for j in range(len(U)):
                try:
                    vals[j] = float(f(zs[j:j + 1], ws[j:j + 1])[0])
                except Exception as exc:  # recorded, never fatal
                    errors.append((float(r), j, type(exc).__name__))
                    vals[j] = np.nan
        ok = np.isfinite(vals)
        for j in np.flatnonzero(~ok):
            if not any(e[0] == r and e[1] == j for e in errors):
                errors.append((float(r), int(j), "non-finite"))
        ratios[i] = np.min(vals[ok] / math.log(r)) if ok.any() else np.nan
    return RatioProfile(radii, ratios, errors)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    hits: int = 0
    errors: int = 0


def _box(box) -> tuple[np.ndarray, np.ndarray]:
    b = np.asarray(box, dtype=float)
    if b.shape != (4, 2):
        raise ValueError("box must be four (lo, hi) pairs")
    lo, hi = b[:, 0], b[:, 1]
    if np.any(hi <= lo):
        raise ValueError("box is degenerate")
    return lo, hi


def uniform_box_samples(box, start: int, count: int, seed: int) -> np.ndarray:
    """Samples ``start .. start+count-1`` of the seeded stream, shape ``(count, 4)``.

    Sample ``i`` is built from the four 64-bit words of Philox block ``i``
    under key ``seed``, so any chunking reproduces the same points.
    """
    lo, hi = _box(box)
    bg = np.random.Philox(key=int(seed) & (2 ** 64 - 1), counter=int(start))
    raw = bg.random_raw(4 * count).reshape(count, 4)
    u = (raw >> np.uint64(11)).astype(float) * (1.0 / 9007199254740992.0)
    return lo + u * (hi - lo)


def _chunks(N: int, chunk: int):
    return [(s, min(chunk, N - s)) for s in range(0, N, chunk)]


def _count_chunk(pred, box, start, count, seed):
    pts = uniform_box_samples(box, start, count, seed)
    try:
        return int(np.count_nonzero(pred(pts))), 0
    except Exception:
        hits = errs = 0
        for p in pts:
            try:
                hits += bool(np.asarray(pred(p[None, :])).ravel()[0])
            except Exception:
                errs += 1
        return hits, errs


def mc_volume(pred: Callable[[np.ndarray], np.ndarray], box, N: int, seed: int, *,
              chunk: int = 1 << 18, threads: int = 1) -> VolumeEstimate:
    """Hit-or-miss Lebesgue measure of ``{x in box : pred(x)}`` in R^4.

    ``pred`` receives an ``(m, 4)`` array and returns a boolean array.
    Predicate exceptions count as misses and are tallied in ``errors``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lo, hi = _box(box)
    vol = float(np.prod(hi - lo))
    jobs = _chunks(int(N), chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            res = list(ex.map(lambda j: _count_chunk(pred, box, j[0], j[1], seed), jobs))
    else:
        res = [_count_chunk(pred, box, s, c, seed) for s, c in jobs]
    hits = sum(r[0] for r in res)
    errs = sum(r[1] for r in res)
    p = hits / N
    return VolumeEstimate(vol * p, vol * math.sqrt(p * (1 - p) / N), int(N), int(seed), hits, errs)


def sublevel_decay_profile(K, a: float, deltas: Sequence[float], params: PotentialParams, N: int,
                           seed: int, *, chunk: int = 1 << 16, threads: int = 1) -> list[VolumeEstimate]:
    """Volumes of ``{zeta in K cap A : phi_tilde(zeta) <= -a/delta}``.

    Every delta is estimated from the same seeded sample stream, so each
    entry equals ``mc_volume`` of its own predicate with that seed; the
    potentials are simply evaluated once per sample.
    """
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0) or np.any(np.diff(deltas) >= 0):
        raise ValueError("deltas must be positive and strictly decreasing")
    if not a > 0:
        raise ValueError("a must be positive")
    lo, hi = _box(K)
    vol = float(np.prod(hi - lo))
    levels = -a / deltas

    def work(job):
        start, count = job
        pts = uniform_box_samples(K, start, count, seed)
        z = pts[:, 0] + 1j * pts[:, 1]
        w = pts[:, 2] + 1j * pts[:, 3]
        phi = phi_total(z, w, params)
        inside = phi < params.t_U
        pt = np.full(count, np.inf)
        with np.errstate(invalid="ignore", divide="ignore"):
            pt[inside] = phi_tilde(z[inside], w[inside], params, strict=False)
        inA = inside & (pt < params.t_A)
        return np.array([np.count_nonzero(inA & (pt <= lv)) for lv in levels])

    jobs = _chunks(int(N), chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            counts = sum(ex.map(work, jobs))
    else:
        counts = sum(work(j) for j in jobs)
    out = []
    for c in np.atleast_1d(counts):
        p = int(c) / N
        out.append(VolumeEstimate(vol * p, vol * math.sqrt(p * (1 - p) / N), int(N), int(seed), int(c)))
    return out


@dataclass(frozen=True)
class DomainSample:
    z: np.ndarray
    w: np.ndarray
    distance: np.ndarray
    tries: int


def sample_in_A(params: PotentialParams, count: int, seed: int, *, z_center: complex = 0j,
                z_radius: float = 0.05, w_spread: float = 0.1, exclusion: float = 1e-3,
                ball: tuple[complex, complex] | None = None, max_tries: int = 200_000,
                batch: int = 4096) -> DomainSample:
    """Seeded points of ``A`` at distance ``>= exclusion`` from ``E_n``.

    Candidates take ``z`` uniform in the disk ``|z - z_center| < z_radius``
    and ``w`` uniform within ``w_spread`` of a uniformly chosen sheet over
    ``z``.  With ``ball`` only points of the unit ball around that centre
    are kept.  Fewer than ``count`` points may be returned if ``max_tries``
    candidates run out.
    """
    rng = np.random.default_rng(seed)
    zs, ws, ds = [], [], []
    tries = 0
    n = params.level
    while sum(len(a) for a in zs) < count and tries < max_tries:
        m = min(batch, max_tries - tries)
        tries += m
        z = z_center + z_radius * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
        sheets = sheet_values(z, n, params.sched)
        idx = rng.integers(sheets.shape[0], size=m)
        w = sheets[idx, np.arange(m)] + w_spread * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
        keep = np.asarray(classify_point(z, w, params)) == PointClass.IN_A
        if ball is not None:
            keep &= np.abs(z - ball[0]) ** 2 + np.abs(w - ball[1]) ** 2 < 1.0
        vert = np.min(np.abs(w[None, :] - sheets), axis=0)
        keep &= vert >= exclusion
        if not keep.any():
            continue
        zk, wk = z[keep], w[keep]
        for s in range(0, len(zk), 64):
            need = count - sum(len(a) for a in zs)
            if need <= 0:
                break
            d = distance_to_variety(zk[s:s + 64], wk[s:s + 64], n, params.sched)
            ok = d >= exclusion
            zs.append(zk[s:s + 64][ok])
            ws.append(wk[s:s + 64][ok])
            ds.append(d[ok])
    Z = np.concatenate(zs)[:count] if zs else np.zeros(0, complex)
    W = np.concatenate(ws)[:count] if ws else np.zeros(0, complex)
    D = np.concatenate(ds)[:count] if ds else np.zeros(0)
    return DomainSample(Z, W, D, tries)


def phi_regular_part(z: complex, sigma, n: int, sched: EpsilonSchedule) -> float:
    """``lim (phi_n(z, w) - 2**-n log|w - W_sigma(z)|)`` as ``w -> W_sigma(z)``.

    This is the constant that biases the finite-radius Lelong ratio of
    ``phi_n`` at a regular point: the ratio is ``2**-n + A / log r`` to
    leading order.
    """
    vals = sheet_values(complex(z), n, sched)
    idx = sigma.index if hasattr(sigma, "index") else int(sigma)
    d = np.abs(np.delete(vals, idx) - vals[idx])
    return float(np.sum(np.log(d)) / 2 ** n)


def regular_zero_point(n: int, sched: EpsilonSchedule, sigma=0, *, im: float = 0.5,
                       x_max: float = 1e4) -> complex:
    """A point ``x + i*im`` (``x > 0``) where :func:`phi_regular_part` vanishes."""
    from scipy.optimize import brentq

    f = lambda x: phi_regular_part(complex(x, im), sigma, n, sched)
    xs = np.geomspace(0.5, x_max, 200)
    vals = np.array([f(x) for x in xs])
    sign = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if len(sign) == 0:
        raise ValueError("regular part has no zero on the search line")
    i = int(sign[0])
    return complex(brentq(f, xs[i], xs[i + 1], xtol=1e-12), im)
