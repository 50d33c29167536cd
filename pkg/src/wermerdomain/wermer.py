"""Branches of ``sum_k eps_k sqrt(z - a_k)`` and the finite-stage potentials.

A point of the finite-stage variety ``E_n`` over ``z`` is selected by a sign
vector ``sigma``; its height is ``sum_k sigma_k eps_k s_k(z)`` where ``s_k`` is
the principal square root of ``z - a_k`` (cut along the nonpositive real
radicand axis, ``Im >= 0`` on the cut itself).

Sheet indices order labels lexicographically with ``+`` before ``-`` and
``sigma_1`` most significant, so every depth-``d`` prefix cluster of a slice
is a contiguous block of ``2**(n-d)`` entries.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptySet, LevelTooLarge, PoleHit
from .lattice import DEFAULT_SCHEDULE, EpsilonSchedule, epsilons, poles

N_MAX = 22
# levels expanded in one vectorised block inside the recursive evaluator
_VECTOR_LEVELS = 10
_EPS = np.finfo(float).eps

__all__ = [
    "N_MAX",
    "SheetLabel",
    "SliceSet",
    "ClusterCertificate",
    "sqrt_branch",
    "branch_terms",
    "sheet_value",
    "sheet_values",
    "sign_matrix",
    "slice_points",
    "distinct_slice_count",
    "phi_n",
    "hausdorff_distance",
    "cluster_certificate",
    "on_variety_tolerance",
]


@dataclass(frozen=True)
class SheetLabel:
    """Sign vector ``sigma`` in ``{+1, -1}**n``; ``signs[k-1]`` is ``sigma_k``."""

    signs: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"sheet label entries must be +1/-1, got {self.signs}")

    @classmethod
    def of(cls, signs: Iterable[int]) -> "SheetLabel":
        return cls(tuple(int(s) for s in signs))

    @classmethod
    def plus(cls, n: int) -> "SheetLabel":
        return cls((1,) * n)

    @classmethod
    def from_index(cls, index: int, n: int) -> "SheetLabel":
        if not 0 <= index < 2 ** n:
            raise ValueError(f"index {index} out of range for level {n}")
        return cls(tuple(1 - 2 * ((index >> (n - k)) & 1) for k in range(1, n + 1)))

    @property
    def index(self) -> int:
        i = 0
        for s in self.signs:
            i = (i << 1) | (s < 0)
        return i

    def __len__(self) -> int:
        return len(self.signs)

    def __neg__(self) -> "SheetLabel":
        return SheetLabel(tuple(-s for s in self.signs))

    def flip(self, position: int) -> "SheetLabel":
        """Flip the sign at 1-based ``position``."""
        s = list(self.signs)
        s[position - 1] = -s[position - 1]
        return SheetLabel(tuple(s))

    def split(self, m: int) -> tuple["SheetLabel", "SheetLabel"]:
        return SheetLabel(self.signs[:m]), SheetLabel(self.signs[m:])

    def __add__(self, other: "SheetLabel") -> "SheetLabel":
        return SheetLabel(self.signs + other.signs)

    def differing(self, other: "SheetLabel") -> list[int]:
        """1-based positions where the two labels disagree."""
        if len(self) != len(other):
            raise ValueError("labels have different lengths")
        return [k + 1 for k, (a, b) in enumerate(zip(self.signs, other.signs)) if a != b]

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


def _principal_sqrt(r):
    r = np.asarray(r, dtype=complex)
    # -0.0 imaginary parts would put the value on the lower lip of the cut
    r = np.where(r.imag == 0, r.real + 0j, r)
    return np.sqrt(r)


def sqrt_branch(z: complex, k: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE) -> complex:
    """Principal ``sqrt(z - a_k)``.

    ``sched`` is accepted for signature symmetry with the other branch
    helpers; the value does not depend on it.
    """
    a = poles(k)[k - 1]
    if complex(z) == a:
        raise PoleHit(f"z={z} coincides with a_{k}={a}")
    return complex(_principal_sqrt(complex(z) - a))


def branch_terms(z, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, start: int = 1) -> np.ndarray:
    """``eps_k * s_k(z)`` for ``k = start..n``; shape ``(n-start+1,) + z.shape``."""
    z = np.asarray(z, dtype=complex)
    a = poles(n, start)
    radicand = z[None, ...] - a.reshape((-1,) + (1,) * z.ndim)
    if np.any(radicand == 0):
        k = start + int(np.argwhere(radicand == 0)[0][0])
        raise PoleHit(f"z hits pole a_{k}={poles(k)[k - 1]}")
    eps = epsilons(n, sched, start).reshape((-1,) + (1,) * z.ndim)
    return eps * _principal_sqrt(radicand)


def sheet_value(z: complex, sigma: SheetLabel | Sequence[int], sched: EpsilonSchedule = DEFAULT_SCHEDULE,
                start: int = 1) -> complex:
    """``sum_k sigma_k eps_k s_k(z)`` over ``k = start .. start+len(sigma)-1``."""
    signs = sigma.signs if isinstance(sigma, SheetLabel) else tuple(sigma)
    n = start + len(signs) - 1
    t = branch_terms(complex(z), n, sched, start)
    total = 0j
    for s, tk in zip(signs, t):
        total += s * tk
    return complex(total)


def _expand(terms: np.ndarray) -> np.ndarray:
    """All signed sums of ``terms`` (axis 0) in sheet-index order."""
    vals = np.zeros((1,) + terms.shape[1:], dtype=complex)
    for t in terms:
        vals = np.stack([vals + t, vals - t], axis=1).reshape((-1,) + terms.shape[1:])
    return vals


def sheet_values(z, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, start: int = 1) -> np.ndarray:
    """All ``2**(n-start+1)`` sheet heights over ``z`` (sheet axis first)."""
    if n - start + 1 > N_MAX:
        raise LevelTooLarge(f"window of width {n - start + 1} exceeds n_max={N_MAX}")
    return _expand(branch_terms(z, n, sched, start))


def sign_matrix(n: int) -> np.ndarray:
    """Rows are the sign vectors in sheet-index order."""
    return np.array(list(itertools.product((1, -1), repeat=n)), dtype=float).reshape(-1, n)


@dataclass(frozen=True)
class SliceSet:
    """The ``2**n`` heights of ``E_n`` above ``z0``.

    ``cluster_gap[d]`` (``d = 0..n-1``) is ``2|t_{d+1}| - 2 max_{x in T}|x|``
    where ``t_k = eps_k s_k(z0)`` and ``T`` is the set of signed tail sums over
    ``k > d+1``.  It is a lower bound for the distance between the two child
    clusters produced by the split at level ``d+1``; positive means disjoint.
    """

    z0: complex
    level: int
    points: np.ndarray
    cluster_gap: np.ndarray

    def label(self, index: int) -> SheetLabel:
        return SheetLabel.from_index(index, self.level)

    def __len__(self) -> int:
        return len(self.points)


def slice_points(z0: complex, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, *,
                 n_max: int = N_MAX) -> SliceSet:
    if n < 1:
        raise ValueError("level must be >= 1")
    if n > n_max:
        raise LevelTooLarge(f"level {n} exceeds n_max={n_max}")
    t = branch_terms(complex(z0), n, sched)
    pts = _expand(t)
    gap = np.empty(n)
    tail = np.zeros(1, dtype=complex)
    for d in range(n - 1, -1, -1):
        gap[d] = 2 * abs(t[d]) - 2 * float(np.max(np.abs(tail)))
        tail = np.concatenate([tail + t[d], tail - t[d]])
    return SliceSet(complex(z0), n, pts, gap)


def _mp_epsilon(k: int, sched: EpsilonSchedule):
    if hasattr(sched, "values") and k <= len(sched.values):
        return mpmath.mpf(sched.values[k - 1])
    return mpmath.exp(mpmath.mpf(sched.log_epsilon(k)))


def distinct_slice_count(z0: complex, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE,
                         extra_digits: int = 25) -> int:
    """Count distinct heights of the slice in high-precision arithmetic.

    Double precision cannot separate sheets once ``eps_k`` drops below the
    unit roundoff of the heights, so the slice is rebuilt with mpmath at a
    working precision that resolves ``eps_n``.
    """
    dps = extra_digits + int(math.ceil(max(-sched.log_epsilon(k) for k in range(1, n + 1)) / math.log(10)))
    a = poles(n)
    with mpmath.workdps(dps):
        zz = mpmath.mpc(complex(z0).real, complex(z0).imag)
        terms = []
        for k in range(1, n + 1):
            r = zz - mpmath.mpc(a[k - 1].real, a[k - 1].imag)
            if r == 0:
                raise PoleHit(f"z0 hits a_{k}")
            terms.append(_mp_epsilon(k, sched) * mpmath.sqrt(r))
        vals = [mpmath.mpc(0)]
        for tk in terms:
            vals = [v + s * tk for v in vals for s in (1, -1)]
        keys = sorted((v.real, v.imag) for v in vals)
    return 1 + sum(1 for p, q in zip(keys, keys[1:]) if p != q)


def on_variety_tolerance(w, terms: np.ndarray, n: int) -> np.ndarray:
    """Factor magnitude below which a point is treated as lying on ``E_n``.

    Heights are accurate only to a few ulps of ``|w| + sum |t_k|``; any factor
    below that resolution is indistinguishable from an exact root.
    """
    scale = np.abs(w) + np.sum(np.abs(terms), axis=0)
    return np.maximum(1e-300, 4 * (n + 1) * _EPS * scale)


def _phi_recursive(W: np.ndarray, terms: np.ndarray, k: int, tiny: np.ndarray):
    """Return (phi_k at the shifted heights W, on-variety mask)."""
    if k <= _VECTOR_LEVELS:
        shifts = _expand(terms[1:k])
        base = W[None, :] - shifts
        with np.errstate(divide="ignore"):
            fm = np.abs(base - terms[0][None, :])
            fp = np.abs(base + terms[0][None, :])
            val = 0.5 * (np.log(fm) + np.log(fp))
        hit = np.any((fm <= tiny) | (fp <= tiny), axis=0)
        return np.mean(val, axis=0), hit
    t = terms[k - 1]
    lo, hit_lo = _phi_recursive(W - t, terms, k - 1, tiny)
    hi, hit_hi = _phi_recursive(W + t, terms, k - 1, tiny)
    return 0.5 * (lo + hi), hit_lo | hit_hi


def _phi_direct(w: np.ndarray, terms: np.ndarray, n: int, tiny: np.ndarray):
    roots = np.einsum("sk,kp->sp", sign_matrix(n), terms)
    with np.errstate(divide="ignore"):
        f = np.abs(w[None, :] - roots)
        val = np.mean(np.log(f), axis=0)
    return val, np.any(f <= tiny, axis=0)


def phi_n(z, w, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, mode: str = "recursive", *,
          n_max: int = N_MAX, chunk: int = 1 << 14):
    """``2**-n log|P_n(z, w)|``, vectorised over broadcast ``z`` and ``w``.

    ``mode="recursive"`` uses the split
    ``phi_n(z, w) = (phi_{n-1}(z, w - t_n) + phi_{n-1}(z, w + t_n)) / 2``;
    ``mode="direct"`` enumerates all ``2**n`` roots and is kept as an
    independent check.  Points on ``E_n`` give ``-inf``.
    """
    if n < 1:
        raise ValueError("level must be >= 1")
    if n > n_max:
        raise LevelTooLarge(f"level {n} exceeds n_max={n_max}")
    if mode not in ("recursive", "direct"):
        raise ValueError(f"unknown mode {mode!r}")
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    shape = z.shape
    zf, wf = z.ravel(), w.ravel()
    out = np.empty(zf.shape, dtype=float)
    width = 2 ** min(n - 1, _VECTOR_LEVELS - 1) if mode == "recursive" else 2 ** n
    step = max(1, min(chunk, (1 << 22) // width))
    for i in range(0, zf.size, step):
        zc, wc = zf[i:i + step], wf[i:i + step]
        terms = branch_terms(zc, n, sched)
        tiny = on_variety_tolerance(wc, terms, n)
        if mode == "recursive":
            val, hit = _phi_recursive(wc, terms, n, tiny)
        else:
            val, hit = _phi_direct(wc, terms, n, tiny)
        out[i:i + step] = np.where(hit, -np.inf, val)
    if not shape:
        return float(out[0])
    return out.reshape(shape)


def _as_points(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex).ravel()
    if A.size == 0:
        raise EmptySet("Hausdorff distance needs nonempty sets")
    return np.column_stack([A.real, A.imag])


def hausdorff_distance(A, B) -> float:
    """Symmetric Hausdorff distance between two finite subsets of C."""
    a, b = _as_points(A), _as_points(B)
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


@dataclass(frozen=True)
class ClusterCertificate:
    valid: bool
    worst_depth: int
    margin: float


def cluster_certificate(z0: complex, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, *,
                        required_margin: float = 0.0, n_max: int = N_MAX) -> ClusterCertificate:
    """Check that every binary split of the slice separates its children.

    At depth ``d`` the two children are translates of the same tail set by
    ``+-t_{d+1}``, so they are disjoint once
    ``2|t_{d+1}| > 2 sum_{k>d+1} |t_k|``.  ``margin`` is the smallest slack
    over all depths and ``worst_depth`` where it occurs.
    """
    if n > n_max:
        raise LevelTooLarge(f"level {n} exceeds n_max={n_max}")
    mags = np.abs(branch_terms(complex(z0), n, sched))
    tails = np.concatenate([np.cumsum(mags[::-1])[::-1][1:], [0.0]])
    slack = 2 * mags - 2 * tails
    d = int(np.argmin(slack))
    margin = float(slack[d])
    return ClusterCertificate(bool(margin > required_margin), d, margin)
