"""Path lifting on the finite-stage varieties and the walk between points.

A level window ``m..n`` selects the partial sums
``w = sum_{k=m}^{n} sigma_k eps_k sqrt(z - a_k)``.  Lifting a planar curve
continues every square root along it; the resulting sheet label is read
relative to the principal branch at the end point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (ClearanceViolation, MultiplePolesEnclosed, StepCollapse, TailTooLarge,
                     WermerError)
from .lattice import DEFAULT_SCHEDULE, EpsilonSchedule, epsilons, poles, tail_delta_bound
from .wermer import N_MAX, SheetLabel, _principal_sqrt, sheet_value, sheet_values

__all__ = [
    "PlanarCurve",
    "LevelWindow",
    "LiftResult",
    "MonodromyAction",
    "DecompositionCertificate",
    "WalkResult",
    "lift_curve",
    "lasso",
    "monodromy_loop",
    "connect_sheets",
    "midline_route",
    "decompose_levels",
    "match_label",
    "walk_to_point",
]

MIN_STEP = 1e-12


def _segment_clearance(p0: complex, p1: complex) -> float:
    """Distance from the segment ``[p0, p1]`` to ``Z + iZ``."""
    length = abs(p1 - p0)
    pieces = max(1, int(math.ceil(length)))
    best = math.inf
    for i in range(pieces):
        a = p0 + (p1 - p0) * i / pieces
        b = p0 + (p1 - p0) * (i + 1) / pieces
        xs = np.arange(math.floor(min(a.real, b.real)) - 1, math.ceil(max(a.real, b.real)) + 2)
        ys = np.arange(math.floor(min(a.imag, b.imag)) - 1, math.ceil(max(a.imag, b.imag)) + 2)
        g = (xs[:, None] + 1j * ys[None, :]).ravel()
        d = b - a
        if d == 0:
            dist = np.abs(g - a)
        else:
            t = np.clip(((g - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
            dist = np.abs(g - (a + t * d))
        best = min(best, float(dist.min()))
    return best


@dataclass(frozen=True)
class PlanarCurve:
    """Polyline in the z-plane; ``clearance`` is its distance to ``Z + iZ``."""

    vertices: np.ndarray
    clearance: float = field(init=False)

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.vertices, dtype=complex)).copy()
        if v.size == 0:
            raise ValueError("a curve needs at least one vertex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if len(v) == 1:
            c = _segment_clearance(v[0], v[0])
        else:
            c = min(_segment_clearance(a, b) for a, b in zip(v[:-1], v[1:]))
        object.__setattr__(self, "clearance", c)

    @property
    def start(self) -> complex:
        return complex(self.vertices[0])

    @property
    def end(self) -> complex:
        return complex(self.vertices[-1])

    @property
    def closed(self) -> bool:
        return self.start == self.end

    def then(self, other: "PlanarCurve") -> "PlanarCurve":
        if other.start != self.end:
            raise ValueError("curves do not join")
        return PlanarCurve(np.concatenate([self.vertices, other.vertices[1:]]))

    def reversed(self) -> "PlanarCurve":
        return PlanarCurve(self.vertices[::-1])

    def repeated(self, times: int) -> "PlanarCurve":
        if not self.closed:
            raise ValueError("only closed curves can be repeated")
        out = self
        for _ in range(times - 1):
            out = out.then(self)
        return out

    def length(self) -> float:
        return float(np.abs(np.diff(self.vertices)).sum())


@dataclass(frozen=True)
class LevelWindow:
    m: int
    n: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValueError(f"level window needs 1 <= m <= n, got ({self.m}, {self.n})")
        if self.width > N_MAX:
            raise ValueError(f"window width {self.width} exceeds {N_MAX}")

    @property
    def width(self) -> int:
        return self.n - self.m + 1

    def levels(self) -> range:
        return range(self.m, self.n + 1)


@dataclass(frozen=True)
class LiftResult:
    end_sheet: SheetLabel
    end_point: tuple[complex, complex]
    path: np.ndarray
    steps: int
    min_clearance_used: float


def lift_curve(curve: PlanarCurve, start_sheet: SheetLabel, window: LevelWindow,
               sched: EpsilonSchedule = DEFAULT_SCHEDULE, *, max_step: float = 0.1,
               record: bool = True) -> LiftResult:
    """Continue each root of the window along ``curve`` by nearest-value tracking.

    Steps never exceed a quarter of the distance to the nearest window pole,
    which keeps each root much closer to its continuation than to its
    negative.  ``path`` holds the sampled ``(z, w)`` pairs, shape ``(s, 2)``.
    """
    if len(start_sheet) != window.width:
        raise ValueError(f"sheet of length {len(start_sheet)} for window of width {window.width}")
    if not curve.clearance > 0:
        raise ClearanceViolation("curve meets the lattice Z + iZ")
    a = poles(window.n, window.m)
    eps = epsilons(window.n, sched, window.m)
    sig = np.array(start_sheet.signs, dtype=float)
    z = curve.start
    roots = sig * _principal_sqrt(z - a)
    path = [(z, complex(np.dot(eps, roots)))] if record else []
    steps = 0
    min_used = float(np.min(np.abs(z - a)))
    for target in curve.vertices[1:]:
        target = complex(target)
        while z != target:
            dmin = float(np.min(np.abs(z - a)))
            min_used = min(min_used, dmin)
            h = min(max_step, 0.25 * dmin)
            if h < MIN_STEP:
                raise StepCollapse(f"step {h:.3g} near z={z} (pole distance {dmin:.3g})")
            rem = abs(target - z)
            z = target if rem <= h else z + (target - z) * (h / rem)
            p = _principal_sqrt(z - a)
            roots = np.where(np.abs(p - roots) <= np.abs(p + roots), p, -p)
            steps += 1
            if record:
                path.append((z, complex(np.dot(eps, roots))))
    p = _principal_sqrt(z - a)
    tau = np.where(np.abs(roots - p) <= np.abs(roots + p), 1, -1)
    end = SheetLabel.of(tau)
    w_end = sheet_value(z, end, sched, window.m) if window.width else 0j
    if not path:
        path = [(z, w_end)]
    return LiftResult(end, (z, w_end), np.array(path, dtype=complex), steps, min_used)


def _cell_center(z: complex) -> complex:
    return complex(math.floor(z.real) + 0.5, math.floor(z.imag) + 0.5)


def midline_route(z0: complex, z1: complex) -> PlanarCurve:
    """Route from ``z0`` to ``z1`` through cell centres along half-integer lines.

    Apart from the first and last legs (inside the cells of the endpoints)
    the route keeps distance at least 1/2 from the lattice.
    """
    c0, c1 = _cell_center(z0), _cell_center(z1)
    verts = [z0, c0, complex(c1.real, c0.imag), c1, z1]
    out = [verts[0]]
    for v in verts[1:]:
        if v != out[-1]:
            out.append(v)
    return PlanarCurve(np.array(out))


def lasso(base: complex, j: int, radius: float = 0.25, vertices: int = 64) -> PlanarCurve:
    """Closed curve from ``base`` encircling ``a_j`` once counterclockwise."""
    if not 0 < radius < 0.5:
        raise MultiplePolesEnclosed(f"radius {radius} must lie in (0, 1/2) to enclose a_{j} only")
    a = complex(poles(j)[j - 1])
    corner = a + 0.5 + 0.5j
    entry = a + radius * complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    approach = midline_route(base, corner).vertices
    theta = math.pi / 4 + 2 * math.pi * np.arange(vertices + 1) / vertices
    circle = a + radius * np.exp(1j * theta)
    out = np.concatenate([approach, [entry], circle[1:], approach[::-1]])
    return PlanarCurve(out)


@dataclass(frozen=True)
class MonodromyAction:
    """Sheet permutation of a loop: flips the listed 1-based window positions."""

    window: LevelWindow
    flipped: tuple[int, ...]

    def apply(self, sheet: SheetLabel) -> SheetLabel:
        for pos in self.flipped:
            sheet = sheet.flip(pos)
        return sheet

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(self.window.m + p - 1 for p in self.flipped)

    @property
    def is_identity(self) -> bool:
        return not self.flipped


def _action_of(curve: PlanarCurve, window: LevelWindow, sched, max_step: float) -> MonodromyAction:
    gens = [SheetLabel.plus(window.width)] + [SheetLabel.plus(window.width).flip(i)
                                              for i in range(1, window.width + 1)]
    flips = None
    for g in gens:
        res = lift_curve(curve, g, window, sched, max_step=max_step, record=False)
        d = tuple(g.differing(res.end_sheet))
        if flips is None:
            flips = d
        elif d != flips:
            raise WermerError("loop acts differently on different sheets")
    return MonodromyAction(window, flips)


def monodromy_loop(j: int, base: complex, radius: float, window: LevelWindow,
                   sched: EpsilonSchedule = DEFAULT_SCHEDULE, *, times: int = 1,
                   max_step: float = 0.1) -> MonodromyAction:
    """Sheet action of the lasso around ``a_j`` based at ``base``."""
    loop = lasso(base, j, radius)
    if times > 1:
        loop = loop.repeated(times)
    return _action_of(loop, window, sched, max_step)


def connect_sheets(z0: complex, sigma_from: SheetLabel, sigma_to: SheetLabel, window: LevelWindow,
                   sched: EpsilonSchedule = DEFAULT_SCHEDULE, *, radius: float = 0.25,
                   max_step: float = 0.1) -> PlanarCurve:
    """Closed curve at ``z0`` whose lift carries ``sigma_from`` to ``sigma_to``."""
    curve = PlanarCurve(np.array([z0]))
    if curve.clearance == 0:
        raise ClearanceViolation(f"base point {z0} is a lattice point")
    for pos in sigma_from.differing(sigma_to):
        curve = curve.then(lasso(z0, window.m + pos - 1, radius))
    res = lift_curve(curve, sigma_from, window, sched, max_step=max_step, record=False)
    if res.end_sheet != sigma_to:
        raise WermerError(f"connecting curve ended on {res.end_sheet}, wanted {sigma_to}")
    return curve


@dataclass(frozen=True)
class DecompositionCertificate:
    valid: bool
    discrepancy: float
    components: int


def _multiset_match(A: np.ndarray, B: np.ndarray, tol: float) -> DecompositionCertificate:
    pts = np.concatenate([A, B])
    xy = np.column_stack([pts.real, pts.imag])
    uniq, inv = np.unique(xy, axis=0, return_inverse=True)
    inv = inv.ravel()
    parent = np.arange(len(uniq))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in cKDTree(uniq).query_pairs(tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(uniq))])
    comp = roots[inv]
    side = np.concatenate([np.ones(len(A), int), -np.ones(len(B), int)])
    labels, cinv = np.unique(comp, return_inverse=True)
    balance = np.bincount(cinv.ravel(), weights=side, minlength=len(labels))
    disc = 0.0
    for c in np.flatnonzero(np.bincount(roots) > 1):
        members = uniq[roots == c]
        disc = max(disc, float(np.max(np.ptp(members, axis=0) if len(members) > 1 else 0.0)))
    return DecompositionCertificate(bool(np.all(balance == 0)), disc, len(labels))


def decompose_levels(z: complex, n: int, m: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE,
                     tol: float = 1e-12) -> DecompositionCertificate:
    """Check that ``E_n(z)`` is the Minkowski sum of ``E_m(z)`` and ``E_{m+1,n}(z)``.

    Values are grouped into clusters of points closer than ``tol``; the
    certificate is valid when every cluster holds equally many points of
    both multisets, and ``discrepancy`` is the largest cluster extent.
    """
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    head = sheet_values(z, m, sched)
    tail = sheet_values(z, n, sched, start=m + 1)
    sums = (head[:, None] + tail[None, :]).ravel()
    return _multiset_match(sums, sheet_values(z, n, sched).ravel(), tol)


def match_label(z: complex, w: complex, N: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE,
                rtol: float = 1e-9) -> SheetLabel:
    """Lexicographically smallest label of ``E_N`` over ``z`` closest to ``w``.

    Labels whose heights agree with the best one to round-off are treated
    as ties; ``+`` sorts before ``-`` with ``sigma_1`` most significant.
    """
    vals = sheet_values(z, N, sched)
    d = np.abs(vals - w)
    scale = 1.0 + abs(w)
    if d.min() > rtol * scale:
        raise ValueError(f"({z}, {w}) is not on E_{N} (distance {d.min():.3g})")
    ties = np.flatnonzero(d <= d.min() + 8 * np.finfo(float).eps * N * scale)
    return SheetLabel.from_index(int(ties.min()), N)


@dataclass(frozen=True)
class WalkResult:
    q_star: tuple[complex, complex]
    error: float
    trace: dict


def walk_to_point(p, q, n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, N: int = 16, *,
                  R: float | None = None, max_step: float = 0.1) -> WalkResult:
    """Approximate ``q`` by continuing from ``p`` through the head variety.

    The head level ``m_n`` is the smallest ``m`` whose tail bound from
    ``m + 1`` is below ``2**-n``.  A curve from ``z_p`` to ``z_q`` is chosen
    so that its lift on levels ``1..m_n`` runs from the head of ``p`` to the
    head of ``q``; lifting the same curve on levels ``m_n+1..N`` from the
    tail of ``p`` yields the tail of ``q_star``.
    """
    zp, wp = complex(p[0]), complex(p[1])
    zq, wq = complex(q[0]), complex(q[1])
    R = max(abs(zp), abs(zq), 1e-3) if R is None else R
    target = 2.0 ** -n
    m_n = next((m for m in range(1, N + 1) if tail_delta_bound(m + 1, R, sched) < target), None)
    if m_n is None:
        raise TailTooLarge(f"tail bound from level {N + 1} is not below {target}")
    sp, sq = match_label(zp, wp, N, sched), match_label(zq, wq, N, sched)
    head_p, tail_p = sp.split(m_n)
    head_q, tail_q = sq.split(m_n)
    head_w = LevelWindow(1, m_n)
    route = PlanarCurve(np.array([zp])) if zp == zq else midline_route(zp, zq)
    mid = lift_curve(route, head_p, head_w, sched, max_step=max_step, record=False)
    curve = route.then(connect_sheets(zq, mid.end_sheet, head_q, head_w, sched, max_step=max_step))
    eta = lift_curve(curve, head_p, head_w, sched, max_step=max_step, record=False)
    if eta.end_sheet != head_q:
        raise WermerError("head lift did not reach the head of q")
    if m_n < N:
        tail_lift = lift_curve(curve, tail_p, LevelWindow(m_n + 1, N), sched,
                               max_step=max_step, record=False)
        tail_end, tail_sheet = tail_lift.end_point[1], tail_lift.end_sheet
    else:
        tail_end, tail_sheet = 0j, SheetLabel(())
    # the point of E_N over z_q on the combined label; equals head + tail up to round-off
    q_star = (zq, sheet_value(zq, eta.end_sheet + tail_sheet, sched) if m_n < N else eta.end_point[1])
    error = abs(wq - q_star[1])
    trace = {
        "m_n": m_n,
        "bound": 2 * tail_delta_bound(m_n + 1, R, sched),
        "R": R,
        "label_p": str(sp),
        "label_q": str(sq),
        "tail_end_sheet": str(tail_sheet),
        "loops": len(mid.end_sheet.differing(head_q)),
        "curve_vertices": int(len(curve.vertices)),
        "curve_length": curve.length(),
        "clearance": curve.clearance,
    }
    return WalkResult(q_star, error, trace)
