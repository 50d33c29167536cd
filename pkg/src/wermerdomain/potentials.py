"""The plurisubharmonic potential, its rescaling, and domain membership.

``phi_total = phi_n + rho(|Re z|) + rho(|Im z|)`` truncates the Wermer
potential at ``params.level``.  ``phi_tilde = -log(-phi_total) +
rho_tilde(|z|^2 + |w|^2)`` is defined where ``phi_total < 0``.  The sublevel
set ``U = {phi_total < t_U}`` and the domain ``A = {x in U : phi_tilde < t_A}``
are exposed through :func:`classify_point`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidProfile, OutsideDomainOfDefinition
from .lattice import DEFAULT_SCHEDULE, EpsilonSchedule
from .wermer import N_MAX, phi_n

__all__ = [
    "QuadraticRho",
    "ExponentialRho",
    "TableRho",
    "RhoProfile",
    "RhoTilde",
    "PotentialParams",
    "PointClass",
    "rho_eval",
    "rho_tilde_eval",
    "phi_total",
    "phi_tilde",
    "classify_point",
    "in_U",
    "in_A",
]


@dataclass(frozen=True)
class QuadraticRho:
    """``rho(t) = c t**2``.  ``c = 0`` is allowed as the degenerate zero profile."""

    c: float = 1.0

    def __post_init__(self):
        if not self.c >= 0:
            raise InvalidProfile(f"quadratic coefficient must be >= 0, got {self.c}")

    def value(self, t):
        return self.c * t * t

    def d1(self, t):
        return 2 * self.c * t

    def d2(self, t):
        return 2 * self.c * np.ones_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ExponentialRho:
    """``rho(t) = exp(lam t) - 1``."""

    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidProfile(f"exponential rate must be positive, got {self.lam}")

    def value(self, t):
        return np.expm1(self.lam * np.asarray(t, dtype=float))

    def d1(self, t):
        return self.lam * np.exp(self.lam * np.asarray(t, dtype=float))

    def d2(self, t):
        return self.lam ** 2 * np.exp(self.lam * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class TableRho:
    """Piecewise-linear interpolation of a convex table, affine past the end.

    ``d1`` is the right derivative.
    """

    ts: tuple[float, ...]
    vs: tuple[float, ...]

    def __init__(self, ts: Sequence[float], vs: Sequence[float]):
        object.__setattr__(self, "ts", tuple(float(t) for t in ts))
        object.__setattr__(self, "vs", tuple(float(v) for v in vs))
        t, v = np.array(self.ts), np.array(self.vs)
        if len(t) < 2 or len(t) != len(v):
            raise InvalidProfile("table needs >= 2 matching knots")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise InvalidProfile("knots must start at 0 and increase")
        slopes = np.diff(v) / np.diff(t)
        if v[0] < 0:
            raise InvalidProfile("rho(0) must be >= 0")
        if np.any(slopes < 0) or np.any(np.diff(slopes) < -1e-12):
            raise InvalidProfile("table must be nondecreasing and convex")
        if slopes[-1] <= 0:
            raise InvalidProfile("final slope must be positive so rho is unbounded")

    def _slopes(self):
        t, v = np.array(self.ts), np.array(self.vs)
        return t, v, np.diff(v) / np.diff(t)

    def value(self, t):
        knots, v, s = self._slopes()
        t = np.asarray(t, dtype=float)
        inside = np.interp(t, knots, v)
        return np.where(t > knots[-1], v[-1] + s[-1] * (t - knots[-1]), inside)

    def d1(self, t):
        knots, _, s = self._slopes()
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(s) - 1)
        return s[idx]

    def d2(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


RhoProfile = QuadraticRho | ExponentialRho | TableRho


@dataclass(frozen=True)
class RhoTilde:
    """``t`` on ``[0, t0]``, then ``t + scale (t - t0)**power exp(-1/(t - t0))``.

    The added term is flat to all orders at ``t0``, so the profile is smooth,
    strictly increasing and convex, and its derivative grows like
    ``power * scale * t**(power - 1)``.
    """

    t0: float = 1.0
    scale: float = 1.0
    power: float = 3.0

    def __post_init__(self):
        if not self.t0 > 0:
            raise InvalidProfile(f"t0 must be positive, got {self.t0}")
        if not self.scale > 0:
            raise InvalidProfile(f"scale must be positive, got {self.scale}")
        if not self.power > 1:
            raise InvalidProfile(f"power must exceed 1 so the slope is unbounded, got {self.power}")

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        u = np.maximum(t - self.t0, 0.0)
        p, c = self.power, self.scale
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            e = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
            us = np.where(u > 0, u, 1.0)
            g0 = c * us ** p * e
            g1 = c * e * (p * us ** (p - 1) + us ** (p - 2))
            g2 = c * e * (p * (p - 1) * us ** (p - 2) + (2 * p - 2) * us ** (p - 3) + us ** (p - 4))
        lin = u <= 0
        value = np.where(lin, t, t + g0)
        d1 = np.where(lin, 1.0, 1.0 + g1)
        d2 = np.where(lin, 0.0, g2)
        return value, d1, d2


@dataclass(frozen=True)
class PotentialParams:
    sched: EpsilonSchedule = DEFAULT_SCHEDULE
    rho: RhoProfile = field(default_factory=QuadraticRho)
    rho_tilde: RhoTilde = field(default_factory=RhoTilde)
    level: int = 6
    t_U: float = -1.0
    t_A: float = -1.0

    def __post_init__(self):
        if not 1 <= self.level <= N_MAX:
            raise ValueError(f"level must lie in 1..{N_MAX}, got {self.level}")
        if not (math.isfinite(self.t_U) and math.isfinite(self.t_A)):
            raise ValueError("thresholds must be finite")

    def with_(self, **kw) -> "PotentialParams":
        return replace(self, **kw)


class PointClass(enum.IntEnum):
    OUTSIDE_U = 0
    IN_U_NOT_A = 1
    IN_A = 2
    ON_VARIETY = 3


def rho_eval(t, profile: RhoProfile):
    """Value and right derivative of ``rho`` at ``t >= 0``."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("rho is evaluated at t >= 0 only")
    return profile.value(t), profile.d1(t)


def rho_tilde_eval(t, profile: RhoTilde):
    if np.any(np.asarray(t) < 0):
        raise ValueError("rho_tilde is evaluated at t >= 0 only")
    v, d1, d2 = profile.evaluate(t)
    if np.ndim(t) == 0:
        return float(v), float(d1), float(d2)
    return v, d1, d2


def phi_total(z, w, params: PotentialParams):
    z = np.asarray(z, dtype=complex)
    base = phi_n(z, w, params.level, params.sched)
    return base + params.rho.value(np.abs(z.real)) + params.rho.value(np.abs(z.imag))


def _phi_tilde_from(phi, z, w, params: PotentialParams):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    norm2 = np.abs(z) ** 2 + np.abs(w) ** 2
    rt, _, _ = params.rho_tilde.evaluate(norm2)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(phi < 0, -np.log(-np.where(phi < 0, phi, -1.0)) + rt, np.nan)
    return val


def phi_tilde(z, w, params: PotentialParams, *, strict: bool = True):
    """``-log(-phi_total) + rho_tilde(||zeta||^2)``.

    Raises :class:`OutsideDomainOfDefinition` where ``phi_total >= 0`` unless
    ``strict=False``, in which case those entries are NaN.
    """
    phi = phi_total(z, w, params)
    val = _phi_tilde_from(phi, z, w, params)
    if strict and np.any(np.isnan(val)):
        raise OutsideDomainOfDefinition("phi_total >= 0 at some requested point")
    if np.ndim(val) == 0:
        return float(val)
    return val


def classify_point(z, w, params: PotentialParams):
    """Return :class:`PointClass` codes (a scalar for scalar input)."""
    phi = phi_total(z, w, params)
    pt = _phi_tilde_from(np.minimum(phi, params.t_U), z, w, params)
    out = np.where(
        np.isneginf(phi), PointClass.ON_VARIETY,
        np.where(phi >= params.t_U, PointClass.OUTSIDE_U,
                 np.where(pt < params.t_A, PointClass.IN_A, PointClass.IN_U_NOT_A)))
    if np.ndim(out) == 0:
        return PointClass(int(out))
    return out.astype(int)


def in_U(z, w, params: PotentialParams, t: float | None = None):
    t = params.t_U if t is None else t
    return phi_total(z, w, params) < t


def in_A(z, w, params: PotentialParams):
    """Membership in the domain; points of the variety belong to it."""
    c = classify_point(z, w, params)
    return (np.asarray(c) == PointClass.IN_A) | (np.asarray(c) == PointClass.ON_VARIETY)
