"""Gaussian-integer pole sequence and the epsilon schedule.

The poles ``a_1, a_2, ...`` run through ``Z + iZ`` along a counterclockwise
square spiral starting at the origin::

    (0,0) -> (1,0) -> (1,1) -> (0,1) -> (-1,1) -> (-1,0) -> (-1,-1) -> ...

Ring ``r >= 1`` of the spiral covers the 1-based indices
``(2r-1)**2 + 1 .. (2r+1)**2``; it starts at ``(r, 1-r)``, climbs the right
edge, then walks the top, left and bottom edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DivergentTail, InvalidSchedule

__all__ = [
    "GaussPoint",
    "gauss_point",
    "spiral_index",
    "pole",
    "poles",
    "ExponentialSchedule",
    "CustomSchedule",
    "EpsilonSchedule",
    "epsilon",
    "tail_delta_bound",
    "DEFAULT_SCHEDULE",
]


@dataclass(frozen=True)
class GaussPoint:
    re: int
    im: int

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __iter__(self):
        yield self.re
        yield self.im


def gauss_point(n: int) -> GaussPoint:
    """Return the ``n``-th pole (1-based) of the square spiral."""
    n = int(n)
    if n < 1:
        raise ValueError(f"spiral index must be >= 1, got {n}")
    if n == 1:
        return GaussPoint(0, 0)
    r = (math.isqrt(n - 1) + 1) // 2
    # position inside ring r, 0-based; the ring has 8r points
    j = n - (2 * r - 1) ** 2 - 1
    side, off = divmod(j, 2 * r)
    if side == 0:
        return GaussPoint(r, 1 - r + off)
    if side == 1:
        return GaussPoint(r - 1 - off, r)
    if side == 2:
        return GaussPoint(-r, r - 1 - off)
    return GaussPoint(-r + 1 + off, -r)


def spiral_index(re: int, im: int) -> int:
    """Inverse of :func:`gauss_point`: the 1-based spiral index of ``re + i im``."""
    x, y = int(re), int(im)
    r = max(abs(x), abs(y))
    if r == 0:
        return 1
    base = (2 * r - 1) ** 2 + 1
    if x == r and y > -r:
        return base + y - (1 - r)
    if y == r:
        return base + 2 * r + (r - 1 - x)
    if x == -r:
        return base + 4 * r + (r - 1 - y)
    return base + 6 * r + (x + r - 1)


def pole(n: int) -> complex:
    return complex(gauss_point(n))


@lru_cache(maxsize=64)
def _poles_cached(n: int) -> np.ndarray:
    out = np.array([pole(k) for k in range(1, n + 1)], dtype=complex)
    out.setflags(write=False)
    return out


def poles(n: int, start: int = 1) -> np.ndarray:
    """Poles ``a_start .. a_n`` as a read-only complex array."""
    if n < start:
        return np.zeros(0, dtype=complex)
    return _poles_cached(int(n))[start - 1:]


@dataclass(frozen=True)
class ExponentialSchedule:
    """``eps_k = exp(-rate * k**power)``; the default is ``exp(-k**2)``."""

    rate: float = 1.0
    power: float = 2.0

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise InvalidSchedule(f"rate must be positive and finite, got {self.rate}")
        if not (self.power > 0 and math.isfinite(self.power)):
            raise InvalidSchedule(f"power must be positive and finite, got {self.power}")

    def log_epsilon(self, k: int) -> float:
        return -self.rate * float(k) ** self.power

    def epsilon(self, k: int) -> float:
        return math.exp(self.log_epsilon(k))

    def describe(self) -> str:
        return f"exp:{self.rate!r}:{self.power!r}"


@dataclass(frozen=True)
class CustomSchedule:
    """An explicit list ``eps_1..eps_L`` continued geometrically.

    For ``k > L`` the value is ``eps_L * tail_ratio**(k - L)``.
    """

    values: tuple[float, ...]
    tail_ratio: float = 1.0 / 16.0

    def __init__(self, values: Sequence[float], tail_ratio: float = 1.0 / 16.0):
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        object.__setattr__(self, "tail_ratio", float(tail_ratio))
        if not self.values:
            raise InvalidSchedule("custom schedule needs at least one value")
        if any(not (v > 0 and math.isfinite(v)) for v in self.values):
            raise InvalidSchedule("custom schedule values must be positive and finite")
        for k, (a, b) in enumerate(zip(self.values, self.values[1:]), start=1):
            if not b < a:
                raise InvalidSchedule(
                    f"schedule must strictly decrease: eps_{k}={a!r}, eps_{k + 1}={b!r}")
        if not 0 < self.tail_ratio < 1:
            raise InvalidSchedule(f"tail_ratio must lie in (0, 1), got {self.tail_ratio}")

    def log_epsilon(self, k: int) -> float:
        L = len(self.values)
        if k <= L:
            return math.log(self.values[k - 1])
        return math.log(self.values[-1]) + (k - L) * math.log(self.tail_ratio)

    def epsilon(self, k: int) -> float:
        if k <= len(self.values):
            return self.values[k - 1]
        return math.exp(self.log_epsilon(k))

    def describe(self) -> str:
        return "custom:" + ",".join(repr(v) for v in self.values) + f":{self.tail_ratio!r}"


EpsilonSchedule = ExponentialSchedule | CustomSchedule

DEFAULT_SCHEDULE = ExponentialSchedule()


def epsilon(k: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return sched.epsilon(int(k))


def epsilons(n: int, sched: EpsilonSchedule = DEFAULT_SCHEDULE, start: int = 1) -> np.ndarray:
    return np.array([sched.epsilon(k) for k in range(start, n + 1)], dtype=float)


def tail_delta_bound(m: int, R: float, sched: EpsilonSchedule = DEFAULT_SCHEDULE, *,
                     floor: float = 1e-300, max_terms: int = 1_000_000) -> float:
    """Upper bound for ``max_{|z|<=R} max_{w in tail_m(z)} |w|``.

    Sums ``eps_k * sqrt(R + |a_k|)`` over ``k >= m`` (since
    ``|z - a_k| <= R + |a_k|``) until the terms drop below ``floor`` while
    shrinking geometrically.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    total = 0.0
    prev = math.inf
    for k in range(m, m + max_terms):
        term = sched.epsilon(k) * math.sqrt(R + abs(pole(k)))
        total += term
        if term == 0.0 or (term < floor and term < 0.5 * prev):
            return total
        prev = term
    raise DivergentTail(f"tail from m={m} did not fall below {floor} within {max_terms} terms")
