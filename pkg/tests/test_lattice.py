import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wermerdomain import lattice
from wermerdomain.errors import InvalidSchedule
from wermerdomain.lattice import (CustomSchedule, ExponentialSchedule, epsilon, gauss_point, spiral_index,
                                  tail_delta_bound)

HEAD = [(0, 0), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (2, -1), (2, 0)]


def brute_spiral(count):
    """Walk the spiral one unit step at a time: right, up, left, down with growing legs."""
    pts = [(0, 0)]
    x = y = 0
    leg, d = 1, 0
    moves = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    while len(pts) < count:
        for _ in range(2):
            dx, dy = moves[d % 4]
            for _ in range(leg):
                x, y = x + dx, y + dy
                pts.append((x, y))
            d += 1
        leg += 1
    return pts[:count]


def test_spiral_head():
    assert [tuple(gauss_point(n)) for n in range(1, 12)] == HEAD


@pytest.mark.parametrize("n, expected", [(1, (0, 0)), (4, (0, 1)), (10, (2, -1))])
def test_gauss_point_examples(n, expected):
    p = gauss_point(n)
    assert (p.re, p.im) == expected
    assert isinstance(p.re, int) and isinstance(p.im, int)


def test_spiral_matches_unit_step_walk():
    ref = brute_spiral(10_000)
    assert [tuple(gauss_point(n)) for n in range(1, 10_001)] == ref


def test_spiral_injective_and_growth():
    pts = [gauss_point(n) for n in range(1, 10_001)]
    assert len({tuple(p) for p in pts}) == 10_000
    for n, p in enumerate(pts, start=1):
        assert abs(complex(p)) <= math.ceil(math.sqrt(n)) + 1


def test_gauss_point_rejects_zero():
    with pytest.raises(ValueError):
        gauss_point(0)


@given(st.integers(min_value=1, max_value=10 ** 7))
def test_spiral_index_inverts(n):
    assert spiral_index(*gauss_point(n)) == n


@given(st.integers(-300, 300), st.integers(-300, 300))
def test_spiral_surjective(x, y):
    assert tuple(gauss_point(spiral_index(x, y))) == (x, y)


def test_poles_array():
    a = lattice.poles(11)
    assert a.tolist() == [complex(*p) for p in HEAD]
    assert lattice.poles(11, start=5).tolist() == [complex(*p) for p in HEAD[4:]]


def test_epsilon_examples():
    assert epsilon(1) == pytest.approx(0.36787944117144233, rel=1e-15)
    assert epsilon(3) == pytest.approx(1.2340980408667956e-4, rel=1e-15)
    custom = CustomSchedule([1 / 2, 1 / 16, 1 / 256])
    assert epsilon(2, custom) == 1 / 16
    assert epsilon(4, custom) == pytest.approx(1 / 4096)


@pytest.mark.parametrize("values", [[0.5, 0.5], [0.5, 0.6], [0.5, -0.1], [], [1.0, math.nan]])
def test_custom_schedule_rejects_bad_lists(values):
    with pytest.raises(InvalidSchedule):
        CustomSchedule(values)


@pytest.mark.parametrize("rate, power", [(0, 2), (-1, 2), (1, 0), (math.inf, 2)])
def test_exponential_schedule_rejects(rate, power):
    with pytest.raises(InvalidSchedule):
        ExponentialSchedule(rate, power)


@given(st.floats(0.1, 3), st.floats(1.0, 3), st.integers(1, 40))
def test_exponential_strictly_decreasing(rate, power, k):
    s = ExponentialSchedule(rate, power)
    assert 0 < s.epsilon(k + 1) < s.epsilon(k) or s.epsilon(k + 1) == 0.0


def test_tail_bound_example():
    # oracle: the tail sum written out directly
    R = 2.0
    direct = sum(math.exp(-k * k) * math.sqrt(R + abs(complex(gauss_point(k)))) for k in range(3, 40))
    got = tail_delta_bound(3, R)
    assert got == pytest.approx(direct, rel=1e-12)
    assert got == pytest.approx(2.28e-4, rel=0.01)
    assert tail_delta_bound(1, R) >= tail_delta_bound(2, R)


@given(st.integers(1, 30), st.floats(0.01, 50))
def test_tail_bound_monotone(m, R):
    assert tail_delta_bound(m + 1, R) <= tail_delta_bound(m, R)
    assert tail_delta_bound(m, R) <= tail_delta_bound(m, 2 * R)


def test_tail_bound_vanishes():
    vals = [tail_delta_bound(m, 5.0) for m in range(1, 26)]
    assert vals[-1] < 1e-250
    assert np.all(np.diff(vals) < 0)


def test_tail_bound_dominates_true_tail():
    # a brute-force maximum over sheets and a z-grid never exceeds the bound
    from wermerdomain.wermer import sheet_values
    R, m, n = 1.5, 2, 8
    bound = tail_delta_bound(m, R)
    zs = [R * np.exp(1j * t) * s + 0.013j for t in np.linspace(0, 2 * np.pi, 24) for s in (0.3, 0.7, 0.99)]
    worst = max(np.abs(sheet_values(z, n, start=m)).max() for z in zs)
    assert worst <= bound


def test_tail_bound_validates():
    with pytest.raises(ValueError):
        tail_delta_bound(0, 1.0)
    with pytest.raises(ValueError):
        tail_delta_bound(1, 0.0)
