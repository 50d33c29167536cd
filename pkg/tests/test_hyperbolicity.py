import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wermerdomain.errors import CenterOutside
from wermerdomain.hyperbolicity import (affine_disk_radius, box_cells, disk_inside, empirical_r0,
                                        kobayashi_lower_bound)
from wermerdomain.lattice import spiral_index
from wermerdomain.potentials import PotentialParams
from wermerdomain.wermer import SheetLabel, sheet_value

P = PotentialParams()
Z0 = 0.3 + 0.2j
CENTER = (Z0, sheet_value(Z0, SheetLabel.plus(6)))


def test_radius_positive_on_variety():
    res = affine_disk_radius(CENTER, (0, 1), -1.0, P, tol=1e-5)
    assert res.radius > 0 and not res.capped
    assert res.violating_angle is not None
    assert disk_inside(CENTER, (0, 1), res.radius, -1.0, P, samples=256)[0]


def test_radius_monotone_and_shrinking_in_t():
    radii = [affine_disk_radius(CENTER, (0.6, 0.8j), t, P, tol=1e-5).radius for t in (-1, -2, -4, -8, -16)]
    assert all(b <= a for a, b in zip(radii, radii[1:]))
    assert radii[-1] < 1e-3 * radii[0]


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_radius_revalidates_at_four_times_density(a, b):
    d = (math.cos(a) * np.exp(1j * b), math.sin(a))
    res = affine_disk_radius(CENTER, d, -1.0, P, angular_samples=32, tol=1e-4)
    assert disk_inside(CENTER, d, res.radius, -1.0, P, samples=128)[0]


def test_radius_errors():
    with pytest.raises(CenterOutside):
        affine_disk_radius((3.0, 3.0), (0, 1), -1.0, P)
    with pytest.raises(ValueError):
        affine_disk_radius(CENTER, (1, 1), -1.0, P)


def test_box_cells_spiral_order():
    cells = box_cells(2, 1)
    assert len(cells) == 8
    assert cells[0] == (0, 0)
    idx = [spiral_index(*c) for c in cells]
    assert idx == sorted(idx)


def test_empirical_r0_single_probe_and_determinism():
    one = empirical_r0(-1.0, P, 1, 3, re_half=2, im_half=2)
    c, d = one.argmax.center, one.argmax.direction
    assert one.r0_hat == affine_disk_radius(c, d, -1.0, P, 64, 1e-4).radius
    again = empirical_r0(-1.0, P, 1, 3, re_half=2, im_half=2)
    assert again == one


def test_empirical_r0_superset_monotone():
    vals = [empirical_r0(-1.0, P, k, 5, re_half=2, im_half=2).r0_hat for k in (4, 8, 16)]
    assert vals[0] <= vals[1] <= vals[2]
    assert all(math.isfinite(v) for v in vals)


def test_empirical_r0_box_growth_keeps_probes():
    # with 2 probes per cell, the larger box's probe set contains the smaller one's
    small = empirical_r0(-1.0, P, 2 * 16, 0, re_half=2, im_half=2)
    big = empirical_r0(-1.0, P, 2 * 32, 0, re_half=4, im_half=2)
    assert big.r0_hat >= small.r0_hat


def test_kobayashi_examples():
    assert kobayashi_lower_bound((0, 0), (3, 0), 1.5) == 2.0
    assert kobayashi_lower_bound((1 + 1j, 2j), (1 + 1j, 2j), 0.3) == 0.0
    assert kobayashi_lower_bound((0, 0), (1e6, 0), 0.5) == 2e6
    with pytest.raises(ValueError):
        kobayashi_lower_bound((0, 0), (1, 0), 0.0)


pt = st.tuples(st.complex_numbers(max_magnitude=100), st.complex_numbers(max_magnitude=100))


@given(pt, pt, pt, st.floats(0.01, 10))
def test_kobayashi_is_scaled_metric(a, b, c, r0):
    ab, ba = kobayashi_lower_bound(a, b, r0), kobayashi_lower_bound(b, a, r0)
    assert ab == ba >= 0
    assert ab <= kobayashi_lower_bound(a, c, r0) + kobayashi_lower_bound(c, b, r0) + 1e-9
