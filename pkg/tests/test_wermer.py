import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wermerdomain import analysis, wermer
from wermerdomain.errors import EmptySet, InvalidSchedule, LevelTooLarge, PoleHit
from wermerdomain.lattice import DEFAULT_SCHEDULE, CustomSchedule, epsilon, poles
from wermerdomain.wermer import (SheetLabel, branch_terms, cluster_certificate, distinct_slice_count,
                                 hausdorff_distance, phi_n, sheet_value, slice_points, sqrt_branch)

HALF_SIXTEENTH = CustomSchedule([1 / 2, 1 / 16])

off_lattice = st.complex_numbers(max_magnitude=4).filter(
    lambda z: min(abs(z - a) for a in poles(30)) > 1e-3)


def brute_hausdorff(A, B):
    D = np.abs(np.asarray(A)[:, None] - np.asarray(B)[None, :])
    return max(D.min(axis=1).max(), D.min(axis=0).max())


def set_key(p):
    return sorted(zip(p.real.tolist(), p.imag.tolist()))


@pytest.mark.parametrize("z, k, expected", [(1, 1, 1), (-1, 1, 1j), (2, 2, 1)])
def test_sqrt_branch_examples(z, k, expected):
    assert sqrt_branch(z, k) == expected


def test_sqrt_branch_pole():
    with pytest.raises(PoleHit):
        sqrt_branch(1 + 1j, 3)
    with pytest.raises(PoleHit):
        branch_terms(np.array([0.5, 1 + 1j]), 4)


@given(off_lattice, st.integers(1, 20))
def test_sqrt_branch_convention(z, k):
    s = sqrt_branch(z, k)
    r = z - poles(k)[k - 1]
    assert abs(s * s - r) <= 4 * np.finfo(float).eps * max(1.0, abs(r))
    assert s.real >= 0
    if s.real == 0:
        assert s.imag >= 0


def test_sqrt_branch_upper_lip_on_cut():
    # the radicand -4 with a negative-zero imaginary part stays on the upper lip
    assert sqrt_branch(complex(-4.0, -0.0), 1) == 2j


def test_sheet_value_examples():
    v = sheet_value(2, (1, 1), HALF_SIXTEENTH)
    assert v == pytest.approx(math.sqrt(2) / 2 + 1 / 16, abs=1e-15)
    assert sheet_value(2, (-1, -1), HALF_SIXTEENTH) == -v
    t = 1e-12
    assert abs(sheet_value(t, (1,))) == pytest.approx(epsilon(1) * math.sqrt(t))


def test_slice_examples():
    s = slice_points(2, 2, HALF_SIXTEENTH)
    r2 = math.sqrt(2) / 2
    expected = [r2 + 1 / 16, r2 - 1 / 16, -r2 + 1 / 16, -r2 - 1 / 16]
    assert np.allclose(s.points, expected, atol=1e-15)
    assert s.points.real[0] == pytest.approx(0.769607, abs=1e-6)
    assert s.points.real[1] == pytest.approx(0.644607, abs=1e-6)
    s1 = slice_points(2, 1, CustomSchedule([1 / 2]))
    assert np.allclose(s1.points, [r2, -r2], atol=1e-15)


def test_slice_order_follows_labels():
    s = slice_points(0.3 + 0.7j, 6)
    for i in (0, 5, 17, 63):
        assert s.points[i] == pytest.approx(sheet_value(s.z0, s.label(i)), abs=1e-14)


@given(off_lattice, st.integers(1, 12))
def test_slice_symmetric(z0, n):
    p = slice_points(z0, n).points
    assert len(p) == 2 ** n
    assert set_key(p) == set_key(-p)


def test_slice_level_limits():
    with pytest.raises(LevelTooLarge):
        slice_points(0.5j, 23)
    with pytest.raises(ValueError):
        slice_points(0.5j, 0)


@pytest.mark.parametrize("z0", [0.5 + 0.5j, 2.3 - 0.7j])
def test_cluster_certificate_and_count(z0):
    cert = cluster_certificate(z0, 12)
    assert cert.valid and cert.margin > 0
    assert distinct_slice_count(z0, 12) == 2 ** 12
    s = slice_points(z0, 12)
    assert np.all(s.cluster_gap > 0)


def test_cluster_gap_matches_brute_force():
    # the recorded gap is a lower bound for the true distance between child clusters
    s = slice_points(0.4 + 0.9j, 8)
    for d in range(8):
        block = 2 ** (8 - d)
        for start in range(0, 256, block):
            left = s.points[start:start + block // 2]
            right = s.points[start + block // 2:start + block]
            true_gap = np.abs(left[:, None] - right[None, :]).min()
            assert true_gap >= s.cluster_gap[d] - 1e-14


def test_constant_schedule_not_constructible():
    with pytest.raises(InvalidSchedule):
        CustomSchedule([0.5, 0.5, 0.5])


def test_cluster_certificate_fails_for_slow_schedule():
    slow = CustomSchedule([1.0, 0.99, 0.98, 0.97], tail_ratio=0.99)
    assert not cluster_certificate(0.5 + 0.5j, 4, slow).valid


def test_phi_n_near_first_pole():
    z, w = 1e-9, 3.0
    exact = 0.5 * math.log(abs(w * w - epsilon(1) ** 2 * z))
    assert phi_n(z, w, 1) == pytest.approx(exact, rel=1e-15)
    assert phi_n(z, w, 1) == pytest.approx(math.log(w), abs=1e-10)


def test_phi_n_on_variety():
    for idx in (0, 9, 200):
        sigma = SheetLabel.from_index(idx, 8)
        w = sheet_value(0.3 - 0.4j, sigma)
        assert phi_n(0.3 - 0.4j, w, 8) == -math.inf
        assert phi_n(0.3 - 0.4j, w, 8, mode="direct") == -math.inf


def test_phi_n_example_oracle():
    a, b = phi_n(2, 5, 10), phi_n(2, 5, 10, mode="direct")
    assert abs(a - b) <= 1e-9 * abs(b)
    # closed form for n = 1: half the log of |w^2 - eps_1^2 (z - a_1)|
    assert phi_n(2, 5, 1) == pytest.approx(0.5 * math.log(abs(25 - epsilon(1) ** 2 * 2)), rel=1e-14)


@given(st.lists(st.tuples(off_lattice, st.complex_numbers(max_magnitude=3)), min_size=1, max_size=5),
       st.integers(2, 12))
def test_phi_n_recursive_matches_direct(pts, n):
    z = np.array([p[0] for p in pts])
    w = np.array([p[1] for p in pts])
    a = phi_n(z, w, n)
    b = phi_n(z, w, n, mode="direct")
    ok = np.isfinite(b)
    assert np.array_equal(np.isfinite(a), ok)
    assert np.all(np.abs(a[ok] - b[ok]) <= 1e-9 * (1 + np.abs(b[ok])))


@given(off_lattice, st.complex_numbers(max_magnitude=3), st.integers(1, 12))
def test_phi_n_even_in_w(z, w, n):
    a, b = phi_n(z, w, n), phi_n(z, -w, n)
    assert a == b or abs(a - b) <= 1e-12


def test_phi_n_broadcast_and_chunking():
    rng = np.random.default_rng(4)
    z = rng.normal(size=(7, 9)) + 0.5j
    w = rng.normal(size=(7, 9)) * (1 + 1j)
    a = phi_n(z, w, 11)
    b = phi_n(z, w, 11, chunk=5)
    assert a.shape == (7, 9)
    assert np.array_equal(a, b)


def test_phi_n_pluriharmonic_off_variety():
    # FD Levi form norm shrinks like h**2 away from the variety
    f = lambda z, w: phi_n(z, w, 6)
    for pt in [(0.5 + 0.5j, 1.0 + 0.3j), (2.3 - 0.7j, 0.6 - 0.2j), (0.2 + 0.7j, -0.5j)]:
        assert analysis.distance_to_variety(pt[0], pt[1], 6, DEFAULT_SCHEDULE)[0] >= 0.1
        norms = [np.abs(analysis.fd_complex_hessian(f, pt, h, richardson=False).matrix).max()
                 for h in (4e-2, 2e-2, 1e-2, 5e-3)]
        ratios = np.array(norms[:-1]) / np.array(norms[1:])
        assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


def test_hausdorff_examples():
    A = np.array([1 + 1j, 2 - 1j, 0.5j])
    assert hausdorff_distance(A, A) == 0
    assert hausdorff_distance([0], [3]) == 3
    with pytest.raises(EmptySet):
        hausdorff_distance([], [1])


@given(st.lists(st.complex_numbers(max_magnitude=10), min_size=1, max_size=30),
       st.lists(st.complex_numbers(max_magnitude=10), min_size=1, max_size=30))
def test_hausdorff_matches_brute_force(A, B):
    assert hausdorff_distance(A, B) == pytest.approx(brute_hausdorff(A, B), abs=1e-12)
    assert hausdorff_distance(A, B) == hausdorff_distance(B, A)


@given(off_lattice, st.integers(1, 11))
def test_hausdorff_telescoping(z0, n):
    a, b = slice_points(z0, n).points, slice_points(z0, n + 1).points
    shift = epsilon(n + 1) * abs(sqrt_branch(z0, n + 1))
    d = hausdorff_distance(a, b)
    assert d <= shift + 1e-12
    if cluster_certificate(z0, n + 1).valid:
        assert d == pytest.approx(shift, rel=1e-9, abs=1e-15)


def test_sheet_label_roundtrip():
    for i in range(64):
        s = SheetLabel.from_index(i, 6)
        assert s.index == i
    s = SheetLabel.of([1, -1, 1])
    assert str(s) == "+-+" and str(-s) == "-+-"
    assert s.flip(2) == SheetLabel.plus(3)
    head, tail = s.split(1)
    assert head + tail == s
    assert s.differing(SheetLabel.plus(3)) == [2]
    with pytest.raises(ValueError):
        SheetLabel((1, 0))
