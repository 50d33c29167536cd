import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from wermerdomain.errors import InvalidProfile, OutsideDomainOfDefinition
from wermerdomain.potentials import (ExponentialRho, PointClass, PotentialParams, QuadraticRho, RhoTilde,
                                     TableRho, classify_point, in_A, in_U, phi_tilde, phi_total, rho_eval,
                                     rho_tilde_eval)
from wermerdomain.wermer import SheetLabel, phi_n, sheet_value

P = PotentialParams()


def random_points(count, seed, scale=1.5):
    rng = np.random.default_rng(seed)
    z = scale * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
    w = scale * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
    return z, w


def test_rho_examples():
    assert rho_eval(0.0, QuadraticRho(1.0)) == (0.0, 0.0)
    assert rho_eval(3.0, QuadraticRho(1.0)) == (9.0, 6.0)
    assert float(rho_eval(0.0, ExponentialRho(1.0))[0]) == 0.0
    with pytest.raises(ValueError):
        rho_eval(-1.0, QuadraticRho())


@pytest.mark.parametrize("profile", [QuadraticRho(2.0), ExponentialRho(0.7),
                                     TableRho([0, 1, 2, 4], [0, 0.5, 2, 7])])
def test_rho_convex_increasing_unbounded(profile):
    t = np.linspace(0, 20, 2001)
    v = profile.value(t)
    assert v[0] >= 0
    assert np.all(np.diff(v) >= 0)
    assert np.all(np.diff(v, 2) >= -1e-12)
    assert v[-1] > 10 * v[len(v) // 10] or v[-1] > 50


@pytest.mark.parametrize("ts, vs", [([0, 1], [0, -1]), ([0, 1, 2], [0, 2, 3]), ([1, 2], [0, 1]),
                                    ([0, 1], [-1, 0]), ([0], [0])])
def test_table_rho_rejects(ts, vs):
    with pytest.raises(InvalidProfile):
        TableRho(ts, vs)


def test_table_rho_affine_extension():
    r = TableRho([0, 1, 2], [0, 1, 3])
    assert float(r.value(5.0)) == 3 + 2 * 3
    assert float(r.d1(1.0)) == 2.0


def test_rho_tilde_linear_zone():
    prof = RhoTilde(t0=1.0)
    assert rho_tilde_eval(0.5, prof) == (0.5, 1.0, 0.0)
    t = np.linspace(0, 1, 101)
    v, d1, d2 = rho_tilde_eval(t, prof)
    assert np.array_equal(v, t) and np.all(d1 == 1) and np.all(d2 == 0)


def test_rho_tilde_derivatives_match_mpmath():
    prof = RhoTilde(1.0, 1.0, 3.0)
    g = lambda t: t + (t - 1) ** 3 * mpmath.exp(-1 / (t - 1))
    for t in (1.05, 1.3, 2.0, 5.0, 17.0):
        v, d1, d2 = rho_tilde_eval(t, prof)
        assert v == pytest.approx(float(g(mpmath.mpf(t))), rel=1e-13)
        assert d1 == pytest.approx(float(mpmath.diff(g, t)), rel=1e-11)
        assert d2 == pytest.approx(float(mpmath.diff(g, t, 2)), rel=1e-9)


def test_rho_tilde_convex_and_unbounded_slope():
    prof = RhoTilde()
    t = np.linspace(0, 50, 1000)
    _, _, d2 = rho_tilde_eval(t, prof)
    assert np.all(d2 >= 0)
    slopes = [rho_tilde_eval(x, prof)[1] for x in (10.0, 100.0, 1000.0)]
    assert slopes[0] < slopes[1] < slopes[2]
    assert slopes[2] > 1e3
    v = rho_tilde_eval(t, prof)[0]
    assert np.all(np.diff(v) > 0)


@pytest.mark.parametrize("kw", [dict(t0=0), dict(scale=0), dict(power=1.0)])
def test_rho_tilde_rejects(kw):
    with pytest.raises(InvalidProfile):
        RhoTilde(**kw)


def test_phi_total_on_variety_and_zero_rho():
    z = 0.3 + 0.2j
    w = sheet_value(z, SheetLabel.from_index(5, 6))
    assert phi_total(z, w, P) == -math.inf
    assert phi_tilde(z, w, P) == -math.inf
    assert classify_point(z, w, P) == PointClass.ON_VARIETY
    zs, ws = random_points(50, 1)
    flat = P.with_(rho=QuadraticRho(0.0))
    assert np.array_equal(phi_total(zs, ws, flat), phi_n(zs, ws, 6))


def test_phi_total_monotone_in_rho():
    z, w = 0.7 - 0.4j, 0.2 + 0.1j
    vals = [phi_total(z, w, P.with_(rho=QuadraticRho(c))) for c in (0.5, 1.0, 2.0)]
    assert vals[0] < vals[1] < vals[2]


def test_phi_tilde_formula():
    zs, ws = random_points(200, 2, 0.3)
    phi = phi_total(zs, ws, P)
    ok = phi < 0
    n2 = np.abs(zs) ** 2 + np.abs(ws) ** 2
    expected = -np.log(-phi[ok]) + np.where(n2[ok] <= 1, n2[ok], np.nan)
    got = phi_tilde(zs[ok], ws[ok], P)
    assert np.allclose(got, expected, rtol=1e-14, atol=0)


def test_phi_tilde_example_values():
    # -log(e) + 0.1 and -log(1) + 0 from the two defining terms
    assert -math.log(math.e) + rho_tilde_eval(0.1, RhoTilde())[0] == pytest.approx(-0.9)
    assert -math.log(1.0) + rho_tilde_eval(0.0, RhoTilde())[0] == 0.0


def test_phi_tilde_outside_domain():
    with pytest.raises(OutsideDomainOfDefinition):
        phi_tilde(3.0 + 0.5j, 10.0, P)
    assert math.isnan(phi_tilde(3.0 + 0.5j, 10.0, P, strict=False))


def near_sheets(count, seed, spread):
    from wermerdomain.wermer import sheet_values
    rng = np.random.default_rng(seed)
    z = 0.6 * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
    sheets = sheet_values(z, 6)
    w = sheets[rng.integers(64, size=count), np.arange(count)]
    return z, w + spread * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))


def test_classify_threshold_logic():
    z1, w1 = near_sheets(2000, 3, 0.3)
    z2, w2 = near_sheets(2000, 4, 0.01)
    z, w = np.concatenate([z1, z2]), np.concatenate([w1, w2])
    phi = phi_total(z, w, P)
    pt = phi_tilde(z, w, P, strict=False)
    cls = classify_point(z, w, P)
    assert np.all((cls == PointClass.OUTSIDE_U) == (phi >= -1))
    assert np.all((cls == PointClass.IN_A) == ((phi < -1) & (pt < -1)))
    assert np.all((cls == PointClass.IN_U_NOT_A) == ((phi < -1) & (pt >= -1)))
    # both interior classes occur in this window
    assert {PointClass.IN_A, PointClass.IN_U_NOT_A, PointClass.OUTSIDE_U} <= set(cls.tolist())


def test_classify_scalar_examples():
    # phi_total = -10 at small norm lands in A; phi_total just below -1 with phi_tilde > -1 does not
    pts = [(0.01 + 0.01j, 0.01 * np.exp(1j * t)) for t in np.linspace(0, 6, 40)]
    for z, w in pts:
        phi = phi_total(z, w, P)
        c = classify_point(z, w, P)
        if phi < -math.e:
            assert c == PointClass.IN_A


def test_nesting_and_monotone_sublevels():
    z, w = random_points(10_000, 4, 1.2)
    assert np.all(phi_total(z[in_A(z, w, P)], w[in_A(z, w, P)], P) < -1)
    u1, u2, u3 = in_U(z, w, P, -3.0), in_U(z, w, P, -2.0), in_U(z, w, P, -1.0)
    assert np.all(~u1 | u2) and np.all(~u2 | u3)


@given(st.floats(1.5, 4.0))
def test_phi_tilde_monotone_in_rho_tilde(scale):
    z, w = random_points(300, 5, 1.1)
    phi = phi_total(z, w, P)
    keep = phi < 0
    n2 = np.abs(z) ** 2 + np.abs(w) ** 2
    keep &= n2 > 1.2  # far enough past the linear zone for the profiles to differ in double precision
    a = phi_tilde(z[keep], w[keep], P)
    b = phi_tilde(z[keep], w[keep], P.with_(rho_tilde=RhoTilde(scale=scale)))
    assert np.all(b > a)


def test_boundary_sign():
    # points with phi_total just below -1: bisection along w from inside U to outside
    rng = np.random.default_rng(6)
    checked = 0
    for _ in range(40):
        z = complex(*rng.uniform(-0.4, 0.4, 2))
        w_in = sheet_value(z, SheetLabel.plus(6)) + 0.01
        direction = np.exp(2j * np.pi * rng.random())
        lo, hi = 0.0, 3.0
        if phi_total(z, w_in + hi * direction, P) < -1:
            continue
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if phi_total(z, w_in + mid * direction, P) < -1:
                lo = mid
            else:
                hi = mid
        w = w_in + lo * direction
        phi = phi_total(z, w, P)
        assert -1 - 1e-6 < phi < -1
        rt = rho_tilde_eval(abs(z) ** 2 + abs(w) ** 2, P.rho_tilde)[0]
        assert phi_tilde(z, w, P) >= -1e-5 + rt
        checked += 1
    assert checked >= 20


def test_params_validation():
    with pytest.raises(ValueError):
        PotentialParams(level=0)
    with pytest.raises(ValueError):
        PotentialParams(t_U=math.inf)
