import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adscmc.background import BackgroundModel, horizon_radius
from adscmc.errors import DomainError

from conftest import model


def cardano_r0(m):
    # real root of r^3 + r - 2m
    d = math.sqrt(m * m + 1.0 / 27.0)
    return float(np.cbrt(m + d) + np.cbrt(m - d))


def rk4_radius(m, s_end, h=1e-4):
    """Integrate r'' = r + m/r^2 from the horizon with classical RK4."""
    r0 = horizon_radius(m)
    y = np.array([r0, 0.0])
    f = lambda y: np.array([y[1], y[0] + m / y[0] ** 2])
    n = int(round(s_end / h))
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


@pytest.mark.parametrize("m", [0.01, 0.5, 1.0, 2.5, 40.0])
def test_horizon_radius_matches_cardano(m):
    assert horizon_radius(m) == pytest.approx(cardano_r0(m), rel=1e-14)


@pytest.mark.parametrize("m", [0.0, -1.0, float("nan")])
def test_horizon_radius_rejects_nonpositive_mass(m):
    with pytest.raises(DomainError):
        horizon_radius(m)


def test_horizon_invariant_k():
    mod = model(1.0)
    r0 = mod.r0
    assert mod.k == pytest.approx(2 * r0 + 2 / r0**2, rel=1e-15)
    # rho^2 = (r - r0) q(r) with q(r0) = k
    r = np.array([1.2, 3.0, 17.0])
    assert np.allclose((r - r0) * mod._q(r), 1 + r * r - 2 / r, rtol=1e-13)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_s_of_r_matches_mpmath_quadrature(m):
    mod = model(m)
    mpmath.mp.dps = 30
    r0 = mpmath.findroot(lambda r: r**3 + r - 2 * m, mod.r0)
    for r in (mod.r0 * 1.001, 1.7 * mod.r0, 10.0, 300.0):
        ref = mpmath.quad(lambda x: 1 / mpmath.sqrt(1 + x * x - 2 * m / x), [r0, r0 * 1.01, r])
        assert float(mod.s_of_r(r)) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_near_horizon_series_matches_rk4(m):
    mod = model(m)
    for s in (0.01, 0.03, 0.05):
        r, rho = rk4_radius(m, s)
        assert float(mod.radius(s)) == pytest.approx(r, abs=1e-12)
        assert float(mod.radial_speed(s)) == pytest.approx(rho, abs=1e-12)


def test_table_and_series_agree_at_switch():
    mod = model(1.0)
    s = mod.s_series
    below, above = mod.radius(s - 1e-12), mod.radius(s + 1e-12)
    assert abs(below - above) < 1e-11


@given(st.floats(min_value=1.0000001, max_value=1e6))
def test_round_trip_r_s_r(factor):
    mod = model(1.0)
    r = mod.r0 * factor
    assert float(mod.radius(mod.s_of_r(r))) == pytest.approx(r, rel=1e-9)


@given(st.floats(min_value=-20.0, max_value=20.0))
def test_radius_even_speed_odd(s):
    mod = model(1.0)
    assert mod.radius(-s) == mod.radius(s)
    assert mod.radial_speed(-s) == -mod.radial_speed(s)


def test_radial_speed_is_rho_of_radius():
    mod = model(2.5)
    # away from the horizon, where sqrt(r - r0) amplifies rounding in r
    s = np.linspace(0.2, 12.0, 301)
    assert np.allclose(mod.radial_speed(s), mod.rho(mod.radius(s)), rtol=1e-12)


def test_radius_jet_matches_finite_differences():
    mod = model(1.0)
    s = np.array([0.3, 1.0, 4.0])
    h = 1e-4
    r, r1, r2, r3 = mod.radius_jet(s)
    fd2 = (mod.radius(s + h) - 2 * r + mod.radius(s - h)) / h**2
    fd3 = (mod.radial_speed(s + h) - 2 * r1 + mod.radial_speed(s - h)) / h**2
    assert np.allclose(r2, fd2, rtol=1e-6)
    assert np.allclose(r3, fd3, rtol=1e-6)


def test_coordinate_mean_curvature_closed_form():
    # H_m(r) = (2/r) sqrt(1 + r^2 - 2m/r)
    mod = model(1.0)
    r = np.array([mod.r0, 2.0, 3.0, 50.0])
    assert np.allclose(mod.coordinate_mean_curvature(r), 2 / r * np.sqrt(np.maximum(1 + r * r - 2 / r, 0)))
    assert mod.coordinate_mean_curvature(mod.r0) == 0.0
    assert float(mod.coordinate_mean_curvature(2.0)) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainError):
        mod.coordinate_mean_curvature(0.5 * mod.r0)


def test_mean_curvature_maximal_at_three_m():
    # dH/ds = (6m/r - 2)/r^2 changes sign at r = 3m
    mod = model(1.0)
    s3 = float(mod.s_of_r(3.0))
    H = mod.mean_curvature_at
    assert H(s3 - 0.05) < H(s3) > H(s3 + 0.05)


def test_background_curvature_values():
    mod = model(1.0)
    out = mod.background_curvature(np.array([0.0, 1.0]))
    r = mod.radius(np.array([0.0, 1.0]))
    assert np.allclose(out["ric_ss"], -2 - 2 / r**3)
    assert np.allclose(out["ric_tangential"], -2 + 1 / r**3)
    assert np.all(out["scalar"] == -6.0)


def test_jacobi_spectrum_formula():
    mod = model(1.0)
    r = 3.0
    assert mod.jacobi_spectrum(r, 1) == pytest.approx(-6 / r**3)
    assert mod.jacobi_spectrum(r, 0) == pytest.approx(0.0, abs=1e-15)  # resonance at r = 3m


def test_hyperbolic_shift_defines_sinh_asymptotics():
    mod = model(1.0)
    s = np.array([10.0, 14.0, 20.0])
    ratio = mod.radius(s) / np.sinh(mod.hyperbolic_coordinate(s))
    assert np.allclose(ratio, 1.0, atol=1e-8)
    assert mod.hyperbolic_shift > 0


def test_v_profile_expansion():
    # v = 1 + 2m/(3 sinh^3 sigma) + O(e^{-5 sigma})
    mod = model(1.0)
    s = np.array([4.0, 5.0, 6.0])
    sig = mod.hyperbolic_coordinate(s)
    rem = mod.v_profile(s) - 1 - 2.0 / (3 * np.sinh(sig) ** 3)
    assert np.all(np.abs(rem) <= 10 * np.exp(-5 * sig))
    with pytest.raises(DomainError):
        mod.v_profile(-1.0)


def test_domain_errors():
    mod = model(1.0)
    with pytest.raises(DomainError):
        mod.s_of_r(0.5 * mod.r0)
    with pytest.raises(DomainError):
        mod.radius(100.0)
    with pytest.raises(DomainError):
        mod.r_of_s(-0.1)
    with pytest.raises(DomainError):
        BackgroundModel(1.0, s_series=0.0)
