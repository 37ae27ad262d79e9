import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adscmc.errors import DomainError
from adscmc.metric import (FAMILIES, PerturbedMetric, boundary_minimality_check,
                           broken_boundary_family, christoffel, cross_term_family, decay_distance,
                           det3, inv3, min_scalar_excess, ricci, scalar_curvature)

from conftest import grid, metric, model


def random_points(seed, n=50, s_max=8.0):
    rng = np.random.default_rng(seed)
    return (rng.uniform(0.0, s_max, n), rng.uniform(0.05, np.pi - 0.05, n),
            rng.uniform(0.0, 2 * np.pi, n))


@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_background_scalar_curvature(m):
    s, th, ph = random_points(int(m * 10))
    R = scalar_curvature(metric("background", 0.0, m), s, th, ph)
    assert np.max(np.abs(R + 6)) <= 1e-8


def test_background_ricci_components():
    # coordinate components of Ric = diag(-2 - 2m/r^3, (-2 + m/r^3) g_tan)
    s, th, ph = random_points(3, n=10)
    ric = ricci(metric(), s, th, ph)
    r = model(1.0).radius(s)
    assert np.allclose(ric[:, 0, 0], -2 - 2 / r**3, atol=1e-9)
    assert np.allclose(ric[:, 1, 1], (-2 + 1 / r**3) * r**2, rtol=1e-9)
    assert np.allclose(ric[:, 2, 2], (-2 + 1 / r**3) * r**2 * np.sin(th) ** 2, rtol=1e-9)
    assert np.allclose(ric[:, 0, 1], 0.0, atol=1e-9)


@pytest.mark.parametrize("family", ["standard", "sphere_block"])
def test_metric_derivatives_match_finite_differences(family):
    g_m = metric(family, 1e-2)
    s, th, ph = random_points(5, n=6, s_max=4.0)
    s = s + 0.2
    g, dg, ddg = g_m.metric_at(s, th, ph, order=2)
    h = 1e-5
    shifts = np.eye(3) * h

    def at(d):
        return g_m.metric_at(s + d[0], th + d[1], ph + d[2], order=1)

    for c in range(3):
        gp, dgp, _ = at(shifts[c])
        gm, dgm, _ = at(-shifts[c])
        assert np.allclose(dg[:, c], (gp - gm) / (2 * h), atol=1e-7 * np.abs(g).max())
        assert np.allclose(ddg[:, c], (dgp - dgm) / (2 * h), atol=1e-6 * np.abs(g).max())


def test_christoffel_symmetry_and_background_values():
    s, th, ph = np.array([1.0]), np.array([0.7]), np.array([0.3])
    gam = christoffel(metric(), s, th, ph)[0]
    r, rho = model(1.0).radius(1.0), model(1.0).radial_speed(1.0)
    assert np.allclose(gam, np.swapaxes(gam, -1, -2))
    # Gamma^s_{theta theta} = -r r', Gamma^theta_{s theta} = r'/r
    assert gam[0, 1, 1] == pytest.approx(-r * rho, rel=1e-12)
    assert gam[1, 0, 1] == pytest.approx(rho / r, rel=1e-12)


def test_standard_family_scalar_bound():
    s = np.linspace(0.0, 10.0, 101)
    assert min_scalar_excess(metric("standard", 1e-3), s) >= -1e-9


def test_sphere_block_violates_scalar_bound():
    s = np.linspace(0.0, 6.0, 61)
    assert min_scalar_excess(metric("sphere_block", 1e-3), s) < -1e-4


def test_standard_family_scalar_curvature_first_order():
    # the perturbation is linear in eps, so R + 6 scales like eps to leading order
    s, th, ph = random_points(11, n=20, s_max=5.0)
    R1 = scalar_curvature(metric("standard", 1e-3), s, th, ph) + 6
    R2 = scalar_curvature(metric("standard", 2e-3), s, th, ph) + 6
    big = np.abs(R1) > 1e-6
    assert np.allclose(R2[big] / R1[big], 2.0, rtol=1e-2)


@pytest.mark.parametrize("family", ["background", "standard", "sphere_block"])
def test_boundary_is_minimal(family):
    assert boundary_minimality_check(metric(family, 1e-3), grid(15)) <= 1e-8


def test_broken_family_has_non_minimal_boundary():
    g_b = PerturbedMetric(model(1.0), broken_boundary_family(1e-3))
    assert boundary_minimality_check(g_b, grid(15)) > 1e-5


def test_cross_term_family_builds_and_is_symmetric():
    g_c = PerturbedMetric(model(1.0), cross_term_family(1e-3))
    g, _, _ = g_c.metric_at(np.array([1.0]), np.array([0.9]), np.array([0.4]))
    assert np.allclose(g, np.swapaxes(g, -1, -2))
    assert abs(g[0, 0, 1]) > 0


def test_family_registry():
    assert set(FAMILIES) >= {"background", "standard", "sphere_block", "broken_boundary"}
    assert FAMILIES["standard"](2e-3).epsilon == 2e-3


def test_evaluate_rejects_points_inside_collar():
    g_m = metric()
    with pytest.raises(DomainError):
        g_m.metric_at(np.array([-1.0]), np.array([1.0]), np.array([0.0]))


def spd_matrices():
    def build(a):
        a = a.reshape(3, 3)
        return a @ a.T + 0.5 * np.eye(3)

    return arrays(np.float64, 9, elements=st.floats(-3, 3)).map(build)


@given(spd_matrices())
def test_inv3_matches_numpy(a):
    assert np.allclose(inv3(a), np.linalg.inv(a), rtol=1e-9, atol=1e-12)


@given(arrays(np.float64, 9, elements=st.floats(-3, 3)))
def test_det3_matches_numpy(a):
    a = a.reshape(3, 3)
    assert det3(a) == pytest.approx(np.linalg.det(a), abs=1e-11)


def test_inv3_longdouble():
    a = np.array([[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 1.0]], dtype=np.longdouble)
    out = inv3(a) @ a
    assert out.dtype == np.longdouble
    assert np.max(np.abs(out - np.eye(3))) < 1e-17


def test_decay_distance_background_and_linearity():
    assert decay_distance(metric()) == 0.0
    # g - g_m is linear in eps, hence so is the weighted distance
    d1 = decay_distance(metric("standard", 1e-3), s_max=8.0, n_s=17, n_theta=4, n_phi=4)
    d2 = decay_distance(metric("standard", 2e-3), s_max=8.0, n_s=17, n_theta=4, n_phi=4)
    assert 0 < d1 < np.inf
    assert d2 == pytest.approx(2 * d1, rel=1e-9)
