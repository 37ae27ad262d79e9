import math

import numpy as np
import pytest

from adscmc import kernels
from adscmc.errors import DomainError
from adscmc.geometry import (GraphSurface, compute_geometry, gauss_equation_residual, graph_jet,
                             hawking_mass, mean_curvature)
from adscmc.metric import PerturbedMetric, standard_family
from adscmc.sphere import SphereField, real_harmonics

from conftest import grid, metric, model


def sphere(s, g_m=None, u=None, L=15):
    g_m = g_m if g_m is not None else metric()
    return GraphSurface(s, u if u is not None else SphereField.zeros(grid(L)), g_m)


def wavy(L=15, a=0.05):
    g = grid(L)
    return SphereField.harmonic(g, 2, 0, a) + SphereField.harmonic(g, 3, 1, 0.4 * a)


def divergence_mean_curvature(g_m, s0, u, th, ph, h=1e-4):
    """H = div N for N = grad F/|grad F|, F = s - u(theta, phi), by central differences."""
    L = u.grid.L
    c = u.coeffs

    def unit_normal_density(s, t, p):
        d = real_harmonics(L, t, p, ("t", "p"))
        ut, up = d["t"] @ c, d["p"] @ c
        g = g_m.metric_at(s, t, p, order=0)[0]
        gi = np.linalg.inv(g)
        dF = np.stack([np.ones_like(ut), -ut, -up], -1)
        N = np.einsum("nab,nb->na", gi, dF)
        N /= np.sqrt(np.einsum("na,na->n", N, dF))[:, None]
        return N * np.sqrt(np.linalg.det(g))[:, None]

    s = s0 + real_harmonics(L, th, ph)[""] @ c
    div = 0.0
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        plus = unit_normal_density(s + e[0], th + e[1], ph + e[2])[:, a]
        minus = unit_normal_density(s - e[0], th - e[1], ph - e[2])[:, a]
        div = div + (plus - minus) / (2 * h)
    vol = np.sqrt(np.linalg.det(g_m.metric_at(s, th, ph, order=0)[0]))
    return div / vol


@pytest.mark.parametrize("s", [0.3, 1.0, 4.0])
def test_coordinate_sphere_geometry(s):
    geo = compute_geometry(sphere(s))
    r, rho = model(1.0).radius(s), model(1.0).radial_speed(s)
    assert np.allclose(geo.H.astype(float), 2 * rho / r, rtol=1e-12)
    assert float(geo.area) == pytest.approx(4 * math.pi * r * r, rel=1e-13)
    assert np.allclose(geo.gaussK.astype(float), 1 / r**2, rtol=1e-11)
    assert np.max(np.abs(geo.tracefree_sq.astype(float))) < 1e-20
    assert np.allclose(geo.ds_tangential_sq.astype(float), 0.0, atol=1e-20)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_hawking_mass_of_coordinate_spheres(m):
    g_m = metric("background", 0.0, m)
    for s in np.linspace(0.0, 8.0, 20):
        assert hawking_mass(compute_geometry(sphere(s, g_m))) == pytest.approx(m, abs=1e-8)


@pytest.mark.parametrize("family,eps", [("background", 0.0), ("standard", 1e-3), ("sphere_block", 1e-2)])
def test_mean_curvature_matches_divergence_oracle(family, eps):
    g_m = metric(family, eps)
    u = wavy(10)
    rng = np.random.default_rng(1)
    idx = rng.choice(u.grid.size, 12, replace=False)
    th, ph = u.grid.theta[idx], u.grid.phi[idx]
    H = mean_curvature(1.2, u, g_m).values[idx]
    assert np.allclose(H, divergence_mean_curvature(g_m, 1.2, u, th, ph), atol=1e-6)


def test_gauss_bonnet_on_perturbed_graph():
    geo = compute_geometry(sphere(1.5, metric("standard", 1e-3), wavy()))
    assert float(geo.integrate(geo.gaussK)) == pytest.approx(4 * math.pi, rel=1e-10)


@pytest.mark.parametrize("family", ["background", "standard", "sphere_block"])
def test_gauss_equation_residual_small(family):
    for s in (0.5, 2.0, 6.0):
        geo = compute_geometry(sphere(s, metric(family, 1e-3), wavy(a=0.02)))
        assert np.max(np.abs(gauss_equation_residual(geo))) <= 1e-6


def test_mean_curvature_mirror_symmetric():
    # P_2 data is equatorially symmetric; the graph geometry must be too
    geo = compute_geometry(sphere(1.0, metric("standard", 1e-3), SphereField.harmonic(grid(15), 2, 0, 0.03)))
    g = grid(15)
    H = geo.H.astype(float).reshape(g.n_theta, g.n_phi)
    assert np.allclose(H, H[::-1], atol=1e-14)


def test_extended_and_double_precision_agree():
    surf = sphere(3.0, metric("standard", 1e-3), wavy())
    ext, dbl = compute_geometry(surf), compute_geometry(surf, extended=False)
    assert ext.H.dtype == np.longdouble and dbl.H.dtype == np.float64
    assert np.allclose(dbl.H, ext.H.astype(float), rtol=1e-13)
    assert float(dbl.area) == pytest.approx(float(ext.area), rel=1e-13)


def test_numba_and_numpy_kernels_agree():
    g_m = metric("standard", 1e-3)
    u = wavy()
    g, dg, _ = g_m.evaluate(1.0 + u.values, g_m.angular_on(u.grid), order=1)
    du = graph_jet(u)
    ref = kernels.mean_curvature_numpy(g, dg, du)
    if not kernels.use_numba():
        pytest.skip("numba disabled")
    assert np.allclose(kernels.mean_curvature_numba(g, dg, du), ref, rtol=1e-13, atol=1e-14)


def test_standard_family_mass_first_order():
    # m_H(S_s) = m - eps (3m - r0) (r0/r)^4 / 2 + O(eps^2)
    mod = model(1.0)
    errs = []
    for eps in (1e-3, 2e-3):
        g_e = PerturbedMetric(mod, standard_family(eps))
        err = []
        for s in (0.5, 1.0, 2.0):
            r = mod.radius(s)
            first = 1.0 - eps * (3 - mod.r0) * (mod.r0 / r) ** 4 / 2
            err.append(hawking_mass(compute_geometry(sphere(s, g_e))) - first)
        errs.append(np.array(err))
    assert np.all(np.abs(errs[0]) < 1e-5)
    assert np.allclose(errs[1] / errs[0], 4.0, rtol=0.05)


def test_graph_outside_collar_rejected():
    with pytest.raises(DomainError):
        sphere(0.0, u=SphereField.harmonic(grid(15), 0, 0, -10.0))
