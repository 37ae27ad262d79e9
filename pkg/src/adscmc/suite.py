"""Invariant suite for the unperturbed Schwarzschild-AdS metric."""
from __future__ import annotations

import numpy as np

from .background import BackgroundModel
from .geometry import GraphSurface, compute_geometry, hawking_mass
from .metric import PerturbedMetric, ricci, scalar_curvature
from .reporting import Check
from .solver import CmcSolution, linearized_mean_curvature, stability_eigenvalue
from .sphere import SphereField, SphereGrid, index


def background_suite(m=1.0, L=15, seed=0, n_points=50):
    model = BackgroundModel(m)
    metric = PerturbedMetric(model)
    grid = SphereGrid(L)
    rng = np.random.default_rng(seed)
    checks = []

    s = rng.uniform(0.0, 8.0, n_points)
    th = np.arccos(rng.uniform(-1.0, 1.0, n_points))
    ph = rng.uniform(0.0, 2 * np.pi, n_points)
    err = float(np.max(np.abs(scalar_curvature(metric, s, th, ph) + 6.0)))
    checks.append(Check("scalar curvature R = -6", err <= 1e-8, f"max |R+6| = {err:.2e}"))

    ric = ricci(metric, s, th, ph)
    r = model.radius(s)
    c = m / r**3
    frame = np.stack([np.ones_like(r), 1.0 / r, 1.0 / (r * np.sin(th))], axis=-1)
    ric_f = ric * frame[:, :, None] * frame[:, None, :]
    expect = np.zeros_like(ric_f)
    expect[:, 0, 0] = -2.0 - 2.0 * c
    expect[:, 1, 1] = expect[:, 2, 2] = -2.0 + c
    err = float(np.max(np.abs(ric_f - expect)))
    checks.append(Check("orthonormal-frame Ricci", err <= 1e-8, f"max error = {err:.2e}"))

    dev = 0.0
    for sv in np.linspace(0.0, 8.0, 20):
        geom = compute_geometry(GraphSurface(float(sv), SphereField.zeros(grid), metric))
        dev = max(dev, abs(hawking_mass(geom) - m))
    checks.append(Check("Hawking mass of coordinate spheres = m", dev <= 1e-8,
                        f"max |m_H - m| = {dev:.2e} over 20 spheres"))

    worst = 0.0
    for sv in (0.5, 1.5, 3.0):
        D = linearized_mean_curvature(metric, sv, grid)
        rv = float(model.radius(sv))
        for l in range(6):
            for mm in range(-l, l + 1):
                k = index(l, mm)
                ref = -float(model.jacobi_spectrum(rv, l))
                worst = max(worst, abs(D[k, k] - ref) / abs(ref))
    checks.append(Check("linearized mean curvature on Y_lm, l <= 5", worst <= 1e-4,
                        f"max relative error = {worst:.2e}"))

    worst = 0.0
    for sv in (0.5, 2.0, 4.0):
        surf = GraphSurface(sv, SphereField.zeros(grid), metric)
        sol = CmcSolution(surf, float(model.mean_curvature_at(sv)), [0.0], True, "free")
        rv = float(model.radius(sv))
        lam = stability_eigenvalue(sol)
        worst = max(worst, abs(lam - 6 * m / rv**3) / (6 * m / rv**3))
    checks.append(Check("stability eigenvalue = 6m/r^3", worst <= 1e-6,
                        f"max relative error = {worst:.2e}"))

    sv = np.array([5.0, 6.0, 7.0])
    sig = model.hyperbolic_coordinate(sv)
    coef = (model.v_profile(sv) - 1.0) * 3.0 * np.sinh(sig) ** 3 / (2.0 * m)
    err = float(np.max(np.abs(coef - 1.0)))
    checks.append(Check("v_m leading coefficient 2m/3", err <= 1e-3,
                        f"max |coef/(2m/3) - 1| = {err:.2e} for s in 5..7"))

    rr = model.r0 * np.logspace(1e-7, 4, n_points)
    back = model.radius(model.s_of_r(rr))
    err = float(np.max(np.abs(back - rr) / rr))
    checks.append(Check("s <-> r round trip", err <= 1e-9, f"max relative error = {err:.2e}"))
    return checks
