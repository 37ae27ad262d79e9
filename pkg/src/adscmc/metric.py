"""Perturbed metrics ``g = g_m + eps h`` on the chart ``(s, theta, phi)``.

The perturbation is

    h = w_a(s) a(x) ds^2 + 2 w_c(s) r(s) dc(x) . ds + w_b(s) b(x) r(s)^2 g0

with angular factors ``a, b, c`` given by a few real harmonic coefficients and
radial profiles from :mod:`adscmc.profiles`.  Component arrays use the layout
``g[..., A, B]``, ``dg[..., C, A, B] = d_C g_AB`` and
``ddg[..., C, D, A, B] = d_C d_D g_AB``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .background import BackgroundModel
from .errors import DegeneracyError, DomainError, UnsupportedError
from .profiles import get_profile
from .sphere import DERIVATIVES, real_harmonics

S_COLLAR = 0.2

_Y00 = math.sqrt(4.0 * math.pi)
_Y20_UNIT = math.sqrt(4.0 * math.pi / 5.0)  # coefficient of Y_20 giving P_2(cos theta)


@dataclass(frozen=True)
class PerturbationSpec:
    """Closed-form perturbation; angular factors are ``((l, m, coef), ...)``."""

    family: str = "background"
    epsilon: float = 0.0
    a: tuple = ()
    b: tuple = ()
    c: tuple = ()
    profile_ss: str = "zero"
    profile_sphere: str = "zero"
    profile_cross: str = "zero"
    params: dict = field(default_factory=dict, compare=False)

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=float(epsilon))

    @property
    def analytic(self):
        return True

    @property
    def boundary_flat(self):
        return all(get_profile(p).boundary_flat or not coeffs for p, coeffs in
                   ((self.profile_ss, self.a), (self.profile_sphere, self.b),
                    (self.profile_cross, self.c)))


def background_family():
    return PerturbationSpec()


def standard_family(epsilon=1e-3, shape=0.1):
    """Spherical mass deficit with a ``P_2`` angular modulation of size ``shape``.

    The spherical part has first-order scalar curvature ``R + 6 > 0`` and a
    strictly increasing Hawking mass on coordinate spheres; small ``shape``
    keeps ``min(R + 6)`` non-negative at working precision.
    """
    ang = ((0, 0, _Y00), (2, 0, shape * _Y20_UNIT))
    return PerturbationSpec("standard", float(epsilon), a=ang, b=ang,
                            profile_ss="deficit_radial", profile_sphere="deficit_sphere",
                            params={"shape": shape})


def sphere_block_family(epsilon=1e-3, l=2, m=0, profile="tanh2_sech4"):
    """Sphere-block perturbation ``w(s) Y_lm r^2 g0`` (sign of R + 6 not controlled)."""
    return PerturbationSpec("sphere_block", float(epsilon), b=((l, m, 1.0),),
                            profile_sphere=profile, params={"l": l, "m": m})


def broken_boundary_family(epsilon=1e-3):
    """Isotropic sphere-block perturbation with unit slope at the horizon."""
    return PerturbationSpec("broken_boundary", float(epsilon), b=((0, 0, _Y00),),
                            profile_sphere="tanh_sech4")


def cross_term_family(epsilon=1e-3, l=2, m=1, profile="tanh2_sech4"):
    """Off-diagonal ``ds dx^i`` perturbation along ``d Y_lm``."""
    return PerturbationSpec("cross_term", float(epsilon), c=((l, m, 1.0),),
                            profile_cross=profile, params={"l": l, "m": m})


FAMILIES = {
    "background": lambda epsilon=0.0, **kw: background_family(),
    "standard": standard_family,
    "sphere_block": sphere_block_family,
    "broken_boundary": broken_boundary_family,
    "cross_term": cross_term_family,
}


def _angular_fn(coeffs, ang, names):
    if not coeffs:
        z = np.zeros(np.broadcast(ang.theta, ang.phi).shape)
        return {n: z for n in names}
    L = max(l for l, _, _ in coeffs)
    vec = np.zeros((L + 1) ** 2)
    for l, m, c in coeffs:
        vec[l * l + l + m] += c
    Y = real_harmonics(L, ang.theta, ang.phi, names, cos=ang.cos, sin=ang.sin)
    return {n: Y[n] @ vec for n in names}


class AngularData:
    """Angular factors and their derivatives at fixed nodes.

    Nodes are identified by ``cos(theta)``; ``sin(theta)`` is always derived
    from it so that extended-precision evaluations stay consistent.
    """

    def __init__(self, spec, theta, phi, cos=None):
        self.theta = np.asarray(theta, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.cos = np.cos(self.theta) if cos is None else np.asarray(cos, dtype=float)
        self.sin = self.sin_in(np.float64)
        self.a = _angular_fn(spec.a, self, DERIVATIVES[:6])
        self.b = _angular_fn(spec.b, self, DERIVATIVES[:6])
        self.c = _angular_fn(spec.c, self, DERIVATIVES[1:])
        self.has_c = bool(spec.c)

    def sin_in(self, dtype):
        x = self.cos.astype(dtype)
        return np.sqrt((1 - x) * (1 + x))


class PerturbedMetric:
    """``g_m + eps h`` with closed-form first and second derivatives."""

    def __init__(self, model, spec=None, s_collar=S_COLLAR, check=True):
        if not isinstance(model, BackgroundModel):
            model = BackgroundModel(float(model))
        self.model = model
        self.spec = spec if spec is not None else background_family()
        self.s_collar = float(s_collar)
        self.eps = float(self.spec.epsilon)
        self._pa = get_profile(self.spec.profile_ss)
        self._pb = get_profile(self.spec.profile_sphere)
        self._pc = get_profile(self.spec.profile_cross)
        self._cache = {}
        if check:
            self._probe_spd()

    @property
    def is_background(self):
        return self.eps == 0.0 or not (self.spec.a or self.spec.b or self.spec.c)

    def angular(self, theta, phi, key=None, cos=None):
        if key is not None and key in self._cache:
            return self._cache[key]
        data = AngularData(self.spec, theta, phi, cos=cos)
        if key is not None:
            self._cache[key] = data
        return data

    def angular_on(self, grid):
        return self.angular(grid.theta, grid.phi, key=("grid", grid.L, grid.n_theta, grid.n_phi),
                            cos=grid.cos_theta)

    def _probe_spd(self):
        th = np.linspace(0.05, np.pi - 0.05, 9)
        ph = np.linspace(0.0, 2 * np.pi, 12, endpoint=False)
        T, P = np.meshgrid(th, ph, indexing="ij")
        ang = self.angular(T.ravel(), P.ravel())
        s = np.linspace(-self.s_collar, 12.0, 61)[:, None]
        g = self.evaluate(s, ang, order=0)[0]
        gram = g / np.sqrt(np.einsum("...ii->...i", g)[..., :, None]
                           * np.einsum("...ii->...i", g)[..., None, :])
        if np.min(np.linalg.eigvalsh(gram)) <= 0.0:
            raise DegeneracyError("perturbed metric is not positive definite on the probe grid")

    def evaluate(self, s, ang, order=1, extended=False):
        """Metric and derivatives at ``(s, ang.theta, ang.phi)``.

        ``s`` broadcasts against the angular node arrays.  Returns
        ``(g, dg, ddg)`` with entries ``None`` above ``order``.  With
        ``extended=True`` the arrays are ``np.longdouble`` and ``rho`` is
        recomputed from ``r`` so the pair satisfies the radial identity to
        extended precision (needed where ``H^2 - 4`` is integrated over large
        spheres).
        """
        model, eps = self.model, self.eps
        s = np.asarray(s, dtype=float)
        if np.any(s < -self.s_collar - 1e-12):
            raise DomainError(f"s must be >= -{self.s_collar}")
        shape = np.broadcast(s, ang.theta).shape
        s = np.broadcast_to(s, shape)
        r, rho, racc, _ = model.radius_jet(s)
        A = {k: np.broadcast_to(v, shape) for k, v in ang.a.items()}
        B = {k: np.broadcast_to(v, shape) for k, v in ang.b.items()}
        wa, wa1, wa2 = self._pa.jet(model, s, r, rho)
        wb, wb1, wb2 = self._pb.jet(model, s, r, rho)
        dtype = np.longdouble if extended else np.float64
        if extended:
            # promote before forming 1 + eps*w*a, which would round in double
            wa, wa1, wa2, wb, wb1, wb2 = (x.astype(dtype) for x in (wa, wa1, wa2, wb, wb1, wb2))
            A = {k: v.astype(dtype) for k, v in A.items()}
            B = {k: v.astype(dtype) for k, v in B.items()}
            r = r.astype(dtype)
            r0 = dtype(model.r0)
            q = r + r0 + 2 * dtype(model.m) / (r * r0)
            rho = np.where(s < 0, -1, 1) * np.sqrt((r - r0) * q)
            racc = r + dtype(model.m) / (r * r)
            sn = np.broadcast_to(ang.sin_in(dtype), shape)
            cs = np.broadcast_to(ang.cos.astype(dtype), shape)
        else:
            sn = np.broadcast_to(ang.sin, shape)
            cs = np.broadcast_to(ang.cos, shape)

        F = r * r
        F1 = 2.0 * r * rho
        F2 = 2.0 * rho * rho + 2.0 * r * racc
        Bf = 1.0 + eps * wb * B[""]
        phi_ = F * Bf
        S2 = sn * sn
        S2t = 2.0 * sn * cs

        g = np.zeros(shape + (3, 3), dtype=dtype)
        g[..., 0, 0] = 1.0 + eps * wa * A[""]
        g[..., 1, 1] = phi_
        g[..., 2, 2] = phi_ * S2
        if ang.has_c:
            C = {k: np.broadcast_to(v, shape) for k, v in ang.c.items()}
            wc, wc1, wc2 = (x.astype(dtype) for x in self._pc.jet(model, s, r, rho))
            G = wc * r
            g[..., 0, 1] = g[..., 1, 0] = eps * G * C["t"]
            g[..., 0, 2] = g[..., 2, 0] = eps * G * C["p"]
        if order == 0:
            return g, None, None

        phi_s = F1 * Bf + F * eps * wb1 * B[""]
        phi_t = F * eps * wb * B["t"]
        phi_p = F * eps * wb * B["p"]
        dg = np.zeros(shape + (3, 3, 3), dtype=dtype)
        dg[..., 0, 0, 0] = eps * wa1 * A[""]
        dg[..., 1, 0, 0] = eps * wa * A["t"]
        dg[..., 2, 0, 0] = eps * wa * A["p"]
        dg[..., 0, 1, 1] = phi_s
        dg[..., 1, 1, 1] = phi_t
        dg[..., 2, 1, 1] = phi_p
        dg[..., 0, 2, 2] = phi_s * S2
        dg[..., 1, 2, 2] = phi_t * S2 + phi_ * S2t
        dg[..., 2, 2, 2] = phi_p * S2
        if ang.has_c:
            G1 = wc1 * r + wc * rho
            for i, (ci, cit, cip) in enumerate((("t", "tt", "tp"), ("p", "tp", "pp")), start=1):
                vals = (eps * G1 * C[ci], eps * G * C[cit], eps * G * C[cip])
                for d in range(3):
                    dg[..., d, 0, i] = dg[..., d, i, 0] = vals[d]
        if order == 1:
            return g, dg, None

        phi_ss = F2 * Bf + 2.0 * F1 * eps * wb1 * B[""] + F * eps * wb2 * B[""]
        mix = eps * (F1 * wb + F * wb1)
        phi_st = mix * B["t"]
        phi_sp = mix * B["p"]
        phi_tt = F * eps * wb * B["tt"]
        phi_tp = F * eps * wb * B["tp"]
        phi_pp = F * eps * wb * B["pp"]
        S2tt = 2.0 * (cs * cs - sn * sn)
        ddg = np.zeros(shape + (3, 3, 3, 3), dtype=dtype)

        def put(c, d, a, b, val):
            ddg[..., c, d, a, b] = val
            ddg[..., d, c, a, b] = val
            if a != b:
                ddg[..., c, d, b, a] = val
                ddg[..., d, c, b, a] = val

        put(0, 0, 0, 0, eps * wa2 * A[""])
        put(0, 1, 0, 0, eps * wa1 * A["t"])
        put(0, 2, 0, 0, eps * wa1 * A["p"])
        put(1, 1, 0, 0, eps * wa * A["tt"])
        put(1, 2, 0, 0, eps * wa * A["tp"])
        put(2, 2, 0, 0, eps * wa * A["pp"])
        put(0, 0, 1, 1, phi_ss)
        put(0, 1, 1, 1, phi_st)
        put(0, 2, 1, 1, phi_sp)
        put(1, 1, 1, 1, phi_tt)
        put(1, 2, 1, 1, phi_tp)
        put(2, 2, 1, 1, phi_pp)
        put(0, 0, 2, 2, phi_ss * S2)
        put(0, 1, 2, 2, phi_st * S2 + phi_s * S2t)
        put(0, 2, 2, 2, phi_sp * S2)
        put(1, 1, 2, 2, phi_tt * S2 + 2.0 * phi_t * S2t + phi_ * S2tt)
        put(1, 2, 2, 2, phi_tp * S2 + phi_p * S2t)
        put(2, 2, 2, 2, phi_pp * S2)
        if ang.has_c:
            G2 = wc2 * r + 2.0 * wc1 * rho + wc * racc
            for i, ci in ((1, "t"), (2, "p")):
                def c_of(extra):
                    return C["".join(sorted(ci + extra, key="tp".index))]
                put(0, 0, 0, i, eps * G2 * C[ci])
                put(0, 1, 0, i, eps * G1 * c_of("t"))
                put(0, 2, 0, i, eps * G1 * c_of("p"))
                put(1, 1, 0, i, eps * G * c_of("tt"))
                put(1, 2, 0, i, eps * G * c_of("tp"))
                put(2, 2, 0, i, eps * G * c_of("pp"))
        return g, dg, ddg

    def metric_at(self, s, theta, phi, order=2):
        ang = self.angular(np.atleast_1d(theta), np.atleast_1d(phi))
        return self.evaluate(np.atleast_1d(s), ang, order=order)


# -- curvature from component arrays ------------------------------------------

def inv3(g):
    """Inverse of symmetric 3x3 blocks by cofactors (any float dtype)."""
    a00, a01, a02 = g[..., 0, 0], g[..., 0, 1], g[..., 0, 2]
    a11, a12, a22 = g[..., 1, 1], g[..., 1, 2], g[..., 2, 2]
    c00 = a11 * a22 - a12 * a12
    c01 = a02 * a12 - a01 * a22
    c02 = a01 * a12 - a02 * a11
    c11 = a00 * a22 - a02 * a02
    c12 = a01 * a02 - a00 * a12
    c22 = a00 * a11 - a01 * a01
    det = a00 * c00 + a01 * c01 + a02 * c02
    out = np.stack([np.stack([c00, c01, c02], -1),
                    np.stack([c01, c11, c12], -1),
                    np.stack([c02, c12, c22], -1)], -2)
    return out / det[..., None, None]


def det3(M):
    return (M[..., 0, 0] * (M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1])
            - M[..., 0, 1] * (M[..., 1, 0] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 0])
            + M[..., 0, 2] * (M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0]))


def christoffel_lowered(dg):
    """``Gamma_{D,BC}`` from ``dg[..., C, A, B]``."""
    return 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1)
                  - dg)


def christoffel_from(g, dg):
    ginv = np.linalg.inv(g)
    return np.einsum("...ad,...dbc->...abc", ginv, christoffel_lowered(dg))


def ricci_from(g, dg, ddg):
    ginv = inv3(g)
    low = christoffel_lowered(dg)
    gam = np.einsum("...ad,...dbc->...abc", ginv, low)
    # d_E Gamma_{D,BC}
    dlow = 0.5 * (np.swapaxes(ddg, -3, -2) + np.moveaxis(ddg, -3, -1) - ddg)
    dginv = -np.einsum("...ap,...epq,...qd->...ead", ginv, dg, ginv)
    dgam = (np.einsum("...ead,...dbc->...eabc", dginv, low)
            + np.einsum("...ad,...edbc->...eabc", ginv, dlow))
    ric = (np.einsum("...aabc->...bc", dgam) - np.einsum("...caba->...bc", dgam)
           + np.einsum("...aad,...dbc->...bc", gam, gam)
           - np.einsum("...acd,...dba->...bc", gam, gam))
    return ric


def scalar_from(g, ric):
    return np.einsum("...bc,...bc->...", inv3(g), ric)


def christoffel(metric, s, theta, phi):
    g, dg, _ = metric.metric_at(s, theta, phi, order=1)
    return christoffel_from(g, dg)


def ricci(metric, s, theta, phi):
    g, dg, ddg = metric.metric_at(s, theta, phi, order=2)
    return ricci_from(g, dg, ddg)


def scalar_curvature(metric, s, theta, phi):
    g, dg, ddg = metric.metric_at(s, theta, phi, order=2)
    return scalar_from(g, ricci_from(g, dg, ddg))


def min_scalar_excess(metric, s_values, n_theta=17, n_phi=24):
    """``min(R + 6)`` over a tensor probe grid in ``(s, theta, phi)``."""
    x, _ = np.polynomial.legendre.leggauss(n_theta)
    T, P = np.meshgrid(np.arccos(x), 2 * np.pi * np.arange(n_phi) / n_phi, indexing="ij")
    ang = metric.angular(T.ravel(), P.ravel())
    s = np.asarray(s_values, dtype=float)[:, None]
    g, dg, ddg = metric.evaluate(s, ang, order=2)
    return float(np.min(scalar_from(g, ricci_from(g, dg, ddg)) + 6.0))


# -- membership diagnostics -----------------------------------------------------

def boundary_minimality_check(metric, grid=None):
    """Sup norm of the mean curvature of the horizon sphere ``s = 0``."""
    from .geometry import GraphSurface, compute_geometry
    from .sphere import SphereField, SphereGrid

    grid = grid or SphereGrid(15)
    surf = GraphSurface(0.0, SphereField.zeros(grid), metric)
    return float(np.max(np.abs(compute_geometry(surf).H)))


def decay_distance(metric, s_max=12.0, n_s=97, n_theta=6, n_phi=8):
    """``sup_points sum_{i<=3} e^{4s} |(nabla^m)^i (g - g_m)|_{g_m}``.

    Covariant derivatives are taken with automatic differentiation (jax) of
    the closed-form perturbation.  Only built-in families are supported.
    """
    if not getattr(metric.spec, "analytic", False):
        raise UnsupportedError("decay distance needs an analytic built-in family")
    if metric.is_background:
        return 0.0
    from ._decay import decay_distance_jax

    return decay_distance_jax(metric, s_max, n_s, n_theta, n_phi)
