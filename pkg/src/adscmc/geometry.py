"""Geometry of graph surfaces ``S_s(u) = {(s + u(x), x)}``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, GeometryError
from .metric import det3, inv3, ricci_from, scalar_from
from .sphere import SphereField

JET1 = ("t", "p", "tt", "tp", "pp")
JET3 = ("", "t", "p", "tt", "tp", "pp", "ttt", "ttp", "tpp", "ppp")


@dataclass
class GraphSurface:
    s_base: float
    u: SphereField
    metric: object

    def __post_init__(self):
        if self.s_inner < -self.metric.s_collar:
            raise DomainError("graph leaves the extended chart")

    @property
    def grid(self):
        return self.u.grid

    @property
    def s_inner(self):
        return self.s_base + float(np.min(self.u.values))

    @property
    def s_outer(self):
        return self.s_base + float(np.max(self.u.values))


@dataclass
class SurfaceGeometry:
    """Node-wise geometric data; area element is relative to ``dS^2``."""

    surface: GraphSurface
    s_points: np.ndarray
    induced: np.ndarray
    induced_inv: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    H: np.ndarray
    A_sq: np.ndarray
    tracefree_sq: np.ndarray
    area_element: np.ndarray
    area: float
    gaussK: np.ndarray
    ds_tangential_sq: np.ndarray
    ric_NN: np.ndarray
    scalar: np.ndarray
    metric_g: np.ndarray

    def integrate(self, values):
        """``int values dSigma`` in the working precision of the geometry."""
        w = self.surface.grid.weights.astype(self.area_element.dtype)
        # np.dot is not accurately summed for longdouble
        return np.sum(w * (np.asarray(values) * self.area_element))

    def field(self, name):
        return SphereField(self.surface.grid, values=getattr(self, name))


def graph_jet(u, names=JET1):
    return np.stack([u.derivative(n) if n else u.values for n in names], axis=-1)


def mean_curvature_values(metric, grid, s_points, du, extended=False):
    """Mean curvature for one or a batch of graphs (leading batch axes)."""
    ang = metric.angular_on(grid)
    g, dg, _ = metric.evaluate(s_points, ang, order=1, extended=extended)
    return kernels.mean_curvature(g, dg, du.astype(g.dtype))


def mean_curvature(s, u, metric):
    grid = u.grid
    H = mean_curvature_values(metric, grid, s + u.values, graph_jet(u))
    return SphereField(grid, values=H)


def compute_geometry(surface, curvature=True, extended=True):
    """Full extrinsic/intrinsic data on the grid nodes.

    ``extended`` evaluates in ``np.longdouble``; the returned arrays keep that
    dtype so integrals such as ``int (H^2 - 4) dSigma`` over large leaves
    retain their leading digits.
    """
    u, metric, grid = surface.u, surface.metric, surface.grid
    J = graph_jet(u, JET3)
    s_pts = surface.s_base + J[:, 0]
    ang = metric.angular_on(grid)
    g, dg, ddg = metric.evaluate(s_pts, ang, order=2 if curvature else 1, extended=extended)
    J = J.astype(g.dtype)
    uv, ut, up, utt, utp, upp = (J[:, i] for i in range(6))
    npt = grid.size

    E = np.zeros((npt, 2, 3), dtype=g.dtype)
    E[:, 0, 0], E[:, 0, 1] = ut, 1.0
    E[:, 1, 0], E[:, 1, 2] = up, 1.0
    gh = np.einsum("nia,nab,njb->nij", E, g, E)
    det = gh[:, 0, 0] * gh[:, 1, 1] - gh[:, 0, 1] ** 2
    if np.any(det <= 0.0):
        raise GeometryError("degenerate induced metric")
    ghi = np.stack([np.stack([gh[:, 1, 1], -gh[:, 0, 1]], -1),
                    np.stack([-gh[:, 0, 1], gh[:, 0, 0]], -1)], -2) / det[:, None, None]

    ginv = inv3(g)
    n = np.stack([np.ones_like(ut), -ut, -up], axis=-1)
    nt = np.einsum("nab,nb->na", ginv, n)
    nlen = np.sqrt(np.einsum("na,na->n", n, nt))
    normal = nt / nlen[:, None]
    low = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    S = np.einsum("nia,nd,ndab,njb->nij", E, nt, low, E)
    uij = np.stack([np.stack([utt, utp], -1), np.stack([utp, upp], -1)], -2)
    A = -(uij + S) / nlen[:, None, None]
    H = np.einsum("nij,nij->n", ghi, A)
    A_sq = np.einsum("nik,njl,nij,nkl->n", ghi, ghi, A, A)
    ring = A - 0.5 * H[:, None, None] * gh
    ring_sq = np.einsum("nik,njl,nij,nkl->n", ghi, ghi, ring, ring)
    x = grid.cos_theta.astype(g.dtype)
    dsig = np.sqrt(det) / np.sqrt((1 - x) * (1 + x))
    area = np.sum(grid.weights.astype(g.dtype) * dsig)

    V = np.einsum("na,nia->ni", g[:, 0, :], E)
    tan_sq = np.einsum("nij,ni,nj->n", ghi, V, V)

    if curvature:
        K = _gauss_curvature(J, g, dg, ddg, E, gh)
        ric = ricci_from(g, dg, ddg)
        ric_nn = np.einsum("nab,na,nb->n", ric, normal, normal)
        R = scalar_from(g, ric)
    else:
        K = ric_nn = R = np.full(npt, np.nan, dtype=g.dtype)
    return SurfaceGeometry(surface, s_pts, gh, ghi, normal, A, H, A_sq, ring_sq, dsig,
                           area, K, tan_sq, ric_nn, R, g)


def _gauss_curvature(J, g, dg, ddg, E, gh):
    """Brioschi formula with surface derivatives of the induced metric."""
    npt = J.shape[0]
    ut, up, utt, utp, upp, uttt, uttp, utpp, uppp = (J[:, i] for i in range(1, 10))
    du = np.stack([ut, up], -1)
    ddu = np.stack([np.stack([utt, utp], -1), np.stack([utp, upp], -1)], -2)
    dddu = np.empty((npt, 2, 2, 2), dtype=J.dtype)
    third = {(0, 0, 0): uttt, (0, 0, 1): uttp, (0, 1, 1): utpp, (1, 1, 1): uppp}
    for k in range(2):
        for i in range(2):
            for j in range(2):
                dddu[:, k, i, j] = third[tuple(sorted((k, i, j)))]

    # total derivatives of g_AB(s0 + u(x), x) along the sphere coordinates
    Dg = dg[:, 1:, :, :] + du[:, :, None, None] * dg[:, None, 0, :, :]
    DDg = (ddg[:, 1:, 1:, :, :]
           + du[:, None, :, None, None] * ddg[:, None, 0, 1:, :, :].swapaxes(1, 2)
           + du[:, :, None, None, None] * ddg[:, 1:, None, 0, :, :].swapaxes(1, 2)
           + (du[:, :, None] * du[:, None, :])[..., None, None] * ddg[:, None, None, 0, 0]
           + ddu[..., None, None] * dg[:, None, None, 0])
    e0 = np.array([1.0, 0.0, 0.0], dtype=J.dtype)
    dE = ddu[..., None] * e0          # dE[k, i] = u_ik e_s
    ddE = dddu[..., None] * e0        # ddE[k, l, i] = u_ikl e_s

    dgh = (np.einsum("nkab,nia,njb->nkij", Dg, E, E)
           + np.einsum("nab,nkia,njb->nkij", g, dE, E)
           + np.einsum("nab,nia,nkjb->nkij", g, E, dE))
    ddgh = (np.einsum("nklab,nia,njb->nklij", DDg, E, E)
            + np.einsum("nkab,nlia,njb->nklij", Dg, dE, E)
            + np.einsum("nkab,nia,nljb->nklij", Dg, E, dE)
            + np.einsum("nlab,nkia,njb->nklij", Dg, dE, E)
            + np.einsum("nab,nklia,njb->nklij", g, ddE, E)
            + np.einsum("nab,nkia,nljb->nklij", g, dE, dE)
            + np.einsum("nlab,nia,nkjb->nklij", Dg, E, dE)
            + np.einsum("nab,nlia,nkjb->nklij", g, dE, dE)
            + np.einsum("nab,nia,nkljb->nklij", g, E, ddE))

    Ee, Ff, Gg = gh[:, 0, 0], gh[:, 0, 1], gh[:, 1, 1]
    Eu, Ev = dgh[:, 0, 0, 0], dgh[:, 1, 0, 0]
    Fu, Fv = dgh[:, 0, 0, 1], dgh[:, 1, 0, 1]
    Gu, Gv = dgh[:, 0, 1, 1], dgh[:, 1, 1, 1]
    Evv, Fuv, Guu = ddgh[:, 1, 1, 0, 0], ddgh[:, 0, 1, 0, 1], ddgh[:, 0, 0, 1, 1]
    z = np.zeros(npt, dtype=J.dtype)
    M1 = np.stack([np.stack([-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev], -1),
                   np.stack([Fv - 0.5 * Gu, Ee, Ff], -1),
                   np.stack([0.5 * Gv, Ff, Gg], -1)], -2)
    M2 = np.stack([np.stack([z, 0.5 * Ev, 0.5 * Gu], -1),
                   np.stack([0.5 * Ev, Ee, Ff], -1),
                   np.stack([0.5 * Gu, Ff, Gg], -1)], -2)
    return (det3(M1) - det3(M2)) / (Ee * Gg - Ff**2) ** 2


def hawking_mass_from(area, integral_H2_minus_4):
    four_pi = 4 * np.asarray(np.pi, dtype=np.asarray(area).dtype)
    return float(np.sqrt(area / (4 * four_pi)) * (1 - integral_H2_minus_4 / (4 * four_pi)))


def hawking_mass(geom):
    return hawking_mass_from(geom.area, geom.integrate(geom.H**2 - 4))


def gauss_equation_residual(geom):
    return 2.0 * geom.gaussK - (geom.scalar - 2.0 * geom.ric_NN + geom.H**2 - geom.A_sq)
