"""Pointwise mean curvature of graphs ``s = s0 + u(x)``.

Inputs per point: metric ``g[A, B]``, derivatives ``dg[C, A, B]`` and the
graph jet ``du = (u_t, u_p, u_tt, u_tp, u_pp)``.  The normal covector is
``ds - u_t dtheta - u_p dphi`` and ``A_ij = -(u_ij + Gamma(E_i, E_j) . n)/|n|``.

``mean_curvature`` dispatches to a numba loop when available and to an
einsum formulation otherwise; both are exported for benchmarking.
"""
import numpy as np

from ._accel import njit, use_numba
from .metric import inv3


def mean_curvature_numpy(g, dg, du):
    """Einsum formulation; works in any float dtype (including longdouble)."""
    ginv = inv3(g)
    n = np.zeros(g.shape[:-1], dtype=g.dtype)
    n[..., 0] = 1.0
    n[..., 1] = -du[..., 0]
    n[..., 2] = -du[..., 1]
    nt = np.einsum("...ab,...b->...a", ginv, n)
    nn = np.einsum("...a,...a->...", n, nt)
    E = np.zeros(g.shape[:-2] + (2, 3), dtype=g.dtype)
    E[..., 0, 0] = du[..., 0]
    E[..., 0, 1] = 1.0
    E[..., 1, 0] = du[..., 1]
    E[..., 1, 2] = 1.0
    low = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    proj = np.einsum("...d,...dbc->...bc", nt, low)
    S = np.einsum("...ib,...bc,...jc->...ij", E, proj, E)
    gh = np.einsum("...ib,...bc,...jc->...ij", E, g, E)
    uij = np.stack([np.stack([du[..., 2], du[..., 3]], -1),
                    np.stack([du[..., 3], du[..., 4]], -1)], -2)
    A = -(uij + S) / np.sqrt(nn)[..., None, None]
    det = gh[..., 0, 0] * gh[..., 1, 1] - gh[..., 0, 1] ** 2
    return (gh[..., 1, 1] * A[..., 0, 0] + gh[..., 0, 0] * A[..., 1, 1]
            - 2.0 * gh[..., 0, 1] * A[..., 0, 1]) / det


@njit(cache=True)
def _mean_curvature_loop(g, dg, du, out):
    ginv = np.empty((3, 3))
    low = np.empty((3, 3, 3))
    nt = np.empty(3)
    n = np.empty(3)
    E = np.zeros((2, 3))
    for p in range(g.shape[0]):
        a00 = g[p, 0, 0]
        a01 = g[p, 0, 1]
        a02 = g[p, 0, 2]
        a11 = g[p, 1, 1]
        a12 = g[p, 1, 2]
        a22 = g[p, 2, 2]
        c00 = a11 * a22 - a12 * a12
        c01 = a02 * a12 - a01 * a22
        c02 = a01 * a12 - a02 * a11
        det = a00 * c00 + a01 * c01 + a02 * c02
        ginv[0, 0] = c00 / det
        ginv[0, 1] = ginv[1, 0] = c01 / det
        ginv[0, 2] = ginv[2, 0] = c02 / det
        ginv[1, 1] = (a00 * a22 - a02 * a02) / det
        ginv[1, 2] = ginv[2, 1] = (a01 * a02 - a00 * a12) / det
        ginv[2, 2] = (a00 * a11 - a01 * a01) / det
        ut = du[p, 0]
        up = du[p, 1]
        n[0] = 1.0
        n[1] = -ut
        n[2] = -up
        nn = 0.0
        for a in range(3):
            acc = 0.0
            for b in range(3):
                acc += ginv[a, b] * n[b]
            nt[a] = acc
            nn += n[a] * acc
        for d in range(3):
            for b in range(3):
                for c in range(3):
                    low[d, b, c] = 0.5 * (dg[p, b, d, c] + dg[p, c, d, b] - dg[p, d, b, c])
        E[0, 0] = ut
        E[0, 1] = 1.0
        E[1, 0] = up
        E[1, 2] = 1.0
        gh00 = 0.0
        gh01 = 0.0
        gh11 = 0.0
        s00 = 0.0
        s01 = 0.0
        s11 = 0.0
        for b in range(3):
            for c in range(3):
                pr = 0.0
                for d in range(3):
                    pr += nt[d] * low[d, b, c]
                gbc = g[p, b, c]
                gh00 += E[0, b] * gbc * E[0, c]
                gh01 += E[0, b] * gbc * E[1, c]
                gh11 += E[1, b] * gbc * E[1, c]
                s00 += E[0, b] * pr * E[0, c]
                s01 += E[0, b] * pr * E[1, c]
                s11 += E[1, b] * pr * E[1, c]
        inv_n = 1.0 / np.sqrt(nn)
        A00 = -(du[p, 2] + s00) * inv_n
        A01 = -(du[p, 3] + s01) * inv_n
        A11 = -(du[p, 4] + s11) * inv_n
        dh = gh00 * gh11 - gh01 * gh01
        out[p] = (gh11 * A00 + gh00 * A11 - 2.0 * gh01 * A01) / dh


def mean_curvature_numba(g, dg, du):
    shape = g.shape[:-2]
    g2 = np.ascontiguousarray(g.reshape(-1, 3, 3))
    dg2 = np.ascontiguousarray(dg.reshape(-1, 3, 3, 3))
    du2 = np.ascontiguousarray(du.reshape(-1, 5))
    out = np.empty(g2.shape[0])
    _mean_curvature_loop(g2, dg2, du2, out)
    return out.reshape(shape)


def mean_curvature(g, dg, du):
    if use_numba() and g.dtype == np.float64:
        return mean_curvature_numba(g, dg, du)
    return mean_curvature_numpy(g, dg, du)
