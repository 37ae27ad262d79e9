"""Newton solvers for constant-mean-curvature graphs over coordinate spheres.

Two maps are solved:

* free:       ``Phi(u) = H(s, u) - mean(H(s, u))`` on zero-mean ``u``;
* prescribed: ``Psi(u) = H(s, u) - target`` on all of ``u``.

Both are discretized by Galerkin projection onto real harmonics of degree
``<= L``.  The Newton loop runs in double precision.  Once it meets the
tolerance, up to ``settings.polish`` extra steps use a residual evaluated in
extended precision.  Such a step is kept only if it lowers that residual
several-fold.  On large spheres the ``l = 1`` modes have Jacobi eigenvalue
``6m/r^3``, so plain double rounding in ``H`` would otherwise show up
amplified by ``r^3`` in ``u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DivergenceError, LinearSolveError, ResonanceError
from .geometry import GraphSurface, compute_geometry, graph_jet, mean_curvature_values
from .sphere import SphereField

_JETS = ("", "t", "p", "tt", "tp", "pp")
_LD_EPS = float(np.finfo(np.longdouble).eps)


@dataclass(frozen=True)
class SolveSettings:
    tol: float = 1e-10
    max_iter: int = 12
    fd_step: float = 1e-6
    max_halvings: int = 5
    jacobian: str = "pointwise"
    pointwise_step: float = 1e-4
    polish: int = 2

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.jacobian not in ("pointwise", "basis"):
            raise ValueError("jacobian must be 'pointwise' or 'basis'")


@dataclass
class CmcSolution:
    surface: GraphSurface
    H_const: float
    residuals: list
    converged: bool
    kind: str
    target: float | None = None
    polish_residuals: list = field(default_factory=list)
    _stability: float | None = field(default=None, repr=False)
    _geometry: object = field(default=None, repr=False)

    @property
    def s(self):
        return self.surface.s_base

    @property
    def u(self):
        return self.surface.u

    @property
    def iterations(self):
        return len(self.residuals) - 1

    @property
    def residual(self):
        return self.residuals[-1]

    def geometry(self):
        if self._geometry is None:
            self._geometry = compute_geometry(self.surface)
        return self._geometry

    @property
    def stability_eigenvalue(self):
        if self._stability is None:
            self._stability = stability_eigenvalue(self)
        return self._stability

    def convergence_order(self, floor=0.0):
        """Order ``log(r3/r2)/log(r2/r1)`` from the last three residuals above ``floor``."""
        r = [x for x in self.residuals if x > floor]
        if len(r) < 3:
            return None
        r1, r2, r3 = r[-3:]
        return math.log(r3 / r2) / math.log(r2 / r1)


class _Problem:
    """Residual and Jacobian of one solve at fixed base radius ``s``."""

    def __init__(self, metric, grid, s, free, target=None):
        self.metric, self.grid, self.s, self.free = metric, grid, float(s), free
        self.target = target
        self.A = grid.analysis_matrix
        self.first = 1 if free else 0

    def H(self, u, extended=False):
        return mean_curvature_values(self.metric, self.grid, self.s + u.values, graph_jet(u),
                                     extended=extended)

    def offset(self, H):
        if self.free:
            # normalized weighted mean: exact for constant H in any precision
            w = self.grid.weights.astype(H.dtype)
            return np.sum(w * H) / np.sum(w)
        return self.target

    def residual(self, u, extended=False):
        """Return ``(projected residual, sup-norm on nodes, H, H_const)``."""
        H = self.H(u, extended)
        c = self.offset(H)
        node = H - c
        proj = np.asarray(self.A @ node, dtype=float)[self.first:]
        return proj, float(np.max(np.abs(node))), H, float(c)

    def jacobian(self, u, settings):
        if settings.jacobian == "basis":
            full = self._basis_columns(u, settings.fd_step)
        else:
            full = self._pointwise_columns(u, settings.pointwise_step)
        return (self.A @ full)[self.first:, self.first:]

    def _pointwise_columns(self, u, h):
        # H at a node depends only on its own jet, so differentiate per node
        grid = self.grid
        jet = np.concatenate([self.s + u.values[:, None], graph_jet(u)], axis=1)
        steps = h * np.maximum(1.0, np.abs(jet).max(axis=0))
        probes = np.repeat(jet[None], 2 * len(_JETS), axis=0)
        for j in range(len(_JETS)):
            probes[2 * j, :, j] += steps[j]
            probes[2 * j + 1, :, j] -= steps[j]
        H = mean_curvature_values(self.metric, grid, probes[..., 0], probes[..., 1:])
        full = np.zeros((grid.size, grid.K))
        for j, name in enumerate(_JETS):
            d = (H[2 * j] - H[2 * j + 1]) / (2.0 * steps[j])
            full += d[:, None] * grid.basis(name)
        return full

    def _basis_columns(self, u, fd_step):
        grid = self.grid
        h = fd_step * max(1.0, float(np.max(np.abs(u.values))))
        K = grid.K
        base = np.concatenate([u.values[:, None], graph_jet(u)], axis=1)   # (N, 6)
        dirs = np.stack([grid.basis(n) for n in _JETS], axis=-1)          # (N, K, 6)
        plus = base[None] + h * np.moveaxis(dirs, 1, 0)
        minus = base[None] - h * np.moveaxis(dirs, 1, 0)
        probes = np.concatenate([plus, minus], axis=0)                     # (2K, N, 6)
        H = mean_curvature_values(self.metric, grid, self.s + probes[..., 0], probes[..., 1:])
        return ((H[:K] - H[K:]) / (2.0 * h)).T


def _newton(problem, u0, settings, kind):
    grid = problem.grid
    first = problem.first
    c = u0.coeffs.copy()
    if problem.free:
        c[0] = 0.0
    u = SphereField(grid, coeffs=c)
    F, res, _, _ = problem.residual(u)
    history = [res]
    J = None
    while res > settings.tol:
        if len(history) > settings.max_iter:
            raise DivergenceError(f"{kind} solve at s={problem.s:g} did not converge in "
                                  f"{settings.max_iter} iterations", history)
        J = problem.jacobian(u, settings)
        try:
            step = scipy.linalg.solve(J, -F)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise LinearSolveError(str(exc)) from None
        if not np.all(np.isfinite(step)):
            raise LinearSolveError("non-finite Newton step")
        lam = 1.0
        for _ in range(settings.max_halvings + 1):
            trial = c.copy()
            trial[first:] += lam * step
            ut = SphereField(grid, coeffs=trial)
            try:
                Ft, rt, _, _ = problem.residual(ut)
            except Exception:  # graph left the chart or became degenerate
                rt = np.inf
            if rt < res:
                break
            lam *= 0.5
        else:
            raise DivergenceError(f"{kind} solve at s={problem.s:g}: no decrease after "
                                  f"{settings.max_halvings} halvings", history + [rt])
        c, u, F, res = trial, ut, Ft, rt
        history.append(res)

    polish = []
    if settings.polish:
        Fx, rx, Hx, _ = problem.residual(u, extended=True)
        floor = 64.0 * _LD_EPS * float(np.max(np.abs(Hx)))
        polish.append(rx)
        for _ in range(settings.polish):
            if rx <= floor:
                break
            if J is None:
                J = problem.jacobian(u, settings)
            try:
                step = scipy.linalg.solve(J, -Fx)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                break
            trial = c.copy()
            trial[first:] += step
            ut = SphereField(grid, coeffs=trial)
            Ft, rt, _, _ = problem.residual(ut, extended=True)
            if not rt < 0.25 * rx:
                break
            c, u, Fx, rx = trial, ut, Ft, rt
            polish.append(rx)
    _, res, H, Hc = problem.residual(u)
    return u, Hc, history, polish


def _as_grid_field(u0, grid):
    if u0 is None:
        return SphereField.zeros(grid)
    if u0.grid is not grid:
        c = np.zeros(grid.K)
        n = min(grid.K, u0.grid.K)
        c[:n] = u0.coeffs[:n]
        return SphereField(grid, coeffs=c)
    return u0


def solve_free_cmc(s, metric, u0=None, settings=None, grid=None):
    """Constant-mean-curvature graph over ``S_s`` with ``int u dS^2 = 0``."""
    settings = settings or SolveSettings()
    if grid is None:
        if u0 is None:
            raise ValueError("give u0 or grid")
        grid = u0.grid
    u0 = _as_grid_field(u0, grid)
    s = float(s)
    if s < 0.0:
        raise ValueError("s must be non-negative")
    problem = _Problem(metric, grid, s, free=True)
    if s == 0.0:
        # the minimal boundary is the unique zero-mean solution at s = 0
        zero = SphereField.zeros(grid)
        _, res, H, Hc = problem.residual(zero)
        if float(np.max(np.abs(H))) <= 1e-9:
            return CmcSolution(GraphSurface(s, zero, metric), Hc, [res], True, "free")
    u, Hc, history, polish = _newton(problem, u0, settings, "free")
    return CmcSolution(GraphSurface(s, u, metric), Hc, history, True, "free",
                       polish_residuals=polish)


def resonance_guard(model, s, fraction=0.1):
    """Raise if ``r(s)`` lies within ``fraction * 3m`` of the resonant radius ``3m``."""
    r = float(model.radius(s))
    if abs(r - 3.0 * model.m) < fraction * 3.0 * model.m:
        raise ResonanceError(f"r(s)={r:.6g} within {fraction:g}*3m of the resonant radius 3m")


def solve_prescribed_cmc(s, metric, settings=None, grid=None, target=None, u0=None):
    """Graph over ``S_s`` with mean curvature ``target`` (default ``H_m(s)``)."""
    settings = settings or SolveSettings()
    model = metric.model
    s = float(s)
    resonance_guard(model, s)
    grid = grid or (u0.grid if u0 is not None else None)
    if grid is None:
        raise ValueError("give grid or u0")
    target = float(model.mean_curvature_at(s)) if target is None else float(target)
    problem = _Problem(metric, grid, s, free=False, target=target)
    u, Hc, history, polish = _newton(problem, _as_grid_field(u0, grid), settings, "prescribed")
    return CmcSolution(GraphSurface(s, u, metric), target, history, True, "prescribed",
                       target=target, polish_residuals=polish)


# -- second variation ----------------------------------------------------------

def jacobi_matrix(solution, geom=None):
    """Quadratic form ``-int L(phi) psi`` and mass matrix on ``dSigma``-mean-zero fields.

    Basis: ``phi_k = Y_k - avg_Sigma(Y_k)`` for ``k >= 1``.
    """
    geom = geom or solution.geometry()
    grid = solution.surface.grid
    w = grid.weights * np.asarray(geom.area_element, dtype=float)
    area = float(np.sum(w))
    Y = grid.basis("")[:, 1:]
    Y = Y - (w @ Y) / area
    Yt, Yp = grid.basis("t")[:, 1:], grid.basis("p")[:, 1:]
    ghi = np.asarray(geom.induced_inv, dtype=float)
    V = np.asarray(geom.ric_NN + geom.A_sq, dtype=float)
    grad = ((Yt * (w * ghi[:, 0, 0])[:, None]).T @ Yt
            + (Yt * (w * ghi[:, 0, 1])[:, None]).T @ Yp
            + (Yp * (w * ghi[:, 1, 0])[:, None]).T @ Yt
            + (Yp * (w * ghi[:, 1, 1])[:, None]).T @ Yp)
    Q = grad - (Y * (w * V)[:, None]).T @ Y
    M = (Y * w[:, None]).T @ Y
    return 0.5 * (Q + Q.T), 0.5 * (M + M.T)


def stability_eigenvalue(solution, geom=None):
    Q, M = jacobi_matrix(solution, geom)
    return float(scipy.linalg.eigh(Q, M, eigvals_only=True, subset_by_index=[0, 0])[0])


def linearized_mean_curvature(metric, s, grid, fd_step=1e-6):
    """Projected finite-difference derivative of ``u -> H(s, u)`` at ``u = 0``.

    Entry ``[j, k]`` is the ``Y_j`` coefficient of ``dH`` along ``Y_k``.
    """
    problem = _Problem(metric, grid, s, free=False, target=0.0)
    zero = SphereField.zeros(grid)
    return problem.A @ problem._basis_columns(zero, fd_step)
