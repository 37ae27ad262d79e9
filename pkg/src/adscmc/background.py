"""Schwarzschild anti-de Sitter background of mass m > 0.

The metric is ``g_m = dr^2/rho_m(r)^2 + r^2 g0`` with
``rho_m(r) = sqrt(1 + r^2 - 2m/r)``.  In the distance coordinate ``s``
measured from the horizon ``r = r0`` it reads ``ds^2 + r(s)^2 g0``.

Far from the horizon ``r(s)`` grows like ``A_m sinh(s)`` with a constant
``A_m >= 1``.  Asymptotic expansions written in terms of ``sinh`` refer to
the shifted coordinate ``sigma = s + c_m`` where ``c_m = log A_m``; see
:attr:`BackgroundModel.hyperbolic_shift`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def horizon_radius(m):
    """Positive root of ``1 + r^2 - 2m/r``."""
    m = float(m)
    if not np.isfinite(m) or m <= 0.0:
        raise DomainError(f"mass must be positive, got {m!r}")

    def f(r):
        return r**3 + r - 2.0 * m

    # r^3 + r - 2m changes sign on (0, 2m + 1] and is monotone there
    r0 = brentq(f, 0.0, 2.0 * m + 1.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    for _ in range(2):
        r0 -= f(r0) / (3.0 * r0**2 + 1.0)
    return r0


def _series_coefficients(m, r0, n_terms):
    """Taylor coefficients of r(s) at s = 0 from r'' = r + m r^-2."""
    a = np.zeros(n_terms)
    a[0] = r0
    inv = np.zeros(n_terms)
    for n in range(n_terms - 2):
        inv[n] = (1.0 if n == 0 else -np.dot(a[1:n + 1], inv[n - 1::-1][:n])) / a[0]
        inv_sq_n = np.dot(inv[: n + 1], inv[n::-1])
        a[n + 2] = (a[n] + m * inv_sq_n) / ((n + 2) * (n + 1))
    return a


def _hermite5(x, x0, h, y0, d0, dd0, y1, d1, dd1):
    t = (x - x0) / h
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
    h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
    h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)
    h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
    h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
    h5 = 0.5 * (t3 - 2.0 * t4 + t5)
    return (h0 * y0 + h * h1 * d0 + h * h * h2 * dd0
            + h3 * y1 + h * h4 * d1 + h * h * h5 * dd1)


@dataclass(frozen=True)
class BackgroundModel:
    """Exact background geometry for one mass parameter.

    ``s_series`` is the half-width around the horizon where ``r(s)`` is taken
    from its even Taylor series; ``table_step`` and ``s_table_max`` control
    the tabulated inverse of ``s(r)`` used elsewhere.
    """

    m: float
    s_series: float = 0.05
    table_step: float = 2e-3
    s_table_max: float = 30.0
    series_terms: int = 24
    r0: float = field(init=False)
    k: float = field(init=False)

    def __post_init__(self):
        r0 = horizon_radius(self.m)
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "k", 2.0 * r0 + 2.0 * self.m / r0**2)
        if not self.s_series > 0:
            raise DomainError("s_series must be positive")

    # -- s(r) by quadrature ------------------------------------------------
    def _q(self, r):
        # rho_m(r)^2 = (r - r0) q(r)
        return r + self.r0 + 2.0 * self.m / (r * self.r0)

    def _integrand(self, t):
        return 2.0 / np.sqrt(self._q(self.r0 + t * t))

    @cached_property
    def _panels(self):
        scale = min(1.0, np.sqrt(self.r0))
        n = int(np.ceil(np.arcsinh(1e9 / scale) / 0.05))
        tau = scale * np.sinh(0.05 * np.arange(n + 1))
        mid = 0.5 * (tau[1:] + tau[:-1])
        half = 0.5 * (tau[1:] - tau[:-1])
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        per_panel = half * (self._integrand(pts) @ _GL_WEIGHTS)
        cumulative = np.concatenate(([0.0], np.cumsum(per_panel)))
        return tau, cumulative

    def _s_of_t(self, t):
        tau, cumulative = self._panels
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(tau, t, side="right") - 1, 0, len(tau) - 2)
        lo = tau[idx]
        half = 0.5 * (t - lo)
        pts = (lo + half)[..., None] + half[..., None] * _GL_NODES
        return cumulative[idx] + half * (self._integrand(pts) @ _GL_WEIGHTS)

    def s_of_r(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(~np.isfinite(r)) or np.any(r < self.r0):
            raise DomainError("s_of_r requires r >= r0")
        return self._s_of_t(np.sqrt(r - self.r0))

    # -- r(s) by tabulated inverse ------------------------------------------
    @cached_property
    def _series(self):
        return _series_coefficients(self.m, self.r0, self.series_terms)

    @cached_property
    def _table(self):
        n = int(np.ceil(self.s_table_max / self.table_step))
        s = self.table_step * np.arange(n + 1)

        def rhs(_, t):
            return 0.5 * np.sqrt(self._q(self.r0 + t * t))

        sol = solve_ivp(rhs, (0.0, s[-1]), [0.0], method="DOP853", t_eval=s,
                        rtol=1e-13, atol=1e-15)
        t = sol.y[0]
        for _ in range(3):
            t = t - (self._s_of_t(t) - s) * rhs(None, t)
        t[0] = 0.0
        r = self.r0 + t * t
        rho = t * np.sqrt(self._q(r))
        return s, r, rho

    def _series_eval(self, s):
        a = self._series
        r = np.polynomial.polynomial.polyval(s, a)
        da = a[1:] * np.arange(1, len(a))
        rho = np.polynomial.polynomial.polyval(s, da)
        return r, rho

    def radius(self, s):
        """``r(s)`` for any real ``s``, extended evenly across the horizon."""
        r, _ = self._radius_speed(s)
        return r

    def radial_speed(self, s):
        """``dr/ds = rho_m(r(s))``, odd across the horizon."""
        _, rho = self._radius_speed(s)
        return rho

    def _radius_speed(self, s):
        s = np.asarray(s, dtype=float)
        sign = np.where(s < 0.0, -1.0, 1.0)
        x = np.abs(s)
        if np.any(x > self.s_table_max) or np.any(~np.isfinite(x)):
            raise DomainError(f"|s| must not exceed {self.s_table_max}")
        r = np.empty_like(x)
        rho = np.empty_like(x)
        near = x < self.s_series
        if np.any(near):
            r[near], rho[near] = self._series_eval(x[near])
        far = ~near
        if np.any(far):
            grid, rt, rhot = self._table
            h = self.table_step
            xf = x[far]
            i = np.clip((xf / h).astype(np.int64), 0, len(grid) - 2)
            r0_, r1_ = rt[i], rt[i + 1]
            p0, p1 = rhot[i], rhot[i + 1]
            a0 = r0_ + self.m / r0_**2
            a1 = r1_ + self.m / r1_**2
            r[far] = _hermite5(xf, grid[i], h, r0_, p0, a0, r1_, p1, a1)
            rho[far] = _hermite5(xf, grid[i], h, p0, a0, (1 - 2 * self.m / r0_**3) * p0,
                                 p1, a1, (1 - 2 * self.m / r1_**3) * p1)
        return r, sign * rho

    def radius_jet(self, s):
        """``(r, r', r'', r''')`` at ``s`` using the radial ODE."""
        r, rho = self._radius_speed(s)
        r2 = r + self.m / r**2
        r3 = rho * (1.0 - 2.0 * self.m / r**3)
        return r, rho, r2, r3

    def r_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("r_of_s requires s >= 0")
        return self.radius(s)

    # -- closed forms ---------------------------------------------------------
    def rho(self, r):
        r = np.asarray(r, dtype=float)
        return np.sqrt(np.maximum(1.0 + r * r - 2.0 * self.m / r, 0.0))

    def coordinate_mean_curvature(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r0):
            raise DomainError("mean curvature of S_r requires r >= r0")
        return 2.0 * self.rho(r) / r

    def mean_curvature_at(self, s):
        """``H_m`` as a function of the distance coordinate."""
        r, rho = self._radius_speed(s)
        return 2.0 * rho / r

    def background_curvature(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("background_curvature requires s >= 0")
        r = self.radius(s)
        c = self.m / r**3
        return {"ric_ss": -2.0 - 2.0 * c, "ric_tangential": -2.0 + c,
                "ric_mixed": np.zeros_like(r), "scalar": np.full_like(r, -6.0)}

    def jacobi_spectrum(self, r, l):
        r = np.asarray(r, dtype=float)
        return (-l * (l + 1) + 2.0 - 6.0 * self.m / r) / r**2

    @cached_property
    def hyperbolic_shift(self):
        """``c_m = lim (arcsinh r(s) - s)``; zero would mean ``r ~ sinh s``."""
        s = self.s_table_max
        return float(np.arcsinh(self.radius(s)) - s)

    def hyperbolic_coordinate(self, s):
        return np.asarray(s, dtype=float) + self.hyperbolic_shift

    def v_profile(self, s):
        """``(r(s)/sinh(sigma))^2`` with ``sigma = s + c_m``."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("v_profile requires s >= 0")
        return (self.radius(s) / np.sinh(s + self.hyperbolic_shift)) ** 2


def s_of_r(model, r):
    return model.s_of_r(r)


def r_of_s(model, s):
    return model.r_of_s(s)


def coordinate_mean_curvature(model, r):
    return model.coordinate_mean_curvature(r)


def background_curvature(model, s):
    return model.background_curvature(s)


def jacobi_spectrum(model, r, l):
    return model.jacobi_spectrum(r, l)


def v_profile(model, s):
    return model.v_profile(s)
