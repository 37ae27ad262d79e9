"""Real spherical harmonics on a Gauss-Legendre x equispaced grid.

Basis index ``k = l*l + l + m`` for ``-l <= m <= l``.  Functions are unit
normalized in L2(S^2, g0): ``Y_00 = 1/sqrt(4 pi)``, ``Y_lm ~ cos(m phi)`` for
``m > 0`` and ``~ sin(|m| phi)`` for ``m < 0``.
"""
from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .errors import StructureError

DERIVATIVES = ("", "t", "p", "tt", "tp", "pp", "ttt", "ttp", "tpp", "ppp")
_ORDER = {name: len(name) for name in DERIVATIVES}


def n_coeffs(L):
    return (L + 1) ** 2


def index(l, m):
    if abs(m) > l:
        raise StructureError(f"invalid harmonic ({l}, {m})")
    return l * l + l + m


def degrees(L):
    return np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)


def _legendre(L, x, sn, order, xp):
    """Normalized associated Legendre functions and theta derivatives.

    ``x = cos(theta)``, ``sn = sin(theta)``.  Returns ``P[d][l][m]`` for
    derivative order ``d <= order``.
    """
    cot = x / sn
    csc2 = 1.0 / (sn * sn)
    P = [[None] * (L + 1) for _ in range(L + 1)]
    P[0][0] = xp.ones_like(x) / math.sqrt(4.0 * math.pi)
    for m in range(1, L + 1):
        P[m][m] = math.sqrt((2 * m + 1) / (2.0 * m)) * sn * P[m - 1][m - 1]
    for m in range(L):
        P[m + 1][m] = math.sqrt(2 * m + 3) * x * P[m][m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[l][m] = a * (x * P[l - 1][m] - b * P[l - 2][m])
    out = [P]
    if order >= 1:
        D1 = [[None] * (L + 1) for _ in range(L + 1)]
        for l in range(L + 1):
            for m in range(l + 1):
                c = math.sqrt((2 * l + 1) / (2 * l - 1) * (l - m) * (l + m)) if l > m else 0.0
                prev = P[l - 1][m] if l > m else 0.0
                D1[l][m] = (l * x * P[l][m] - c * prev) / sn
        out.append(D1)
    if order >= 2:
        D2 = [[None] * (L + 1) for _ in range(L + 1)]
        D3 = [[None] * (L + 1) for _ in range(L + 1)]
        for l in range(L + 1):
            for m in range(l + 1):
                lam = l * (l + 1) - m * m * csc2
                D2[l][m] = -cot * D1[l][m] - lam * P[l][m]
                if order >= 3:
                    D3[l][m] = (csc2 * D1[l][m] - cot * D2[l][m] - lam * D1[l][m]
                                - 2.0 * m * m * csc2 * cot * P[l][m])
        out.append(D2)
        if order >= 3:
            out.append(D3)
    return out


def real_harmonics(L, theta, phi, derivs=("",), xp=np, cos=None, sin=None):
    """Evaluate the real basis and selected derivatives at points.

    ``theta`` and ``phi`` broadcast together; each requested derivative is
    returned as an array with a trailing axis of length ``(L+1)^2``.  Names
    use ``t`` for theta and ``p`` for phi, e.g. ``"tp"``.  ``cos``/``sin`` of
    theta may be supplied to avoid recomputing them from ``theta``.
    """
    theta, phi = xp.broadcast_arrays(xp.asarray(theta, dtype=float), xp.asarray(phi, dtype=float))
    x = xp.cos(theta) if cos is None else xp.broadcast_to(xp.asarray(cos, dtype=float), theta.shape)
    sn = xp.sin(theta) if sin is None else xp.broadcast_to(xp.asarray(sin, dtype=float), theta.shape)
    order_t = max(name.count("t") for name in derivs)
    leg = _legendre(L, x, sn, order_t, xp)
    sqrt2 = math.sqrt(2.0)
    result = {}
    for name in derivs:
        nt, npd = name.count("t"), name.count("p")
        cols = []
        for l in range(L + 1):
            for m in range(-l, l + 1):
                mu = abs(m)
                leg_part = leg[nt][l][mu]
                if m == 0:
                    trig = xp.ones_like(phi) if npd == 0 else xp.zeros_like(phi)
                else:
                    # d^n/dphi^n cos(mu phi) = mu^n cos(mu phi + n pi/2)
                    shift = npd * math.pi / 2 - (math.pi / 2 if m < 0 else 0.0)
                    trig = sqrt2 * mu**npd * xp.cos(mu * phi + shift)
                cols.append(leg_part * trig)
        result[name] = xp.stack(cols, axis=-1)
    return result


class SphereGrid:
    """Quadrature grid; ``theta``/``phi``/``weights`` are flattened node arrays."""

    def __init__(self, L=15, n_theta=None, n_phi=None):
        if L < 0:
            raise StructureError("L must be non-negative")
        self.L = int(L)
        self.n_theta = int(n_theta) if n_theta else max(L + 1, math.ceil(3 * (L + 1) / 2))
        self.n_phi = int(n_phi) if n_phi else 2 * self.n_theta
        if self.n_theta < L + 1 or self.n_phi < 2 * L + 1:
            raise StructureError("grid too coarse for requested degree")
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        # exact mirror symmetry keeps equatorially symmetric problems symmetric
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
        ph = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        X, PH = np.meshgrid(x, ph, indexing="ij")
        self.cos_theta = X.ravel()
        self.sin_theta = np.sqrt((1.0 - self.cos_theta) * (1.0 + self.cos_theta))
        self.theta = np.arccos(self.cos_theta)
        self.phi = PH.ravel()
        self.weights = np.repeat(w, self.n_phi) * (2.0 * np.pi / self.n_phi)
        self.size = self.theta.size
        self.K = n_coeffs(self.L)
        self.degree = degrees(self.L)

    def __repr__(self):
        return f"SphereGrid(L={self.L}, n_theta={self.n_theta}, n_phi={self.n_phi})"

    @cached_property
    def _basis(self):
        return real_harmonics(self.L, self.theta, self.phi, DERIVATIVES,
                              cos=self.cos_theta, sin=self.sin_theta)

    def basis(self, name=""):
        """Synthesis matrix ``(size, K)`` for the named derivative."""
        return self._basis[name]

    @cached_property
    def analysis_matrix(self):
        return self.basis().T * self.weights

    @cached_property
    def cot_theta(self):
        return self.cos_theta / self.sin_theta


class SphereField:
    """Scalar function on the sphere held as samples and/or coefficients."""

    def __init__(self, grid, values=None, coeffs=None):
        if (values is None) == (coeffs is None):
            raise StructureError("give exactly one of values or coeffs")
        self.grid = grid
        self._values = None if values is None else _check(values, grid.size, "values")
        self._coeffs = None if coeffs is None else _check(coeffs, grid.K, "coeffs")

    @classmethod
    def zeros(cls, grid):
        return cls(grid, coeffs=np.zeros(grid.K))

    @classmethod
    def from_function(cls, grid, f):
        return cls(grid, values=f(grid.theta, grid.phi))

    @classmethod
    def harmonic(cls, grid, l, m, amplitude=1.0):
        c = np.zeros(grid.K)
        c[index(l, m)] = amplitude
        return cls(grid, coeffs=c)

    @property
    def values(self):
        if self._values is None:
            self._values = self.grid.basis() @ self._coeffs
        return self._values

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = self.grid.analysis_matrix @ self._values
        return self._coeffs

    def derivative(self, name):
        """Spectral coordinate derivative, e.g. ``"t"`` or ``"pp"``."""
        return self.grid.basis(name) @ self.coeffs

    def mean(self):
        return self.coeffs[0] / math.sqrt(4.0 * math.pi)

    def mean_free(self):
        c = self.coeffs.copy()
        c[0] = 0.0
        return SphereField(self.grid, coeffs=c)

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        return SphereField(self.grid, coeffs=self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SphereField(self.grid, coeffs=self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SphereField(self.grid, coeffs=self.coeffs * float(scalar))

    __rmul__ = __mul__


def _check(arr, n, what):
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (n,):
        raise StructureError(f"{what} must have shape ({n},), got {arr.shape}")
    return arr


def analyze(grid, values):
    return grid.analysis_matrix @ _check(values, grid.size, "values")


def synthesize(grid, coeffs):
    return grid.basis() @ _check(coeffs, grid.K, "coeffs")


def laplace0(field):
    l = field.grid.degree
    return SphereField(field.grid, coeffs=-l * (l + 1) * field.coeffs)


def grad0(field):
    """Orthonormal-frame components ``(e_theta f, e_phi f)``."""
    g = field.grid
    return field.derivative("t"), field.derivative("p") / g.sin_theta


def hessian0(field):
    """Frame components ``(H_tt, H_tp, H_pp)`` of the covariant Hessian."""
    g = field.grid
    ft, fp = field.derivative("t"), field.derivative("p")
    ftt, ftp, fpp = field.derivative("tt"), field.derivative("tp"), field.derivative("pp")
    sn, cot = g.sin_theta, g.cot_theta
    return ftt, (ftp - cot * fp) / sn, fpp / sn**2 + cot * ft


def integrate(grid, field, weight=None):
    values = field.values if isinstance(field, SphereField) else np.asarray(field, dtype=float)
    if weight is not None:
        values = values * (weight.values if isinstance(weight, SphereField) else weight)
    return float(np.dot(grid.weights, values))
