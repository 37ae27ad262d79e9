"""Closed-form radial profiles for metric perturbations.

A profile is an even function ``w(s)`` on the doubled chart with analytic
first and second derivatives.  Profiles written in terms of ``r(s)`` are even
automatically; ``s``-based ones are reflected through ``|s|``.
"""
from __future__ import annotations

import numpy as np


class Profile:
    name = "abstract"
    #: first derivative at the horizon vanishes, so the boundary stays minimal
    boundary_flat = True

    def jet(self, model, s, r, rho):
        """Return ``(w, w', w'')`` at ``s`` given ``r(s)`` and ``rho(s)``."""
        raise NotImplementedError

    def value_jax(self, s, r, model, jnp):
        """Same profile built from jax primitives (for automatic derivatives)."""
        raise NotImplementedError


class Zero(Profile):
    name = "zero"

    def jet(self, model, s, r, rho):
        z = np.zeros_like(r)
        return z, z, z

    def value_jax(self, s, r, model, jnp):
        return jnp.zeros_like(s)


class TanhSquaredSech4(Profile):
    """``tanh^2(s) sech^4(s)``: even, flat at the horizon, ``O(e^{-4s})``."""

    name = "tanh2_sech4"

    def jet(self, model, s, r, rho):
        s = np.broadcast_to(s, np.shape(r))
        t = np.tanh(s)
        c2 = 1.0 / np.cosh(s) ** 2
        c4 = c2 * c2
        w = t * t * c4
        w1 = 2.0 * t * c4 * c2 - 4.0 * t**3 * c4
        w2 = 2.0 * c4 * c4 - 24.0 * t * t * c4 * c2 + 16.0 * t**4 * c4
        return w, w1, w2

    def value_jax(self, s, r, model, jnp):
        return jnp.tanh(s) ** 2 / jnp.cosh(s) ** 4


class SquareExp(Profile):
    """``s^2 exp(-4|s|)``."""

    name = "s2_exp"

    def jet(self, model, s, r, rho):
        s = np.broadcast_to(s, np.shape(r))
        x = np.abs(s)
        sg = np.where(s < 0.0, -1.0, 1.0)
        e = np.exp(-4.0 * x)
        return x * x * e, sg * (2.0 * x - 4.0 * x * x) * e, (2.0 - 16.0 * x + 16.0 * x * x) * e

    def value_jax(self, s, r, model, jnp):
        x = jnp.abs(s)
        return x * x * jnp.exp(-4.0 * x)


class TanhSech4(Profile):
    """``tanh|s| sech^4 s``: unit slope at the horizon (non-minimal control)."""

    name = "tanh_sech4"
    boundary_flat = False

    def jet(self, model, s, r, rho):
        s = np.broadcast_to(s, np.shape(r))
        x = np.abs(s)
        sg = np.where(s < 0.0, -1.0, 1.0)
        t = np.tanh(x)
        c2 = 1.0 / np.cosh(x) ** 2
        c4 = c2 * c2
        return (t * c4, sg * (c4 * c2 - 4.0 * t * t * c4),
                -14.0 * t * c4 * c2 + 16.0 * t**3 * c4)

    def value_jax(self, s, r, model, jnp):
        return jnp.tanh(jnp.abs(s)) / jnp.cosh(s) ** 4


class RadialProfile(Profile):
    """Profile ``W(r(s))``; subclasses give ``W`` and its r-derivatives."""

    def radial(self, r, model):
        raise NotImplementedError

    def jet(self, model, s, r, rho):
        W, W1, W2 = self.radial(r, model)
        accel = r + model.m / r**2
        return W, W1 * rho, W2 * rho * rho + W1 * accel


class DeficitSphere(RadialProfile):
    """``-(r0/r)^4`` on the sphere block."""

    name = "deficit_sphere"

    def radial(self, r, model):
        c = model.r0**4
        return -c / r**4, 4.0 * c / r**5, -20.0 * c / r**6

    def value_jax(self, s, r, model, jnp):
        return -((model.r0 / r) ** 4)


class DeficitRadial(RadialProfile):
    """``(r0/r)^4 (4 - 1/P)`` with ``P = r^2 + r0 r + 2m/r0``.

    Paired with :class:`DeficitSphere` it gives a spherical perturbation whose
    Hawking mass on coordinate spheres is ``m - eps (3m - r0)(r0/r)^4 / 2`` to
    first order, increasing in ``r``.
    """

    name = "deficit_radial"

    def radial(self, r, model):
        r0, m = model.r0, model.m
        c = r0**4
        P = r * r + r0 * r + 2.0 * m / r0
        P1 = 2.0 * r + r0
        # F = r^-4 P^-1 via logarithmic derivatives
        F = 1.0 / (r**4 * P)
        Lg = -4.0 / r - P1 / P
        Lg1 = 4.0 / r**2 - 2.0 / P + (P1 / P) ** 2
        F1 = F * Lg
        F2 = F * (Lg * Lg + Lg1)
        return (c * (4.0 / r**4 - F), c * (-16.0 / r**5 - F1), c * (80.0 / r**6 - F2))

    def value_jax(self, s, r, model, jnp):
        r0, m = model.r0, model.m
        P = r * r + r0 * r + 2.0 * m / r0
        return (r0 / r) ** 4 * (4.0 - 1.0 / P)


PROFILES = {cls.name: cls() for cls in
            (Zero, TanhSquaredSech4, SquareExp, TanhSech4, DeficitSphere, DeficitRadial)}


def get_profile(name):
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown radial profile {name!r}; known: {sorted(PROFILES)}") from None
