"""Weighted decay distance via jax forward-mode derivatives.

Kept separate so that jax is imported only when the diagnostic is requested.
"""
from __future__ import annotations

import numpy as np


def _setup_jax():
    import jax

    jax.config.update("jax_enable_x64", True)
    import jax.numpy as jnp

    return jax, jnp


def _radial_functions(jax, jnp, model):
    """``r(s)`` and ``rho(s)`` as differentiable jax functions."""
    out = jax.ShapeDtypeStruct

    def host_r(s):
        return np.asarray(model.radius(np.asarray(s)), dtype=np.float64)

    def host_rho(s):
        return np.asarray(model.radial_speed(np.asarray(s)), dtype=np.float64)

    @jax.custom_jvp
    def r_fn(s):
        return jax.pure_callback(host_r, out(jnp.shape(s), jnp.float64), s,
                                 vmap_method="expand_dims")

    @jax.custom_jvp
    def rho_fn(s):
        return jax.pure_callback(host_rho, out(jnp.shape(s), jnp.float64), s,
                                 vmap_method="expand_dims")

    @r_fn.defjvp
    def _r_jvp(primals, tangents):
        (s,), (ds,) = primals, tangents
        return r_fn(s), rho_fn(s) * ds

    @rho_fn.defjvp
    def _rho_jvp(primals, tangents):
        (s,), (ds,) = primals, tangents
        r = r_fn(s)
        return rho_fn(s), (r + model.m / r**2) * ds

    return r_fn, rho_fn


def decay_distance_jax(metric, s_max, n_s, n_theta, n_phi, n_starts=4):
    from .profiles import get_profile
    from .sphere import real_harmonics

    jax, jnp = _setup_jax()
    model, spec = metric.model, metric.spec
    r_fn, _ = _radial_functions(jax, jnp, model)
    prof = {k: get_profile(getattr(spec, k)) for k in ("profile_ss", "profile_sphere", "profile_cross")}

    def angular(coeffs, th, ph, name):
        if not coeffs:
            return jnp.zeros_like(th)
        L = max(l for l, _, _ in coeffs)
        vec = np.zeros((L + 1) ** 2)
        for l, m, c in coeffs:
            vec[l * l + l + m] += c
        return real_harmonics(L, th, ph, (name,), xp=jnp)[name] @ vec

    def h(p):
        s, th, ph = p[0], p[1], p[2]
        r = r_fn(s)
        sn2 = jnp.sin(th) ** 2
        wa = prof["profile_ss"].value_jax(s, r, model, jnp) * angular(spec.a, th, ph, "")
        wb = prof["profile_sphere"].value_jax(s, r, model, jnp) * angular(spec.b, th, ph, "")
        wc = prof["profile_cross"].value_jax(s, r, model, jnp) * r
        ct = wc * angular(spec.c, th, ph, "t")
        cp = wc * angular(spec.c, th, ph, "p")
        return jnp.array([[wa, ct, cp],
                          [ct, wb * r * r, 0.0],
                          [cp, 0.0, wb * r * r * sn2]])

    def gm(p):
        r = r_fn(p[0])
        return jnp.diag(jnp.array([1.0, r * r, r * r * jnp.sin(p[1]) ** 2]))

    def gamma(p):
        dg = jnp.moveaxis(jax.jacfwd(gm)(p), -1, 0)  # dg[C, A, B]
        low = 0.5 * (jnp.swapaxes(dg, 0, 1) + jnp.moveaxis(dg, 0, -1) - dg)
        return jnp.einsum("ad,dbc->abc", jnp.linalg.inv(gm(p)), low)

    def covariant(T, rank):
        def nabla_T(p):
            val = T(p)
            out = jax.jacfwd(T)(p)
            gam = gamma(p)
            for j in range(rank):
                term = jnp.tensordot(val, gam, axes=([j], [0]))
                out = out - jnp.moveaxis(term, -2, j)
            return out
        return nabla_T

    def norm(T, p, rank):
        r = r_fn(p[0])
        scale = jnp.array([1.0, 1.0 / r, 1.0 / (r * jnp.abs(jnp.sin(p[1])))])
        for j in range(rank):
            shape = [1] * rank
            shape[j] = 3
            T = T * scale.reshape(shape)
        return jnp.sqrt(jnp.sum(T * T))

    derivs = [h]
    for i in range(3):
        derivs.append(covariant(derivs[-1], 2 + i))

    def weighted(p):
        total = 0.0
        for i, f in enumerate(derivs):
            total = total + norm(f(p), p, 2 + i)
        return jnp.exp(4.0 * p[0]) * total

    x, _ = np.polynomial.legendre.leggauss(n_theta)
    s = np.linspace(0.0, s_max, n_s)
    S, T, P = np.meshgrid(s, np.arccos(x), 2 * np.pi * np.arange(n_phi) / n_phi, indexing="ij")
    pts = jnp.asarray(np.stack([S.ravel(), T.ravel(), P.ravel()], axis=1))
    vals = np.asarray(jax.jit(jax.vmap(weighted))(pts))
    best = float(vals.max())

    # the supremum generally sits between samples: polish the best few locally
    import scipy.optimize

    neg = jax.jit(lambda p: -weighted(p))
    grad = jax.jit(jax.jacfwd(lambda p: -weighted(p)))
    bounds = [(0.0, s_max), (1e-3, np.pi - 1e-3), (None, None)]
    for i in np.argsort(vals)[::-1][:n_starts]:
        p0 = np.clip(np.asarray(pts[i]), [b[0] if b[0] is not None else -np.inf for b in bounds],
                     [b[1] if b[1] is not None else np.inf for b in bounds])
        res = scipy.optimize.minimize(lambda p: float(neg(jnp.asarray(p))), p0,
                                      jac=lambda p: np.asarray(grad(jnp.asarray(p))),
                                      method="L-BFGS-B", bounds=bounds)
        if np.isfinite(res.fun):
            best = max(best, -float(res.fun))
    return abs(metric.eps) * best
