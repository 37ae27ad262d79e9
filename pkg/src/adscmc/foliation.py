"""Continuation of CMC leaves in the base radius and the diagnostics built on them.

Leaves are indexed by ``t = 0, 1, ...`` with base radii ``s_t`` spaced by
``ds``.  The minimal variant starts at the horizon ``s = 0``; the ``h2``
variant starts from the sphere with prescribed mean curvature 2 near
``r = 2m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import (AdsCmcError, BoundaryNotMinimalError, DivergenceError, FoliationAbort,
                     LinearSolveError, MatchingError, UnsupportedError)
from .geometry import GraphSurface, hawking_mass_from
from .metric import boundary_minimality_check, decay_distance
from .solver import (CmcSolution, SolveSettings, solve_free_cmc, solve_prescribed_cmc,
                     stability_eigenvalue)
from .sphere import SphereField, SphereGrid

LEAF_COLUMNS = ("t", "s_base", "H_const", "area", "m_H", "stability_eig", "lapse_min",
                "s_inner", "s_outer", "sup_w", "int_ds_tan_sq", "int_ring_A_sq",
                "mass_identity_residual", "min_R_plus_6")

STABILITY_TOL = -1e-9
MONOTONE_TOL = 1e-8
SCALAR_TOL = -1e-9
_LD_EPS = float(np.finfo(np.longdouble).eps)


class EstimateUnavailable(AdsCmcError):
    """Too few resolved leaves for a tail estimate."""


@dataclass
class LeafRecord:
    t: int
    s_base: float
    u: SphereField = field(repr=False)
    H_const: float
    area: float
    m_H: float
    stability_eig: float
    s_inner: float
    s_outer: float
    s_hat: float
    sup_w: float
    int_ds_tan_sq: float
    int_ring_A_sq: float
    mass_identity_residual: float
    mass_identity_scaled: float
    min_R_plus_6: float
    iterations: int
    residual: float
    kind: str = "free"
    lapse_min: float = math.nan
    dmH_formula: float = math.nan
    _fv: dict = field(default=None, repr=False)

    def row(self):
        return {name: getattr(self, name) for name in LEAF_COLUMNS}

    @property
    def u_floor(self):
        """Size of ``u`` below which extended-precision rounding dominates."""
        r = math.cosh(self.s_inner) * 2.0  # r ~ e^s for the tail; generous
        return 16.0 * _LD_EPS * max(abs(self.H_const), 1.0) * r * r


@dataclass
class FoliationReport:
    m: float
    family: str
    epsilon: float
    variant: str
    ds: float
    s_max: float
    L: int
    leaves: list
    flags: dict = field(default_factory=dict)
    matching: list | None = None

    @property
    def s_values(self):
        return np.array([leaf.s_base for leaf in self.leaves])

    def column(self, name):
        return np.array([getattr(leaf, name) for leaf in self.leaves], dtype=float)

    def leaf_at(self, s, tol=1e-9):
        for leaf in self.leaves:
            if abs(leaf.s_base - s) <= tol:
                return leaf
        raise KeyError(f"no leaf with s_base={s}")

    def area_increasing(self):
        a = self.column("area")
        return bool(np.all(np.diff(a) > 0))


# -- per-leaf data ----------------------------------------------------------------

def _leaf_record(t, sol, metric, geom=None):
    model = metric.model
    geom = geom or sol.geometry()
    area_ld = geom.area
    I = geom.integrate(geom.H**2 - 4)
    m_H = hawking_mass_from(area_ld, I)
    area = float(area_ld)
    s_hat = math.asinh(math.sqrt(area / (4.0 * math.pi)))
    sigma = geom.s_points.astype(area_ld.dtype) + model.hyperbolic_shift
    m = model.m
    int_T = geom.integrate(geom.ds_tangential_sq)
    int_A = geom.integrate(geom.tracefree_sq)
    four_pi = 4 * np.asarray(np.pi, dtype=area_ld.dtype)
    # asymptotic expansion of int (H^2 - 4) dSigma on large CMC leaves
    rhs = 4 * four_pi - geom.integrate((8 * m - 12 * m * geom.ds_tangential_sq)
                                       / np.sinh(sigma) ** 3) + 2 * int_A
    identity = float(I - rhs)
    s_in, s_out = sol.surface.s_inner, sol.surface.s_outer

    # pieces for the first-variation formula; Q uses the pointwise fields
    H2_mean = geom.integrate(geom.H**2) / (2 * area_ld)
    Q = (0.5 * (geom.scalar + 6) + (four_pi / area_ld - geom.gaussK)
         + 0.5 * (geom.A_sq - H2_mean))
    ds_normal = np.einsum("na,na->n", geom.metric_g[:, 0, :], geom.normal)   # g(N, d_s)
    fv = {"Q": Q, "ds_normal": ds_normal, "area_ld": area_ld, "geom": None}

    return LeafRecord(
        t=t, s_base=float(sol.s), u=sol.u, H_const=float(sol.H_const), area=area, m_H=m_H,
        stability_eig=stability_eigenvalue(sol, geom), s_inner=s_in, s_outer=s_out,
        s_hat=s_hat, sup_w=float(np.max(np.abs(sigma - s_hat))), int_ds_tan_sq=float(int_T),
        int_ring_A_sq=float(int_A), mass_identity_residual=identity,
        mass_identity_scaled=identity / (area * math.exp(-4.0 * s_in)),
        min_R_plus_6=float(np.min(geom.scalar + 6)), iterations=sol.iterations,
        residual=float(sol.residual), kind=sol.kind, _fv=fv | {"geom": geom})


def _nodes(leaf):
    return leaf.s_base + leaf.u.values


def _first_variation(prev, leaf, nxt):
    """``dm_H/dt`` from the first-variation formula with a centered discrete lapse."""
    fv = leaf._fv
    geom = fv["geom"]
    dt = nxt.s_base - prev.s_base
    speed = (_nodes(nxt) - _nodes(prev)) / dt
    rho = speed.astype(fv["Q"].dtype) * fv["ds_normal"]
    area = fv["area_ld"]
    val = 2 * np.sqrt(area) * leaf.H_const * geom.integrate(fv["Q"] * rho)
    return float(val / (16 * np.asarray(np.pi, dtype=area.dtype)) ** 1.5)


# -- continuation -----------------------------------------------------------------

def _boundary_h2(metric, grid, settings):
    """Prescribed ``H = 2`` sphere near ``r = 2m`` recentred to a zero-mean graph."""
    model = metric.model
    s2 = float(model.s_of_r(2.0 * model.m))
    sol = solve_prescribed_cmc(s2, metric, settings=settings, grid=grid, target=2.0)
    mu = float(sol.u.mean())
    c = sol.u.coeffs.copy()
    c[0] = 0.0
    surf = GraphSurface(s2 + mu, SphereField(grid, coeffs=c), metric)
    return CmcSolution(surf, 2.0, sol.residuals, True, "prescribed", target=2.0,
                       polish_residuals=sol.polish_residuals)


def foliate(metric, s_max=8.0, ds=0.1, settings=None, grid=None, L=15, variant="minimal",
            boundary_tol=1e-8, decay_check=False, progress=None):
    """Free CMC leaves at ``s_0, s_0 + ds, ..., s_max``, each seeded by the previous one.

    Raises :class:`BoundaryNotMinimalError` for the minimal variant if the
    horizon is not minimal, and :class:`FoliationAbort` (carrying the leaf
    index and the partial report) on divergence, instability, a non-positive
    mean curvature or a non-positive lapse.
    """
    if not 0.0 < ds <= 0.2:
        raise ValueError("ds must lie in (0, 0.2]")
    if variant not in ("minimal", "h2"):
        raise ValueError("variant must be 'minimal' or 'h2'")
    settings = settings or SolveSettings()
    grid = grid or SphereGrid(L)
    model = metric.model
    flags = {}
    bnd = boundary_minimality_check(metric, grid)
    flags["boundary_H_sup"] = bnd
    flags["boundary_minimal"] = bool(bnd <= boundary_tol)
    if variant == "minimal" and not flags["boundary_minimal"]:
        raise BoundaryNotMinimalError(f"boundary not minimal: sup|H| = {bnd:.3e} on s = 0")
    if decay_check:
        flags["decay_distance"] = decay_distance(metric)

    report = FoliationReport(model.m, metric.spec.family, metric.eps, variant, ds, s_max,
                             grid.L, [], flags)
    leaves = report.leaves

    def abort(msg, t, reason, cause=None):
        exc = FoliationAbort(msg, t, reason)
        exc.report = report
        if cause is not None:
            raise exc from cause
        raise exc

    if variant == "minimal":
        s0 = 0.0
        try:
            first = solve_free_cmc(0.0, metric, settings=settings, grid=grid)
        except (DivergenceError, LinearSolveError) as exc:
            abort(f"leaf 0: {exc}", 0, "divergence", exc)
        h_floor = 0.0
    else:
        try:
            first = _boundary_h2(metric, grid, settings)
        except (DivergenceError, LinearSolveError) as exc:
            abort(f"leaf 0: {exc}", 0, "divergence", exc)
        s0 = first.s
        h_floor = 2.0

    n = int(math.floor((s_max - s0) / ds + 1e-9))
    sol = first
    for t in range(n + 1):
        if t > 0:
            s = s0 + t * ds
            try:
                sol = solve_free_cmc(s, metric, u0=sol.u, settings=settings)
            except (DivergenceError, LinearSolveError) as exc:
                abort(f"leaf {t} (s={s:g}): {exc}", t, "divergence", exc)
            except AdsCmcError as exc:
                abort(f"leaf {t} (s={s:g}): {exc}", t, "geometry", exc)
        leaf = _leaf_record(t, sol, metric)
        if leaf.stability_eig < STABILITY_TOL:
            leaves.append(leaf)
            abort(f"leaf {t}: stability eigenvalue {leaf.stability_eig:.3e}", t, "stability")
        if t > 0 and not leaf.H_const > h_floor:
            leaves.append(leaf)
            abort(f"leaf {t}: mean curvature {leaf.H_const:.17g} not above {h_floor:g}",
                  t, "mean_curvature")
        if leaves:
            prev = leaves[-1]
            gap = (_nodes(leaf) - _nodes(prev)) / (leaf.s_base - prev.s_base)
            prev.lapse_min = float(np.min(gap * np.asarray(prev._fv["ds_normal"], dtype=float)))
            if len(leaves) >= 2:
                before = leaves[-2]
                prev.dmH_formula = _first_variation(before, prev, leaf)
                before._fv["geom"] = None   # release node data no longer needed
            if not prev.lapse_min > 0.0:
                leaves.append(leaf)
                abort(f"leaves {t - 1}->{t} cross: lapse {prev.lapse_min:.3e}", t, "lapse")
        leaves.append(leaf)
        if progress is not None:
            progress(leaf)
    flags["min_R_plus_6"] = float(min(leaf.min_R_plus_6 for leaf in leaves))
    flags["scalar_ok"] = bool(flags["min_R_plus_6"] >= SCALAR_TOL)
    flags["area_increasing"] = report.area_increasing()
    return report


# -- overlap matching -------------------------------------------------------------

@dataclass
class MatchPoint:
    s: float
    s_tilde: float
    H: float
    distance: float


def matching_check(metric, window=(3.8, 3.9, 4.0, 4.1, 4.2), settings=None, grid=None,
                   L=15, report=None):
    """Distance between free leaves and prescribed-curvature graphs over ``S_{s~}``."""
    settings = settings or SolveSettings()
    model = metric.model
    if report is not None:
        grid = grid or report.leaves[0].u.grid
    grid = grid or SphereGrid(L)
    s_res = float(model.s_of_r(3.0 * model.m))
    out = []
    for s in window:
        s = float(s)
        seed = None
        if report is not None:
            near = min(report.leaves, key=lambda leaf: abs(leaf.s_base - s))
            seed = near.u
        if seed is None or seed.grid is not grid:
            sol = solve_free_cmc(s, metric, grid=grid, settings=settings)
        else:
            sol = solve_free_cmc(s, metric, u0=seed, settings=settings)
        Hg = sol.H_const

        def f(x):
            return float(model.mean_curvature_at(x)) - Hg

        lo, hi = max(s - 0.5, s_res + 0.05), s + 0.5
        try:
            if f(lo) * f(hi) > 0:
                raise ValueError("no sign change")
            s_t = scipy.optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        except ValueError as exc:
            raise MatchingError(f"no background sphere with H = {Hg:.17g} near s = {s:g}: "
                                f"{exc}") from None
        h_tilde = sol.u.values + (s - s_t)
        pres = solve_prescribed_cmc(s_t, metric, settings=settings, grid=grid, target=Hg)
        out.append(MatchPoint(s, s_t, Hg, float(np.max(np.abs(h_tilde - pres.u.values)))))
    return out


# -- reports on a completed foliation ---------------------------------------------

def monotonicity_report(report, tol=MONOTONE_TOL):
    leaves = report.leaves
    mH = report.column("m_H")
    delta = np.diff(mH)
    scalar_ok = report.flags.get("scalar_ok",
                                 min(leaf.min_R_plus_6 for leaf in leaves) >= SCALAR_TOL)
    monotone = bool(np.all(delta >= -tol)) if delta.size else True
    if not scalar_ok:
        status = "hypotheses not met"
    elif monotone:
        status = "PASS"
    else:
        status = "FAIL: numerical-resolution failure, refine L or ds"
    fv = []
    for k in range(1, len(leaves) - 1):
        a, b, c = leaves[k - 1], leaves[k], leaves[k + 1]
        fd = (c.m_H - a.m_H) / (c.s_base - a.s_base)
        fv.append({"s": b.s_base, "fd": fd, "formula": b.dmH_formula,
                   "error": fd - b.dmH_formula})
    worst = int(np.argmin(delta)) if delta.size else None
    return {"delta_m_H": delta.tolist(), "min_delta": float(delta.min()) if delta.size else 0.0,
            "worst_interval": worst, "monotone": monotone, "scalar_ok": bool(scalar_ok),
            "status": status, "first_variation": fv}


def first_variation_richardson(coarse, fine, s_range=None, tol=1e-9):
    """Ratio of worst first-variation errors at the shared leaves of two foliations."""
    fa = {round(p["s"], 9): p["error"] for p in monotonicity_report(coarse)["first_variation"]}
    fb = {round(p["s"], 9): p["error"] for p in monotonicity_report(fine)["first_variation"]}
    keys = sorted(k for k in fa if k in fb
                  and (s_range is None or s_range[0] <= k <= s_range[1]))
    if not keys:
        raise EstimateUnavailable("the two foliations share no interior leaves")
    ea = max(abs(fa[k]) for k in keys)
    eb = max(abs(fb[k]) for k in keys)
    return {"s_points": keys, "error_coarse": ea, "error_fine": eb,
            "ratio": ea / eb if eb > 0 else math.inf}


@dataclass
class MassLimit:
    m_inf: float
    c: float
    fit_residual: float
    n_tail: int
    bound: float
    ok: bool
    free_exponent: float | None


def mass_limit_estimate(report, s_min=5.0, min_leaves=5):
    """Fit ``m_H = m_inf + c exp(-s_inner)`` on leaves with ``s_inner >= s_min``."""
    tail = [leaf for leaf in report.leaves if leaf.s_inner >= s_min]
    if len(tail) < min_leaves:
        raise EstimateUnavailable(f"{len(tail)} leaves with s_inner >= {s_min:g}, "
                                  f"need {min_leaves}")
    x = np.array([leaf.s_inner for leaf in tail])
    y = np.array([leaf.m_H for leaf in tail])
    X = np.stack([np.ones_like(x), np.exp(-x)], axis=1)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    bound = max(1e-4, 10.0 * resid)
    m_inf = float(coef[0])
    # diagnostic: slope of log|m_H - m_inf| where the deviation clears the fit noise
    dev = np.abs(y - m_inf)
    keep = dev > 10.0 * resid + 1e-300
    free = None
    if np.count_nonzero(keep) >= 3:
        free = float(-np.polyfit(x[keep], np.log(dev[keep]), 1)[0])
    return MassLimit(m_inf, float(coef[1]), resid, len(tail), bound,
                     bool(abs(m_inf - report.m) <= bound), free)


DECAY_BOUNDS = {"sup_w": -0.5, "int_ds_tan_sq": -1.5, "int_ring_A_sq": -3.5}


def _floor(leaf, name):
    # noise levels implied by the rounding in u (see LeafRecord.u_floor)
    uf = leaf.u_floor
    r2 = (2.0 * math.cosh(leaf.s_inner)) ** 2
    if name == "sup_w":
        return 1e3 * np.finfo(float).eps
    if name == "int_ds_tan_sq":
        return 600.0 * uf * uf
    return 1200.0 * uf * uf / r2


def decay_diagnostics(report, s_min=5.0, min_points=3):
    """Tail slopes of ``log`` diagnostics against ``s_inner`` over resolved leaves.

    A leaf counts as resolved for a quantity if the value clears the noise
    floor implied by extended-precision rounding of the graph function.
    """
    tail = [leaf for leaf in report.leaves if leaf.s_inner >= s_min]
    out = {}
    for name, bound in DECAY_BOUNDS.items():
        pts = [(leaf.s_inner, getattr(leaf, name)) for leaf in tail
               if getattr(leaf, name) > _floor(leaf, name)]
        entry = {"n_tail": len(tail), "n_resolved": len(pts), "bound": bound}
        if len(pts) >= min_points:
            x, y = np.array(pts).T
            slope, icpt = np.polyfit(x, np.log(y), 1)
            entry.update(slope=float(slope), ok=bool(slope <= bound), status="fitted")
        elif tail and not pts:
            entry.update(slope=None, ok=None, status="at noise floor")
        else:
            # ok is None: nothing to assert, the tail is not resolved
            entry.update(slope=None, ok=None, status="too few resolved leaves")
        out[name] = entry

    # sup|w| <= C exp(-s_inner): the bound constant must not grow along the tail
    pts = [(leaf.s_inner, leaf.sup_w) for leaf in tail if leaf.sup_w > _floor(leaf, "sup_w")]
    if len(pts) >= 2 * min_points:
        h = len(pts) // 2
        c1 = max(w * math.exp(x) for x, w in pts[:h])
        c2 = max(w * math.exp(x) for x, w in pts[h:])
        out["split_fit"] = {"C_first": c1, "C_second": c2, "ratio": c2 / c1,
                            "ok": bool(c2 <= 3.0 * c1)}
    else:
        out["split_fit"] = {"C_first": None, "C_second": None, "ratio": None, "ok": None}

    scaled = np.array([leaf.mass_identity_scaled for leaf in tail])
    if scaled.size:
        mag = np.abs(scaled)
        ratio = float(mag.max() / mag.min()) if mag.min() > 0 else math.inf
        out["mass_identity"] = {"max": float(mag.max()), "min": float(mag.min()), "ratio": ratio,
                          "ok": bool(ratio <= 10.0)}
    else:
        out["mass_identity"] = {"max": None, "min": None, "ratio": None, "ok": None}
    return out


def penrose_lhs(area, variant="minimal"):
    x = area / (16.0 * math.pi)
    if variant == "minimal":
        return math.sqrt(x) + 4.0 * x**1.5
    return math.sqrt(x)


def penrose_report(report, tol=1e-6, mass_limit=None):
    """Penrose inequality on the boundary leaf, against the mass limit when available."""
    variant = report.variant
    lhs = penrose_lhs(report.leaves[0].area, variant)
    if mass_limit is None:
        try:
            mass_limit = mass_limit_estimate(report)
        except EstimateUnavailable:
            mass_limit = None
    m_lim = mass_limit.m_inf if mass_limit is not None else report.m
    hyp = {"scalar_ok": report.flags.get("scalar_ok"),
           "boundary_minimal": report.flags.get("boundary_minimal"),
           "decay_distance": report.flags.get("decay_distance")}
    if variant == "h2":
        hyp.pop("boundary_minimal")
    holds = bool(lhs <= m_lim + tol)
    met = all(v is not False for k, v in hyp.items() if k != "decay_distance")
    dd = hyp.get("decay_distance")
    if dd is not None and not math.isfinite(dd):
        met = False
    if not met:
        verdict = "hypotheses not met"
    else:
        verdict = "PASS" if holds else "FAIL"
    return {"variant": variant, "lhs": lhs, "m": report.m, "m_limit": m_lim,
            "gap": report.m - lhs, "holds": holds, "verdict": verdict, "hypotheses": hyp,
            "boundary_area": report.leaves[0].area}


def background_check_report(report, tol=1e-8):
    """Leafwise checks that only hold for the unperturbed metric."""
    if report.epsilon != 0.0:
        raise UnsupportedError("background checks need epsilon = 0")
    u_sup = max(float(np.max(np.abs(leaf.u.values))) for leaf in report.leaves)
    mH = report.column("m_H")
    return {"u_sup": u_sup, "m_H_dev": float(np.max(np.abs(mH - report.m))),
            "ok": bool(u_sup == 0.0 and np.max(np.abs(mH - report.m)) <= tol)}
