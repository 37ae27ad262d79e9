"""Command-line driver.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 solver divergence.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import foliation as fol
from .config import ExperimentConfig, load_config
from .errors import (BoundaryNotMinimalError, ConfigError, DivergenceError, FoliationAbort,
                     LinearSolveError, MatchingError, ResonanceError)
from .reporting import Check, write_outputs

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIVERGENCE = 0, 1, 2, 3


def _config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig().validate()
    if args.resolution is not None:
        cfg.resolution = args.resolution
    if args.variant is not None:
        cfg.variant = args.variant
    cfg.validate()
    out = args.out or cfg.out_dir or "out"
    return cfg, out


def _finish(out, data, checks, leaves=None, code=None):
    if code is None:
        code = EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
    data["exit_code"] = code
    data["checks"] = [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    write_outputs(out, data, checks, leaves)
    for c in checks:
        print(c.line())
    return code


def _run_foliation(cfg, out, command):
    """Foliate and evaluate; returns (code, report data, checks, leaves)."""
    metric = cfg.metric()
    data = {"command": command, "config": cfg.as_dict()}
    checks = []
    try:
        rep = fol.foliate(metric, s_max=cfg.s_max, ds=cfg.ds, settings=cfg.settings(),
                          L=cfg.resolution, variant=cfg.variant,
                          decay_check=cfg.decay_distance)
    except BoundaryNotMinimalError as exc:
        data["error"] = {"type": "boundary not minimal", "message": str(exc)}
        checks.append(Check("boundary not minimal", False, str(exc)))
        return EXIT_FAIL, data, checks, None, None
    except FoliationAbort as exc:
        data["error"] = {"type": "foliation abort", "reason": exc.reason,
                         "leaf_index": exc.leaf_index, "message": str(exc)}
        checks.append(Check(f"foliation (aborted at leaf {exc.leaf_index})", False, str(exc)))
        code = EXIT_DIVERGENCE if exc.reason == "divergence" else EXIT_FAIL
        return code, data, checks, exc.report.leaves, None

    leaves = rep.leaves
    data["flags"] = rep.flags
    data["n_leaves"] = len(leaves)
    checks.append(Check("foliation: all leaves converged, stable and lapse-positive", True,
                        f"{len(leaves)} leaves, s in [{leaves[0].s_base:.6g}, {leaves[-1].s_base:.6g}]"))
    checks.append(Check("leaf areas strictly increasing", rep.flags["area_increasing"]))

    mono = fol.monotonicity_report(rep, tol=cfg.monotone_tol)
    data["monotonicity"] = mono
    if mono["scalar_ok"]:
        checks.append(Check("Hawking mass non-decreasing", mono["monotone"],
                            f"min delta = {mono['min_delta']:.3e}; {mono['status']}"))
    try:
        ml = fol.mass_limit_estimate(rep)
        data["mass_limit"] = ml.__dict__
        checks.append(Check("mass limit equals m", ml.ok,
                            f"m_inf = {ml.m_inf:.12g}, bound {ml.bound:.1e}"))
    except fol.EstimateUnavailable as exc:
        ml = None
        data["mass_limit"] = {"unavailable": str(exc)}

    decay = fol.decay_diagnostics(rep)
    data["decay"] = decay
    for name in fol.DECAY_BOUNDS:
        d = decay[name]
        if d["ok"] is not None:
            checks.append(Check(f"decay slope of {name} <= {d['bound']}", d["ok"],
                                f"slope = {d['slope']:.3f} over {d['n_resolved']} leaves"))

    pen = fol.penrose_report(rep, tol=cfg.penrose_tol, mass_limit=ml)
    data["penrose"] = pen
    if pen["verdict"] != "hypotheses not met":
        checks.append(Check(f"Penrose inequality ({pen['variant']} boundary)", pen["holds"],
                            f"LHS = {pen['lhs']:.10g}, m_limit = {pen['m_limit']:.10g}"))
    data["leaves"] = [{k: v for k, v in leaf.row().items()} | {"s_hat": leaf.s_hat,
                      "mass_identity_scaled": leaf.mass_identity_scaled, "iterations": leaf.iterations,
                      "residual": leaf.residual, "dmH_formula": leaf.dmH_formula}
                      for leaf in leaves]
    return None, data, checks, leaves, pen


def cmd_verify_background(cfg, out):
    from .suite import background_suite

    checks = background_suite(cfg.m, cfg.resolution, cfg.seed)
    data = {"command": "verify-background", "config": cfg.as_dict()}
    return _finish(out, data, checks)


def cmd_foliate(cfg, out):
    code, data, checks, leaves, _ = _run_foliation(cfg, out, "foliate")
    return _finish(out, data, checks, leaves, code)


def cmd_penrose(cfg, out):
    code, data, checks, leaves, pen = _run_foliation(cfg, out, "penrose")
    if pen is not None:
        gap = pen["gap"]
        eq = " (equality case)" if abs(gap) <= 1e-10 else ""
        gap_txt = "0" if abs(gap) <= 1e-10 else f"{gap:.6g}"
        print(f"variant      {pen['variant']}")
        print(f"LHS          {pen['lhs']:.6g}")
        print(f"m            {pen['m']:.6g}")
        print(f"m_limit      {pen['m_limit']:.6g}")
        print(f"gap = {gap_txt}{eq}")
        print(f"verdict      {pen['verdict']}")
        for k, v in pen["hypotheses"].items():
            print(f"  {k:<18}{v}")
        checks = [c for c in checks if c.name.startswith(("foliation", "Penrose"))]
    return _finish(out, data, checks, leaves, code)


def cmd_match_check(cfg, out, tol=1e-8):
    metric = cfg.metric()
    data = {"command": "match-check", "config": cfg.as_dict()}
    try:
        pts = fol.matching_check(metric, cfg.match_window, settings=cfg.settings(),
                                 L=cfg.resolution)
    except (MatchingError, ResonanceError) as exc:
        data["error"] = {"type": type(exc).__name__, "message": str(exc)}
        return _finish(out, data, [Check("matching", False, str(exc))], code=EXIT_FAIL)
    data["matching"] = [p.__dict__ for p in pts]
    checks = [Check(f"free and prescribed leaves agree at s = {p.s:g}", p.distance <= tol,
                    f"s~ = {p.s_tilde:.15g}, sup distance = {p.distance:.2e}") for p in pts]
    return _finish(out, data, checks)


COMMANDS = {
    "verify-background": cmd_verify_background,
    "foliate": cmd_foliate,
    "penrose": cmd_penrose,
    "match-check": cmd_match_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="adscmc",
                                description="CMC foliations of asymptotically Schwarzschild-AdS metrics")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI experiment configuration")
        sp.add_argument("--out", help="output directory (default: [output] dir or ./out)")
        sp.add_argument("--resolution", type=int, help="override the harmonic degree L")
        sp.add_argument("--variant", choices=("minimal", "h2"), help="boundary variant")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg, out = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, out)
    except (DivergenceError, LinearSolveError) as exc:
        os.makedirs(out, exist_ok=True)
        print(f"solver divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
