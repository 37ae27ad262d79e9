"""Compare the numba and pure-numpy mean-curvature kernels.

    python benchmarks/bench_kernels.py [--L 15] [--repeat 5]

Part 1 times the kernel on the batch used by the basis-mode Jacobian
(2K probe graphs).  Part 2 times a full free solve and a short foliation in
subprocesses with and without ADSCMC_DISABLE_NUMBA=1.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from adscmc import kernels
from adscmc.background import BackgroundModel
from adscmc.geometry import graph_jet
from adscmc.metric import PerturbedMetric, standard_family
from adscmc.sphere import SphereField, SphereGrid

SOLVE_SNIPPET = """
import time
from adscmc import BackgroundModel, PerturbedMetric, SphereGrid, foliate, solve_free_cmc, standard_family
from adscmc.solver import SolveSettings
g = PerturbedMetric(BackgroundModel(1.0), standard_family(1e-3))
grid = SphereGrid({L})
solve_free_cmc(1.0, g, grid=grid)   # warm-up (numba compile)
t = time.perf_counter()
solve_free_cmc(1.0, g, grid=grid, settings=SolveSettings(jacobian="basis"))
t1 = time.perf_counter() - t
t = time.perf_counter()
foliate(g, s_max=2.0, ds=0.1, grid=grid)
print(t1, time.perf_counter() - t)
"""


def best_of(f, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        f()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_batch(L):
    grid = SphereGrid(L)
    metric = PerturbedMetric(BackgroundModel(1.0), standard_family(1e-3))
    u = SphereField.harmonic(grid, 2, 0, 1e-3)
    base = np.concatenate([u.values[:, None], graph_jet(u)], axis=1)
    rng = np.random.default_rng(0)
    probes = base[None] + 1e-6 * rng.standard_normal((2 * grid.K,) + base.shape)
    g, dg, _ = metric.evaluate(1.0 + probes[..., 0], metric.angular_on(grid), order=1)
    return g, dg, np.ascontiguousarray(probes[..., 1:])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=15)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    g, dg, du = kernel_batch(args.L)
    print(f"kernel batch: {g.shape[0]} probes x {g.shape[1]} nodes (L={args.L})")
    ref = kernels.mean_curvature_numpy(g, dg, du)
    t_np = best_of(lambda: kernels.mean_curvature_numpy(g, dg, du), args.repeat)
    print(f"  numpy  {t_np * 1e3:9.2f} ms")
    if kernels.use_numba():
        out = kernels.mean_curvature_numba(g, dg, du)   # compile
        diff = float(np.max(np.abs(out - ref)))
        t_nb = best_of(lambda: kernels.mean_curvature_numba(g, dg, du), args.repeat)
        print(f"  numba  {t_nb * 1e3:9.2f} ms   speedup {t_np / t_nb:5.1f}x   max |diff| {diff:.1e}")
    else:
        print("  numba unavailable or disabled")

    print("free solve (basis Jacobian) and foliation to s=2, seconds:")
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, ADSCMC_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(L=args.L)], env=env,
                             capture_output=True, text=True, check=True)
        solve, fol = map(float, res.stdout.split())
        print(f"  {label:<6} solve {solve:7.3f}   foliate {fol:7.3f}")


if __name__ == "__main__":
    main()
