"""Compare the numba and numpy versions of the two hot kernels.

    python benchmarks/bench_kernels.py [--cells 2048] [--steps 2000] [--pairs 512]

Both versions run on identical inputs; the script reports wall time per
call and the largest relative difference between their results.
"""

import argparse
import time

import numpy as np

from kslab import Gaussian, SolverConfig, init_profile
from kslab import _kernels
from kslab.diagnostics import _pair_radii, angular_nodes
from kslab.solver import _Geometry


def _best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_advance(n_cells, n_steps, repeat):
    cfg = SolverConfig(nu=2, n_cells=n_cells, t_end=10.0)
    rho0 = init_profile(Gaussian(1.0), 30.0, cfg)
    geo = _Geometry(np.asarray(rho0.faces), 2)

    def call(kernel):
        rho = np.array(rho0.values)
        M = np.concatenate([[0.0], np.cumsum(rho * geo.vol)])
        res = kernel(rho, M, geo.vol, geo.vol_inv, geo.area, geo.area_dr, geo.ginv, 2, 0.0, 0.0,
                     np.inf, 0.9, geo.dt_diff, geo.hmin, geo.pos_diff, geo.pos_adv, np.inf,
                     1e-14, n_steps)
        return rho, res

    call(_kernels.advance_numba)  # compile
    t_nb, (rho_nb, _) = _best_of(lambda: call(_kernels.advance_numba), repeat)
    t_np, (rho_np, _) = _best_of(lambda: call(_kernels.advance_numpy), repeat)
    diff = float(np.max(np.abs(rho_nb - rho_np)) / np.max(np.abs(rho_np)))
    return t_nb / n_steps, t_np / n_steps, diff


def bench_pair_sum(n_cells, repeat):
    cfg = SolverConfig(nu=3, n_cells=n_cells, R=8.0)
    rho = init_profile(Gaussian(1.0), 10.0, cfg)
    r, m = _pair_radii(rho)
    w, wt = angular_nodes(3, float(np.min(1.0 - r[:-1] / r[1:])))
    _kernels.pair_sum_numba(r, m, w, wt, 3)
    t_nb, v_nb = _best_of(lambda: _kernels.pair_sum_numba(r, m, w, wt, 3), repeat)
    t_np, v_np = _best_of(lambda: _kernels.pair_sum_numpy(r, m, w, wt, 3), repeat)
    return t_nb, t_np, abs(v_nb - v_np) / abs(v_np), w.size


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=2048)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--pairs", type=int, default=512, help="cells for the pair-sum benchmark")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    a_nb, a_np, a_diff = bench_advance(args.cells, args.steps, args.repeat)
    p_nb, p_np, p_diff, nodes = bench_pair_sum(args.pairs, args.repeat)
    print(f"{'kernel':<34}{'numba':>12}{'numpy':>12}{'speedup':>10}{'rel diff':>11}")
    print(f"{f'advance ({args.cells} cells, per step)':<34}{a_nb * 1e6:>10.2f}us{a_np * 1e6:>10.2f}us"
          f"{a_np / a_nb:>9.1f}x{a_diff:>11.1e}")
    print(f"{f'pair_sum ({args.pairs} cells, {nodes} nodes)':<34}{p_nb * 1e3:>10.2f}ms{p_np * 1e3:>10.2f}ms"
          f"{p_np / p_nb:>9.1f}x{p_diff:>11.1e}")


if __name__ == "__main__":
    main()
