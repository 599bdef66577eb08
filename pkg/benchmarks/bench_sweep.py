"""Time message-passing sweeps with the compiled and the numpy kernels.

    python benchmarks/bench_sweep.py --n 20000 --sweeps 50

Reports nanoseconds per incidence per sweep for each backend on a Poisson
edge-triangle network, plus one full solve at a point inside the bulk.
"""
import argparse
import time


from loopy_spectra._accel import HAVE_NUMBA
from loopy_spectra.generators import gen_poisson_edge_triangle
from loopy_spectra.messages import MessageState, SolveConfig, solve_at_z, sweep


def time_sweeps(fg, backend, sweeps, z):
    state = MessageState.zeros(fg, z)
    state, _ = sweep(fg, state, backend=backend)  # compile / build plan
    t0 = time.perf_counter()
    for _ in range(sweeps):
        state, _ = sweep(fg, state, backend=backend)
    return (time.perf_counter() - t0) / sweeps


def time_solve(fg, backend, z):
    solve_at_z(fg, z, SolveConfig(max_iter=2), backend=backend)
    t0 = time.perf_counter()
    state = solve_at_z(fg, z, backend=backend)
    return time.perf_counter() - t0, state.iterations


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--sweeps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    fg = gen_poisson_edge_triangle(args.n, 2.0, 2.0, seed=args.seed)
    m = fg.n_incidences
    z = 0.7 + 0.05j
    print(f"n={fg.n} motifs={fg.n_motifs} incidences={m}")
    backends = (["numba"] if HAVE_NUMBA else []) + ["numpy"]
    per = {}
    for b in backends:
        dt = time_sweeps(fg, b, args.sweeps, z)
        per[b] = dt
        solve_dt, its = time_solve(fg, b, z)
        print(f"{b:6s} sweep {dt * 1e3:8.2f} ms  {dt / m * 1e9:6.1f} ns/incidence  "
              f"solve {solve_dt:6.2f} s ({its} sweeps)")
    if len(per) == 2:
        print(f"numpy / numba sweep time: {per['numpy'] / per['numba']:.2f}")


if __name__ == "__main__":
    main()
