"""Compare the compiled and numpy kernels on the shock-tube grid.

    python benchmarks/bench_kernels.py [--nx 11 --ny 11 --nz 800 --repeat 5]
"""
import argparse
import time

import numpy as np

from lbforge import kernels
from lbforge.lattice import PRESETS
from lbforge.sim import ScenarioConfig, ShockTube
from lbforge.solver import solve


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", default="d3v95", choices=["d2v33", "d3v95"])
    ap.add_argument("--nx", type=int, default=11)
    ap.add_argument("--ny", type=int, default=11)
    ap.add_argument("--nz", type=int, default=800)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    model = solve(PRESETS[args.preset]).solutions[0].model
    backends = ["python"] + (["compiled"] if kernels.compiled_backend is not None else [])
    results = {}
    for name in backends:
        tube = ShockTube(ScenarioConfig(model, nx=args.nx, ny=args.ny, nz=args.nz, steps=0, backend=name))
        tube.step()  # warm-up
        results[name] = (best_of(tube.collide, args.repeat), best_of(tube.stream, args.repeat), tube.f.copy())

    nodes = args.nx * args.ny * args.nz
    print(f"{args.preset}: {nodes} nodes x {tube.Q} velocities, threads={tube.threads}")
    print(f"{'backend':<10}{'collide [s]':>14}{'stream [s]':>14}{'Mnode/s':>12}")
    for name, (tc, ts, _) in results.items():
        print(f"{name:<10}{tc:>14.4f}{ts:>14.4f}{nodes / (tc + ts) / 1e6:>12.3f}")
    if len(results) == 2:
        tc_p, ts_p, _ = results["python"]
        tc_c, ts_c, _ = results["compiled"]
        print(f"speed-up: collide {tc_p / tc_c:.2f}x, stream {ts_p / ts_c:.2f}x, "
              f"step {(tc_p + ts_p) / (tc_c + ts_c):.2f}x")
        # both backends start from the same state; after one warm-up step they must agree
        diff = np.abs(results["python"][2] - results["compiled"][2]).max()
        print(f"max |f_python - f_compiled| after repeated updates: {diff:.3e}")
    else:
        print("compiled kernels not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
