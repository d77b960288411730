"""Compare the compiled and numpy planar ray-cast kernels.

    python3 benchmarks/bench_kernels.py --n 256 --rays 20000
"""

import argparse
import time

import numpy as np

from chordflow import _backend, _kernels_py
from chordflow.body import make_canonical_body
from chordflow.sphere import make_circle_grid


def time_impl(impl, args, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = impl.raycast2d(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=256, help="circle grid size")
    p.add_argument("--rays", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    body = make_canonical_body("ellipse", [2.0, 1.0], make_circle_grid(args.n))
    sf = body.support
    a, b = sf.coef
    rng = np.random.default_rng(args.seed)
    ang = 2.0 * np.pi * rng.random(args.rays)
    u = np.column_stack([np.cos(ang), np.sin(ang)])
    z = 0.5 * rng.random((args.rays, 1)) * body.points[rng.integers(0, args.n, args.rays)]
    kargs = (a, b, sf.grid.nodes[:, 0].copy(), sf.grid.nodes[:, 1].copy(), sf.h, z, u, False)

    t_py, r_py = time_impl(_kernels_py, kargs, args.repeat)
    print(f"grid N={args.n}, rays={args.rays}")
    print(f"numpy     : {t_py:.4f} s  ({1e6 * t_py / args.rays:.2f} us/ray)")
    if _backend._kernels is None:
        print("compiled  : extension not built")
        return
    t_c, r_c = time_impl(_backend._kernels, kargs, args.repeat)
    print(f"compiled  : {t_c:.4f} s  ({1e6 * t_c / args.rays:.2f} us/ray)")
    print(f"speed-up  : {t_py / t_c:.1f}x")
    print(f"max |rho difference| : {np.max(np.abs(r_py[0] - r_c[0])):.3e}")


if __name__ == "__main__":
    main()
