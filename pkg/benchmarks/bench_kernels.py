"""Benchmark the element-projection kernels: numba JIT vs pure numpy.

Times the per-element hot path (Jacobians, inverses, index-map minors,
monomial evaluation) on a representative 3D face-element workload, then
the full element least-squares projection through each backend.

Run:  python benchmarks/bench_kernels.py [--elements 256] [--points 216]
The numpy path is what CUBEFORMS_DISABLE_JIT=1 selects at import time.
"""

import argparse
import random
import time

import numpy as np

from cubeforms import _kernels
from cubeforms.meshlab import element_l2_error, gauss_rule, target_trig
from cubeforms.spaces import build_Qminus
from cubeforms.verify import random_rational_multilinear


def time_kernels(impl, coeffs, alphas, points, exps, sig_idx, repeats):
    jacs = impl["multilinear_jacobian"](coeffs, alphas, points)
    dets, invs = impl["jacobian_det_inv"](jacs)
    impl["inverse_minors"](invs, sig_idx, sig_idx)
    impl["eval_monomials"](points, exps)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        jacs = impl["multilinear_jacobian"](coeffs, alphas, points)
        dets, invs = impl["jacobian_det_inv"](jacs)
        impl["inverse_minors"](invs, sig_idx, sig_idx)
        impl["eval_monomials"](points, exps)
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--elements", type=int, default=256)
    parser.add_argument("--points", type=int, default=216)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    rng = random.Random(7)
    space = build_Qminus(2, 2, 3)
    maps = [random_rational_multilinear(3, rng) for _ in range(args.elements)]
    points = np.random.default_rng(7).random((args.points, 3))
    exps = np.array(
        sorted({e for f in space.basis for p in f.components.values() for e in p.terms}),
        dtype=np.int64,
    )
    sig_idx = np.array([[1, 2], [0, 2], [0, 1]], dtype=np.int64)
    coeffs, alphas = maps[0].float_arrays()

    print(f"workload: {args.points} points, {exps.shape[0]} monomials, "
          f"{len(space.basis)} basis forms, active backend = {_kernels.BACKEND}")
    print(f"{'backend':>8} {'kernel time/el':>16}")
    times = {}
    for name, impl in _kernels.backends().items():
        dt = time_kernels(impl, coeffs, alphas, points, exps, sig_idx, args.repeats)
        times[name] = dt
        print(f"{name:>8} {dt * 1e3:>13.3f} ms")
    if len(times) == 2:
        print(f"speedup numba vs numpy: {times['numpy'] / times['numba']:.2f}x")

    quad = gauss_rule(3, 6)
    target = target_trig(3, 2, 0.25)
    element_l2_error(maps[0], space, target, quad)  # warm-up
    t0 = time.perf_counter()
    for fmap in maps:
        element_l2_error(fmap, space, target, quad)
    dt = time.perf_counter() - t0
    print(f"full projection ({args.elements} elements, active backend): "
          f"{dt:.3f} s total, {dt / args.elements * 1e3:.2f} ms/element")


if __name__ == "__main__":
    main()
