#!/usr/bin/env python3
"""Compare the numba and numpy kernel backends on the hot paths.

Run directly: python benchmarks/bench_kernels.py [--sizes 12,16,20]

The backend is chosen at import time from FVRING_BACKEND, so this script
re-executes itself once per backend and prints a combined table.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def time_call(fn, *args, min_time=0.5, repeats=3):
    best = np.inf
    for _ in range(repeats):
        k = 0
        t0 = time.perf_counter()
        while time.perf_counter() - t0 < min_time:
            fn(*args)
            k += 1
        best = min(best, (time.perf_counter() - t0) / k)
    return best


def run_backend(sizes):
    from fvring import kernels
    from fvring.model import ModelSpec, build_hamiltonian

    results = {"backend": kernels.BACKEND, "matvec_ms": {}, "diag_ms": {},
               "moments_ms": {}}
    rng = np.random.default_rng(0)
    for L in sizes:
        spec = ModelSpec(L=L, g=0.4, h=0.3)
        H = build_hamiltonian(spec)
        psi = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
        psi /= np.linalg.norm(psi)
        out = np.empty_like(psi)
        H.apply(psi, out=out)  # warm the JIT before timing
        results["matvec_ms"][L] = 1e3 * time_call(H.apply, psi, out)

        weights = np.zeros(L // 2)
        weights[0] = 1.0
        kernels.distance_diagonal(L, weights, 0.3, 0.0)
        results["diag_ms"][L] = 1e3 * time_call(
            kernels.distance_diagonal, L, weights, 0.3, 0.0
        )

        real = np.real(psi) / np.linalg.norm(np.real(psi))
        kernels.chebyshev_moments(H.diag, H.g, L, real, 0.0, H.halfwidth_bound(), 64)
        results["moments_ms"][L] = 1e3 * time_call(
            kernels.chebyshev_moments, H.diag, H.g, L, real, 0.0,
            H.halfwidth_bound(), 256,
        ) / 128.0  # per matvec-equivalent (two moments per matvec)
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="12,16,20")
    parser.add_argument("--_emit-json", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if args._emit_json:
        print(json.dumps(run_backend(sizes)))
        return

    rows = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, FVRING_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, __file__, "--sizes", args.sizes, "--_emit-json"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows[backend] = json.loads(out.stdout.strip().splitlines()[-1])

    print(f"{'kernel':<12} {'L':>3} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for kernel in ("matvec_ms", "diag_ms", "moments_ms"):
        for L in sizes:
            a = rows["numba"][kernel][str(L)]
            b = rows["numpy"][kernel][str(L)]
            print(f"{kernel[:-3]:<12} {L:>3} {a:>10.3f} {b:>10.3f} {b / a:>7.1f}x")


if __name__ == "__main__":
    main()
