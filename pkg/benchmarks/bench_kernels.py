#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times each hot kernel on a large plane, then a full solve per backend in a
subprocess (backend choice is fixed at import time). Run:

    python benchmarks/bench_kernels.py [--size 512] [--reps 30]
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from unreflect._kernels import available_backends

SOLVE_SNIPPET = """
import time
import numpy as np
import unreflect
from unreflect.synth import SyntheticSceneParams, make_scene

y, t, _ = make_scene((128, 128), SyntheticSceneParams(seed=0))
start = time.perf_counter()
out, trace = unreflect.suppress(y, None, unreflect.SolverParams())
elapsed = time.perf_counter() - start
print(f"{unreflect.BACKEND_NAME} {elapsed:.4f}")
"""


def time_call(fn, reps):
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def bench_primitives(size, reps):
    rng = np.random.default_rng(0)
    img = np.ascontiguousarray(rng.random((size, size)))
    dx = np.ascontiguousarray(rng.normal(0, 0.3, (size, size)))
    dy = np.ascontiguousarray(rng.normal(0, 0.3, (size, size)))
    phi = np.ascontiguousarray(rng.random((size, size)))
    g = np.ascontiguousarray(rng.normal(0, 0.1, (size, size)))

    backends = available_backends()
    cases = {
        "grad": lambda b: b.grad(img),
        "grad_adjoint": lambda b: b.grad_adjoint(dx, dy),
        "laplacian": lambda b: b.laplacian(img),
        "laplacian_adjoint": lambda b: b.laplacian_adjoint(img),
        "d_step": lambda b: b.d_step(dx, dy, phi, 2e-3, 0.5),
    }

    print(f"\nkernel timings on {size}x{size} float64 (median of {reps}):")
    header = f"{'kernel':<20}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for case, make in cases.items():
        times = {name: time_call(lambda m=mod: make(m), reps) for name, mod in backends.items()}
        row = f"{case:<20}" + "".join(f"{times[n] * 1e3:>10.3f}ms" for n in backends)
        if "numpy" in times and "native" in times:
            row += f"{times['numpy'] / times['native']:>9.2f}x"
        print(row)

    # adam_update mutates state; rebuild per call
    print(f"{'adam_update':<20}", end="")
    adam_times = {}
    for name, mod in backends.items():
        t = img.copy()
        m = np.zeros_like(t)
        v = np.zeros_like(t)
        adam_times[name] = time_call(
            lambda: mod.adam_update(t, g, m, v, 1e-3, 0.9, 0.999, 0.1, 0.001, 1e-8),
            reps,
        )
        print(f"{adam_times[name] * 1e3:>10.3f}ms", end="")
    if "numpy" in adam_times and "native" in adam_times:
        print(f"{adam_times['numpy'] / adam_times['native']:>9.2f}x")
    else:
        print()


def bench_full_solve():
    print("\nfull 128x128 solve, stock parameters (fresh process per backend):")
    results = {}
    for backend in ("python", "native"):
        env = dict(os.environ, REFLECT_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET],
            capture_output=True,
            text=True,
            env=env,
        )
        if proc.returncode != 0:
            print(f"  {backend}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        name, elapsed = proc.stdout.split()
        results[name] = float(elapsed)
        print(f"  {name:<8} {float(elapsed):.3f}s")
    if len(results) == 2:
        print(f"  speedup  {results['numpy'] / results['native']:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--reps", type=int, default=30)
    args = parser.parse_args()

    names = ", ".join(available_backends())
    print(f"available backends: {names}")
    bench_primitives(args.size, args.reps)
    bench_full_solve()


if __name__ == "__main__":
    main()
