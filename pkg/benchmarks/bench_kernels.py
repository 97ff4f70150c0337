"""Compiled vs numpy kernels on synthetic graphs.

    python benchmarks/bench_kernels.py --nodes 100000 1000000 --repeat 5

Prints one JSON line per (backend, size, operation) with the best wall
time over ``--repeat`` runs, and checks that the backends agree bit for bit.
"""
import argparse
import json
import os
import time

import numpy as np

from mfrank import kernels
from mfrank.pagerank import ConvergenceSpec, power_iteration
from mfrank.synth import GeneratorSpec, generate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print(json.dumps({"warning": "compiled kernels not built; only the numpy backend is timed"}))
    spec = ConvergenceSpec()
    for n in args.nodes:
        g = generate(GeneratorSpec(n, seed=args.seed))
        x = np.random.default_rng(args.seed).random(n)
        results = {}
        for name in backends:
            kernels.set_backend(name)
            for threads in sorted({1, args.threads}) if name == "compiled" else [1]:
                t_pull, s = best_of(lambda: kernels.pull_sum(g.in_indptr, g.in_indices, x, threads=threads),
                                    args.repeat)
                t_pr, v = best_of(lambda: power_iteration(g, 0.15, spec, threads=threads), args.repeat)
                results[(name, threads)] = (s, v.values)
                for op, t in (("pull_sum", t_pull), ("power_iteration", t_pr)):
                    print(json.dumps({"backend": name, "threads": threads, "nodes": n, "edges": g.edge_count,
                                      "op": op, "seconds": round(t, 6), "iterations": v.iterations}))
        ref = results[("python", 1)]
        agree = all(np.array_equal(s, ref[0]) and np.array_equal(p, ref[1]) for s, p in results.values())
        print(json.dumps({"nodes": n, "backends_bit_identical": agree}))
    kernels.set_backend("compiled" if "compiled" in backends else "python")


if __name__ == "__main__":
    main()
