"""Time the compiled exhaustive-search kernels against the pure-Python ones.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends must return identical labels and values; the script exits
nonzero if they disagree or if the compiled extension is not built.
"""
import argparse
import sys
import time

import numpy as np

from mecsched import _backend
from mecsched.bench import generate_workflow
from mecsched.model import SchedulerConfig, Server, ServerFleet
from mecsched.oracle import brute_force_joint, brute_force_partition

CASES = [
    ("partition", 8, 3),
    ("partition", 10, 3),
    ("partition", 11, 4),
    ("joint", 6, 2),
    ("joint", 7, 3),
    ("joint", 8, 3),
]


def fleet3():
    return ServerFleet(tuple(Server(i, c) for i, c in enumerate([(0.5, 0.6), (0.7, 0.4), (0.6, 0.6)])))


def run_case(kind, T, C, backend):
    dag = generate_workflow(T, 0.4, seed=T * 10 + C, demand_max=0.2)
    cfg = SchedulerConfig(container_count=C)
    if kind == "partition":
        p, v = brute_force_partition(dag, cfg, backend=backend)
        return p.sets, v
    p, m, v = brute_force_joint(dag, fleet3(), cfg, backend=backend)
    return (p.sets, tuple(sorted(m.assignments.items()))), v


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _backend.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; run `pip install --no-build-isolation -e .` first")
        return 1

    print(f"{'kernel':<10} {'T':>3} {'C':>3} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    ok = True
    for kind, T, C in CASES:
        tp, rp = timed(lambda: run_case(kind, T, C, "python"), 1)
        tc, rc = timed(lambda: run_case(kind, T, C, "cython"), args.repeat)
        same = rp[0] == rc[0] and np.float64(rp[1]) == np.float64(rc[1])
        ok &= same
        flag = "" if same else "  MISMATCH"
        print(f"{kind:<10} {T:>3} {C:>3} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x{flag}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
