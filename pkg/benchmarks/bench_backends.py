"""Benchmark the compiled round-loop kernels against the Python fallback.

Usage: python benchmarks/bench_backends.py [T] [d]
"""

import sys
import time

import numpy as np

from ofwdyn import _backend, learners, sets, streams
from ofwdyn.learners import LearnerConfig


def build(T, d):
    ball = sets.ball(np.zeros(d), 1.0, set_strong_convexity=1.0)
    schedule = streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=0.02, seed=1)
    stream = streams.make_stream(
        streams.DRIFTING, 1.0, schedule, ball, T,
        base_center=np.zeros(d), interior=True, interior_radius=0.5,
    )
    return ball, stream


def time_run(cfg, stream, set_, backend):
    start = time.perf_counter()
    learners.run_learner(cfg, stream, set_, backend=backend, record_inner=False)
    return time.perf_counter() - start


def main():
    T = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
    d = int(sys.argv[2]) if len(sys.argv) > 2 else 8
    set_, stream = build(T, d)
    configs = [
        ("ofw-fixed", LearnerConfig(kind="ofw-fixed", sigma_rule="inv-sqrt-T")),
        ("ofw-linesearch", LearnerConfig(kind="ofw-linesearch")),
        ("ofw-multi", LearnerConfig(kind="ofw-multi", inner_iterations=5)),
        ("ogd", LearnerConfig(kind="ogd")),
        ("greedy", LearnerConfig(kind="greedy")),
    ]
    print(f"T={T} d={d} compiled_available={_backend.compiled_available()}")
    header = f"{'learner':16s} {'python':>10s} {'cython':>10s} {'speedup':>8s}"
    print(header)
    for name, cfg in configs:
        t_py = time_run(cfg, stream, set_, "python")
        if _backend.compiled_available():
            t_cy = time_run(cfg, stream, set_, "cython")
            print(f"{name:16s} {t_py:9.4f}s {t_cy:9.4f}s {t_py / t_cy:7.1f}x")
        else:
            print(f"{name:16s} {t_py:9.4f}s {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
