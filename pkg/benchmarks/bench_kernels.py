"""Compare the compiled kernels with their numpy twins.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--episodes E]

Kernel timings call both modules directly. The end-to-end training time
runs each backend in a fresh interpreter selected via ``MMKTD_BACKEND``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mmktd import _pykernels

try:
    from mmktd import _ckernels
except ImportError:
    _ckernels = None

TRAIN_SNIPPET = """
import time
from mmktd import harness, kernels
cfg = harness.RunConfig(train_episodes={episodes})
t = time.perf_counter()
snap = harness.train(cfg, 0)
print(kernels.BACKEND, sum(snap.episode_steps), time.perf_counter() - t)
"""


def _inputs(rng):
    means = rng.normal(size=(27, 2))
    inv = np.broadcast_to(np.eye(2), (27, 2, 2)).copy()
    s = rng.normal(size=2)
    theta = rng.normal(size=30)
    a = rng.normal(size=(30, 30))
    cov = a @ a.T / 30 + np.eye(30)
    h = rng.normal(size=30)
    g = cov @ h
    r = np.array([0.01, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100], dtype=float)
    w = np.full(11, 1 / 11)
    return {
        "rbf_activations": lambda k: k.rbf_activations(s, means, inv),
        "greedy_action": lambda k: k.greedy_action(s, means, inv, theta, 3, True),
        "bank_fuse": lambda k: k.bank_fuse(theta, cov, g, float(h @ g), 0.3, r, w),
    }


def bench_kernels(repeat):
    calls = _inputs(np.random.default_rng(0))
    print(f"{'kernel':18s} {'python us':>10s} {'compiled us':>12s} {'speedup':>8s}")
    for name, call in calls.items():
        py = min(timeit.repeat(lambda: call(_pykernels), number=repeat, repeat=5)) / repeat
        if _ckernels is None:
            print(f"{name:18s} {py * 1e6:10.2f} {'n/a':>12s}")
            continue
        c = min(timeit.repeat(lambda: call(_ckernels), number=repeat, repeat=5)) / repeat
        print(f"{name:18s} {py * 1e6:10.2f} {c * 1e6:12.2f} {py / c:7.1f}x")


def bench_training(episodes):
    print(f"\npendulum training, {episodes} episodes")
    for backend in ("python", "compiled"):
        env = dict(os.environ, MMKTD_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", TRAIN_SNIPPET.format(episodes=episodes)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        used, steps, secs = out[0], int(out[1]), float(out[2])
        print(f"  requested {backend:8s} ran {used:8s} {steps:6d} steps {secs:7.2f}s "
              f"({secs / steps * 1e6:.0f} us/step)")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=2000)
    parser.add_argument("--episodes", type=int, default=10)
    args = parser.parse_args()
    bench_kernels(args.repeat)
    bench_training(args.episodes)


if __name__ == "__main__":
    main()
