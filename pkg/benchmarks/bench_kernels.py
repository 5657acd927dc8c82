"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--sweeps 3] [--size 24]

Both backends run the same seeded workload and must end in the same state.
"""

import argparse
import time

import numpy as np

from rostexplore import kernels
from rostexplore.evaluation import batch_label
from rostexplore.explorer import explore
from rostexplore.generative import GenConfig, sample_world
from rostexplore.topic_model import Hyperparams


def workloads(size, sweeps):
    cfg = GenConfig(size, size, K=8, V=200, alpha=0.01, beta=0.1, delta=3, words_per_cell=20, seed=1)
    hyper = Hyperparams(K=8, V=200, alpha=0.1, beta=0.1, delta=1)
    world = sample_world(cfg).world
    return {
        "generate (polya urn)": lambda: sample_world(cfg).world.truth_labels,
        f"batch gibbs ({sweeps} sweeps)": lambda: batch_label(world, hyper, sweeps, seed=0)[1].nwk,
        "explore topic, 40 steps x 200 refines":
            lambda: explore(world, "topic", 40, hyper, refine_budget=200, seed=0)[1].nwk,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sweeps", type=int, default=3)
    ap.add_argument("--size", type=int, default=24)
    args = ap.parse_args()
    if "compiled" not in kernels.BACKENDS:
        raise SystemExit("compiled extension not built; run `pip install -e .` first")
    previous = kernels.BACKEND
    print(f"{'workload':40s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, fn in workloads(args.size, args.sweeps).items():
        res, secs = {}, {}
        for backend in ("python", "compiled"):
            kernels.use(backend)
            t0 = time.perf_counter()
            res[backend] = fn()
            secs[backend] = time.perf_counter() - t0
        assert np.array_equal(res["python"], res["compiled"]), name
        print(f"{name:40s} {secs['python']:10.3f} {secs['compiled']:11.4f} "
              f"{secs['python'] / secs['compiled']:7.1f}x")
    kernels.use(previous)


if __name__ == "__main__":
    main()
