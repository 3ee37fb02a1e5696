"""Compare the compiled and pure-Python kernels on realistic workloads.

    python benchmarks/bench_kernels.py [--repeat N]

Prints the best-of-N time per kernel and backend, plus the speedup.
"""
import argparse
import time

import numpy as np

from logprivacy.embedding import TrainConfig, training_pairs
from logprivacy.kernels import available_backends


def levenshtein_workload(rng, n_targets=400, alphabet=12):
    lengths = rng.integers(1, 25, n_targets)
    flat = rng.integers(0, alphabet, lengths.sum()).astype(np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    sources = [rng.integers(0, alphabet, rng.integers(1, 25)).astype(np.int64) for _ in range(20)]
    return sources, flat, offsets


def sgns_workload(rng, n_traces=300, alphabet=12):
    seqs = [rng.integers(0, alphabet, rng.integers(2, 20)).tolist() for _ in range(n_traces)]
    pairs = training_pairs(seqs, 2)
    cfg = TrainConfig()
    negatives = rng.integers(0, alphabet, (len(pairs), cfg.negative_samples)).astype(np.int64)
    w_in = (rng.random((alphabet, cfg.dimension)) - 0.5) / cfg.dimension
    return pairs, negatives, w_in, cfg


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    sources, flat, offsets = levenshtein_workload(rng)
    pairs, negatives, w_in0, cfg = sgns_workload(rng)
    centers = np.ascontiguousarray(pairs[:, 0])
    contexts = np.ascontiguousarray(pairs[:, 1])

    results = {}
    for name, mod in sorted(available_backends().items()):
        def lev():
            for s in sources:
                mod.levenshtein_many(s, flat, offsets)

        def sgns():
            w_in, w_out = w_in0.copy(), np.zeros_like(w_in0)
            mod.sgns_epoch(w_in, w_out, centers, contexts, negatives,
                           cfg.learning_rate, cfg.min_learning_rate, 0, len(pairs))

        results[name] = {"levenshtein_many": best_of(lev, args.repeat),
                         "sgns_epoch": best_of(sgns, args.repeat)}

    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in results) + "     speedup")
    for kernel in ("levenshtein_many", "sgns_epoch"):
        line = f"{kernel:<18}" + "".join(f"{results[b][kernel]:>11.4f}s" for b in results)
        if "cython" in results:
            line += f"{results['python'][kernel] / results['cython'][kernel]:>11.1f}x"
        print(line)
    print(f"({len(sources)} sources x {len(offsets) - 1} targets; {len(pairs)} training pairs)")


if __name__ == "__main__":
    main()
