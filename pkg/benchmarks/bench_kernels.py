"""Time the compiled and numpy lens-chain counters on identical batches.

Usage::

    python benchmarks/bench_kernels.py --k 3 --lambdas 10,50,200 --repeats 5
"""
from __future__ import annotations

import argparse
import statistics
import time
from fractions import Fraction

import numpy as np

from khop import _chains_py
from khop.simulator import BATCH_SIZE, KEY_BITS, SimConfig, stream

try:
    from khop import _chains
except ImportError:  # pragma: no cover - depends on the build
    _chains = None


def make_batch(config: SimConfig, size: int):
    """Draw one batch of lens keys exactly as the simulator does."""
    rng = stream(config.seed, 0)
    tau = float(config.tau)
    keys, offsets = [], []
    for j in range(config.k - 1):
        n = rng.poisson(config.intensities[j] * tau, size=size).astype(np.int64)
        offsets.append(np.concatenate(([0], np.cumsum(n))).astype(np.int64))
        keys.append(rng.integers(0, 1 << KEY_BITS, size=int(n.sum()), dtype=np.int64))
    return keys, offsets


def time_call(fn, keys, offsets, size, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(keys, offsets, size)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--t", type=Fraction, default=None, help="endpoint (default (k - 1/2) r)")
    p.add_argument("--lambdas", default="1,10,50,200")
    p.add_argument("--batch", type=int, default=BATCH_SIZE)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args(argv)
    t = args.t if args.t is not None else Fraction(2 * args.k - 1, 2)

    print(f"k={args.k} t={t} batch={args.batch} repeats={args.repeats} (median wall time)")
    print(f"{'lambda':>8} {'points':>10} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for lam in (Fraction(x) for x in args.lambdas.split(",")):
        cfg = SimConfig(args.k, 1, t, lam, seed=1)
        keys, offsets = make_batch(cfg, args.batch)
        points = sum(len(k) for k in keys)
        t_py, ref = time_call(_chains_py.count_chains, keys, offsets, args.batch, args.repeats)
        if _chains is None:
            print(f"{float(lam):>8g} {points:>10d} {1e3 * t_py:>10.2f} {'n/a':>10} {'':>8}")
            continue
        t_cy, got = time_call(_chains.count_chains, keys, offsets, args.batch, args.repeats)
        if not np.array_equal(ref, got):
            raise SystemExit("backends disagree")
        print(f"{float(lam):>8g} {points:>10d} {1e3 * t_py:>10.2f} {1e3 * t_cy:>10.2f} {t_py / t_cy:>7.2f}x")


if __name__ == "__main__":
    main()
