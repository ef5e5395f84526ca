"""Benchmark: compiled SC kernel vs the pure-Python fallback.

Runs the trellis decoder (hidden two-state chain) and the scalar CSI decoder
over a range of blocklengths and reports per-decode wall time for both
backends, plus the speedup.  The two backends are also cross-checked for
agreement on every benchmarked instance.

Usage:
    python benchmarks/bench_sc.py [--n 6 8 10] [--repeats 5] [--seed 0]
"""

import argparse
import sys
import time

import numpy as np

try:
    import polarmem._sc_core as compiled
except ImportError:
    compiled = None
import polarmem._sc_pure as pure
from polarmem import build_ge_qec, build_queue_channel, transmit
from polarmem.polar import PolarCode, _leaf_csi, _leaf_trellis, encode


def time_decode(fn, leaf, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(leaf, *args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_mode(label, channel, leaf_fn, ns, repeats, seed):
    rng = np.random.default_rng(seed)
    print(f"\n{label}")
    print(f"{'N':>6}  {'pure (ms)':>10}  {'compiled (ms)':>13}  {'speedup':>8}")
    for n in ns:
        size = 1 << n
        code = PolarCode(n=n, info_set=np.arange(size // 2, size))
        message = rng.integers(0, 2, len(code.info_set)).astype(np.uint8)
        record = transmit(channel, encode(code, message), int(rng.integers(2 ** 31)),
                          reveal_states=True)
        if leaf_fn is _leaf_csi:
            leaf = leaf_fn(channel, record.outputs, record.states)
            args = (np.ones((1, 1)), np.ones(1), code.frozen_mask, code.frozen_values)
        else:
            leaf = leaf_fn(channel, record.outputs)
            args = (channel.chain.matrix, channel.stationary,
                    code.frozen_mask, code.frozen_values)
        t_pure, (u_p, p_p) = time_decode(pure.sc_trellis, leaf, args, repeats)
        if compiled is None:
            print(f"{size:>6}  {t_pure * 1e3:>10.3f}  {'n/a':>13}  {'n/a':>8}")
            continue
        t_comp, (u_c, p_c) = time_decode(compiled.sc_trellis, leaf, args, repeats)
        assert np.array_equal(u_p, u_c), "backend decision mismatch"
        assert np.allclose(p_p, p_c, rtol=1e-12, atol=1e-15), "backend posterior mismatch"
        print(f"{size:>6}  {t_pure * 1e3:>10.3f}  {t_comp * 1e3:>13.3f}  "
              f"{t_pure / t_comp:>7.1f}x")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[6, 8, 10],
                        help="log2 blocklengths to benchmark")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions (best-of)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if compiled is None:
        print("warning: compiled backend not importable; timing pure backend only",
              file=sys.stderr)

    trellis_channel = build_ge_qec(0.1, 0.3, 0.01, 0.4)
    bench_mode("matrix-trellis SC (hidden 2-state chain)", trellis_channel,
               _leaf_trellis, args.n, args.repeats, args.seed)

    csi_channel = build_queue_channel(0.8, 1.0, lambda s: min(1.0, 0.1 + 0.1 * s),
                                      level=20)
    bench_mode("scalar SC (receiver CSI)", csi_channel,
               _leaf_csi, args.n, args.repeats, args.seed + 1)


if __name__ == "__main__":
    main()
