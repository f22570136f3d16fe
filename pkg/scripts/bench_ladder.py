"""Per-batch FFT cost versus naive sampling over a ladder of sizes.

    python scripts/bench_ladder.py --min-exp 8 --max-exp 18
"""

import argparse

from fftperm.cli import run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-exp", type=int, default=3)
    ap.add_argument("--max-exp", type=int, default=18)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--passes", type=int, default=3)
    ap.add_argument("--naive-samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sizes = [2**e for e in range(args.min_exp, args.max_exp + 1)]
    report = run_bench(sizes, args.seed, args.repeats, args.naive_samples, args.passes)
    print(f"{'n':>8} {'batch ms':>10} {'naive ms':>12} {'speedup':>9} {'x prev':>7}  ns/(n log2 n)")
    for r in report["rows"]:
        n = r["n"]
        per = r["fft_batch_ms"] * 1e6 / (n * max(1, n.bit_length() - 1))
        prev = r["batch_time_ratio_vs_prev"]
        print(f"{n:>8} {r['fft_batch_ms']:>10.4f} {r['naive_n_samples_ms']:>12.2f} {r['speedup']:>9.1f} "
              f"{'' if prev is None else f'{prev:.2f}':>7}  {per:.2f}")


if __name__ == "__main__":
    main()
