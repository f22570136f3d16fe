"""Command line: ``fftperm pvalue``, ``fftperm bench``, ``fftperm verify``.

Exit codes: 0 success, 1 input parse error, 2 invalid configuration,
3 degenerate input, 4 verification failure. Errors are reported as a single
JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import adapters, estimators, verify
from .estimators import AccuracySpec
from .io import ParseError, parse_grouped, parse_paired, read_text
from .perm import RngStream, has_ties
from .sampler import batch_counts, exact_dot

SCHEMA_VERSION = 1

EXIT_OK, EXIT_PARSE, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_VERIFY = 0, 1, 2, 3, 4

STAT_NAMES = {
    "pearson": "pearson",
    "spearman": "spearman",
    "mann-whitney": "mann_whitney",
    "kruskal-wallis": "kruskal_wallis",
}


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_CONFIG, "invalid_config", message)


@dataclass
class RunConfig:
    method: str
    statistic: str
    epsilon: float
    delta: float
    C: float
    seed: int
    i_max: int
    repeats: int | None
    input: str
    threads: int | None
    samples: int | None = None

    def validate(self):
        if not self.epsilon > 0:
            raise CliError(EXIT_CONFIG, "invalid_config", f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise CliError(EXIT_CONFIG, "invalid_config", f"delta must lie in (0, 1), got {self.delta}")
        if not self.C > 0:
            raise CliError(EXIT_CONFIG, "invalid_config", f"C must be positive, got {self.C}")
        if self.i_max < 0:
            raise CliError(EXIT_CONFIG, "invalid_config", "i-max must be nonnegative")
        if self.repeats is not None and (self.repeats < 1 or self.repeats % 2 == 0):
            raise CliError(EXIT_CONFIG, "invalid_config", "repeats must be odd and positive")
        if self.samples is not None and self.samples < 1:
            raise CliError(EXIT_CONFIG, "invalid_config", "samples must be positive")
        if not 0 <= self.seed < 2**64:
            raise CliError(EXIT_CONFIG, "invalid_config", "seed must fit in 64 bits")


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _paired_reduction(cfg, text):
    x, y = parse_paired(text)
    if cfg.statistic == "pearson":
        return adapters.pearson_reduction(x, y)
    return adapters.spearman_reduction(x, y)


def run_pvalue(cfg: RunConfig) -> dict:
    cfg.validate()
    text = read_text(cfg.input)
    stat = STAT_NAMES[cfg.statistic]
    acc = AccuracySpec(cfg.epsilon, cfg.delta, cfg.C)
    rng = RngStream(cfg.seed)
    kw = dict(acc=acc, rng=rng, i_max=cfg.i_max, repeats=cfg.repeats, m=cfg.samples, threads=cfg.threads)
    try:
        if stat in ("pearson", "spearman", "mann_whitney"):
            if stat == "mann_whitney":
                names, groups = parse_grouped(text)
                if len(groups) != 2:
                    raise CliError(EXIT_CONFIG, "invalid_config",
                                   f"mann-whitney needs exactly 2 groups, found {len(groups)}")
                red = adapters.mann_whitney_reduction(groups[0], groups[1])
            else:
                red = _paired_reduction(cfg, text)
            n, tie_flag = red.n, red.tie_flag
            if cfg.method == "exact" and n > estimators.EXACT_LIMIT:
                raise CliError(EXIT_CONFIG, "invalid_config",
                               f"method exact requires n <= {estimators.EXACT_LIMIT}, got {n}")
            t0 = time.perf_counter()
            res = adapters.reduction_pvalue(red, cfg.method, **kw)
            wall = time.perf_counter() - t0
        else:
            names, groups = parse_grouped(text)
            g = adapters.GroupedSample.from_groups(groups)
            n, tie_flag = g.N, has_ties(g.values)
            if cfg.method == "exact" and n > estimators.EXACT_LIMIT:
                raise CliError(EXIT_CONFIG, "invalid_config",
                               f"method exact requires N <= {estimators.EXACT_LIMIT}, got {n}")
            t0 = time.perf_counter()
            res = adapters.kruskal_wallis_dispatch(g, cfg.method, **kw)
            wall = time.perf_counter() - t0
    except adapters.DegenerateInputError as exc:
        raise CliError(EXIT_DEGENERATE, "degenerate_input", str(exc)) from None
    except estimators.TooManyBatchesError as exc:
        raise CliError(EXIT_CONFIG, "invalid_config", str(exc)) from None
    except ParseError:
        raise
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, "invalid_config", str(exc)) from None
    return {
        "schema_version": SCHEMA_VERSION,
        "p_estimate": res.estimate,
        "method": res.method,
        "statistic": cfg.statistic,
        "n": n,
        "batches": res.batches,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "C": cfg.C,
        "seed": cfg.seed,
        "empirical_batch_variance": res.empirical_batch_variance,
        "tie_flag": bool(tie_flag),
        "hits": res.hits,
        "trials": res.trials,
        "wall_time_ms": wall * 1e3,
    }


def run_bench(sizes, seed: int, repeats: int = 15, naive_samples: int | None = None,
              passes: int = 3) -> dict:
    """Time one FFT batch (n correlated samples) against n independent naive samples.

    Each size is timed ``repeats`` times back to back (warm cache, as in a real
    run); the whole ladder is swept ``passes`` times and the minimum is kept,
    so a transient slowdown during one sweep does not distort the ratios.
    """
    data = np.random.default_rng(seed)
    cases = []
    for i, n in enumerate(sizes):
        u = data.standard_normal(n)
        v = data.standard_normal(n)
        t = exact_dot(u, v)
        gen = RngStream(seed, 1, (i,)).generator()
        batch_counts(u, v, t, gen, 1)  # warm-up
        cases.append((u, v, t, gen))
    best = [float("inf")] * len(sizes)
    for _ in range(passes):
        for i, (u, v, t, gen) in enumerate(cases):
            for _ in range(repeats):
                t0 = time.perf_counter()
                batch_counts(u, v, t, gen, 1)
                best[i] = min(best[i], time.perf_counter() - t0)
    rows = []
    for i, (n, (u, v, t, _)) in enumerate(zip(sizes, cases)):
        m = n if naive_samples is None else min(n, naive_samples)
        t0 = time.perf_counter()
        estimators.naive_mc_pvalue(u, v, t, m, RngStream(seed, 2, (i,)), threads=1)
        naive_s = (time.perf_counter() - t0) * (n / m)
        rows.append({
            "n": n,
            "fft_batch_ms": best[i] * 1e3,
            "naive_n_samples_ms": naive_s * 1e3,
            "naive_extrapolated": m < n,
            "speedup": naive_s / best[i],
            "batch_time_ratio_vs_prev": None if i == 0 else best[i] / best[i - 1],
            "size_ratio_vs_prev": None if i == 0 else n / sizes[i - 1],
        })
    return {"schema_version": SCHEMA_VERSION, "seed": seed, "timing": "min over repeats and passes",
            "repeats": repeats, "passes": passes, "rows": rows}


def run_verify(scope: str) -> tuple[dict, bool]:
    checks = verify.run(scope)
    ok = all(c.passed for c in checks if c.hard)
    report = {
        "schema_version": SCHEMA_VERSION,
        "scope": scope,
        "passed": ok,
        "checks": [c.to_dict() for c in checks],
        "failing": [c.to_dict() for c in checks if c.hard and not c.passed],
    }
    return report, ok


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fftperm", description="FFT-accelerated permutation-test p-values")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pv = sub.add_parser("pvalue", help="p-value of a permutation test on tabular data")
    pv.add_argument("--stat", required=True, choices=sorted(STAT_NAMES))
    pv.add_argument("--method", default="fft", choices=estimators.METHODS)
    pv.add_argument("--epsilon", type=float, default=0.05)
    pv.add_argument("--delta", type=float, default=0.05)
    pv.add_argument("--C", type=float, default=estimators.DEFAULT_C)
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--i-max", type=int, default=estimators.DEFAULT_I_MAX)
    pv.add_argument("--repeats", type=int, default=None)
    pv.add_argument("--samples", type=int, default=None, help="sample count for --method naive")
    pv.add_argument("--input", required=True)
    pv.add_argument("--threads", type=int, default=None)

    b = sub.add_parser("bench", help="FFT batch vs naive sampling timings")
    b.add_argument("--sizes", default="4096,16384,65536")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=15)
    b.add_argument("--passes", type=int, default=3, help="sweeps over the size ladder")
    b.add_argument("--naive-samples", type=int, default=None,
                   help="time only this many naive samples and scale linearly")

    vf = sub.add_parser("verify", help="run invariant suites")
    vf.add_argument("--scope", default="all", choices=(*verify.SCOPES, "all"))
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "pvalue":
            seed = args.seed
            if seed is None:
                seed = secrets.randbits(63)
                print(f"seed: {seed}", file=sys.stderr)
            cfg = RunConfig(args.method, args.stat, args.epsilon, args.delta, args.C, seed,
                            args.i_max, args.repeats, args.input, args.threads, args.samples)
            _emit(run_pvalue(cfg))
            return EXIT_OK
        if args.command == "bench":
            try:
                sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
            except ValueError:
                raise CliError(EXIT_CONFIG, "invalid_config", f"bad --sizes {args.sizes!r}") from None
            if not sizes or min(sizes) < 2:
                raise CliError(EXIT_CONFIG, "invalid_config", "sizes must be integers >= 2")
            if args.repeats < 1 or args.passes < 1:
                raise CliError(EXIT_CONFIG, "invalid_config", "repeats and passes must be positive")
            _emit(run_bench(sizes, args.seed, args.repeats, args.naive_samples, args.passes))
            return EXIT_OK
        report, ok = run_verify(args.scope)
        _emit(report)
        return EXIT_OK if ok else EXIT_VERIFY
    except ParseError as exc:
        err = CliError(EXIT_PARSE, "parse_error", str(exc))
    except CliError as exc:
        err = exc
    sys.stderr.write(json.dumps({"error": err.kind, "exit_code": err.code, "message": str(err)}) + "\n")
    return err.code


if __name__ == "__main__":
    sys.exit(main())
