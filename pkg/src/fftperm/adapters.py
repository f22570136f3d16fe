"""Reductions of rank and correlation tests to ``Prob(sigma u . v >= t)``.

Pearson and Spearman permute one variable against the other; since the
correlation denominator and the means are permutation invariant, the raw dot
product ``x . y`` orders permutations exactly as the correlation does.

Mann-Whitney uses ``v`` = midranks of the pooled sample and ``u`` = |X| zeros
followed by |Y| ones, so ``u . v`` is the rank sum of Y (one-sided: large
values in Y are evidence against H0).

Kruskal-Wallis needs one dot product per group. Each FFT batch draws one pair
of permutations and evaluates H at every shift from the k per-group shift
products. All tests here are one-sided ``>=`` tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import estimators as est
from .estimators import AccuracySpec, PValueEstimate
from .perm import RngStream, as_sample_vector, has_ties, midranks, tie_counts
from .sampler import circulant_dots, exact_dot

STATISTICS = ("pearson", "spearman", "mann_whitney", "kruskal_wallis")


class DegenerateInputError(ValueError):
    """The statistic is undefined for this input (e.g. a constant vector)."""


class TieWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TestReduction:
    u: np.ndarray
    v: np.ndarray
    t: float
    tie_flag: bool
    test_name: str

    __test__ = False  # not a pytest class

    @property
    def n(self) -> int:
        return self.u.size


def _check_not_constant(x, name):
    if np.ptp(x) == 0:
        raise DegenerateInputError(f"{name} is constant; correlation is undefined")


def _paired(x, y):
    x = as_sample_vector(x, "x")
    y = as_sample_vector(y, "y")
    if x.size != y.size:
        raise ValueError(f"x and y differ in length: {x.size} vs {y.size}")
    if x.size < 3:
        raise ValueError("correlation tests need at least 3 pairs")
    _check_not_constant(x, "x")
    _check_not_constant(y, "y")
    return x, y


def pearson_reduction(x, y) -> TestReduction:
    x, y = _paired(x, y)
    return TestReduction(x, y, exact_dot(x, y), False, "pearson")


def spearman_reduction(x, y) -> TestReduction:
    x, y = _paired(x, y)
    u, v = midranks(x), midranks(y)
    return TestReduction(u, v, exact_dot(u, v), has_ties(x) or has_ties(y), "spearman")


def _warn_ties(test):
    warnings.warn(
        f"{test}: ties present; the permutation p-value over midranks is not exact under ties",
        TieWarning,
        stacklevel=3,
    )


def mann_whitney_reduction(xs, ys) -> TestReduction:
    xs = np.asarray(xs, dtype=np.float64).ravel()
    ys = np.asarray(ys, dtype=np.float64).ravel()
    if xs.size == 0 or ys.size == 0:
        raise ValueError("both groups must be nonempty")
    pooled = as_sample_vector(np.concatenate([xs, ys]), "pooled sample")
    v = midranks(pooled)
    u = np.concatenate([np.zeros(xs.size), np.ones(ys.size)])
    tied = has_ties(pooled)
    if tied:
        _warn_ties("mann_whitney")
    return TestReduction(u, v, exact_dot(u, v), tied, "mann_whitney")


def reduction_pvalue(red: TestReduction, method: str, *, acc: AccuracySpec | None = None,
                     rng: RngStream | None = None, i_max: int = est.DEFAULT_I_MAX,
                     repeats: int | None = None, m: int | None = None,
                     threads=None) -> PValueEstimate:
    """Dispatch a reduced test to one of the estimators."""
    if method == "exact":
        return est.exact_pvalue(red.u, red.v, red.t)
    if method == "conservative":
        # the conservative estimator sets t = u . v itself
        return est.conservative_pvalue(red.u, red.v, i_max, rng, threads=threads)
    if method == "fft":
        if est.prefers_median(acc, red.n):
            return est.estimate_pvalue_median(red.u, red.v, red.t, acc, rng, threads=threads)
        return est.estimate_pvalue(red.u, red.v, red.t, acc, rng, threads=threads)
    if method == "fft-median":
        return est.estimate_pvalue_median(red.u, red.v, red.t, acc, rng, repeats, threads=threads)
    if method == "naive":
        if m is None:
            m = max(1, math.ceil(acc.C / (acc.delta * acc.epsilon**2)))
        return est.naive_mc_pvalue(red.u, red.v, red.t, m, rng, threads=threads)
    raise ValueError(f"unknown method {method!r}")


# Kruskal-Wallis ----------------------------------------------------------


@dataclass(frozen=True)
class GroupedSample:
    values: np.ndarray
    group_sizes: tuple[int, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        sizes = tuple(int(s) for s in self.group_sizes)
        if len(sizes) < 2:
            raise ValueError("need at least two groups")
        if min(sizes) < 1:
            raise ValueError("every group must be nonempty")
        if sum(sizes) != vals.size:
            raise ValueError(f"group sizes sum to {sum(sizes)}, but {vals.size} values given")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values contain non-finite entries")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "group_sizes", sizes)

    @classmethod
    def from_groups(cls, groups) -> "GroupedSample":
        groups = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
        return cls(np.concatenate(groups), tuple(g.size for g in groups))

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def k(self) -> int:
        return len(self.group_sizes)

    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.group_sizes)


def kw_tie_correction(values) -> float:
    N = np.asarray(values).size
    t = tie_counts(values).astype(np.float64)
    return 1.0 - float(np.sum(t**3 - t)) / (N**3 - N)


def h_statistic(values, labels) -> float:
    """Kruskal-Wallis H with the usual tie correction."""
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    N = values.size
    r = midranks(values)
    groups = np.unique(labels)
    q = sum(r[labels == g].sum() ** 2 / np.count_nonzero(labels == g) for g in groups)
    h = 12.0 / (N * (N + 1)) * q - 3.0 * (N + 1)
    c = kw_tie_correction(values)
    return h / c if c > 0 else math.nan


class _KWKernel:
    """H is increasing in ``sum_i s_i^2 / n_i`` (s_i = rank sum of group i).

    Midranks are half-integers, so ``2 s_i`` is an integer and
    ``key = sum_i (2 s_i)^2 * (L / n_i)`` with ``L = lcm(n_i)`` is an exact
    integer that orders shifts the same way H does.
    """

    GUARD_REL = 1e-9

    def __init__(self, g: GroupedSample):
        self.g = g
        self.N = g.N
        self.ranks = midranks(g.values)
        self.labels = g.labels()
        L = reduce(math.lcm, g.group_sizes)
        self.weights = [L // s for s in g.group_sizes]
        self.wvec = np.asarray(self.weights, dtype=np.float64)
        twice = [int(round(2 * self.ranks[self.labels == i].sum())) for i in range(g.k)]
        self.key_obs = self._key_int(twice)
        self.key_obs_f = float(self.key_obs)
        self.band = self.GUARD_REL * self.key_obs_f

    def _key_int(self, twice) -> int:
        return sum(int(s) ** 2 * w for s, w in zip(twice, self.weights))

    def _count_keys(self, twice: np.ndarray) -> tuple[int, int]:
        """``twice`` has shape (..., k) of integer-valued floats."""
        twice = twice.reshape(-1, self.g.k)
        key = (twice**2) @ self.wvec
        hits = key >= self.key_obs_f
        near = np.flatnonzero(np.abs(key - self.key_obs_f) <= self.band)
        for i in near.tolist():
            hits[i] = self._key_int(twice[i].astype(np.int64).tolist()) >= self.key_obs
        return hits, near.size

    def _rank_sums_twice(self, A, B) -> np.ndarray:
        # A: (b, n) permuted labels, B: (b, n) permuted ranks -> (b, n_shifts, k)
        onehot = (A[:, None, :] == np.arange(self.g.k)[None, :, None]).astype(np.float64)
        s = circulant_dots(onehot, B[:, None, :])
        twice = np.rint(2 * s)
        if np.max(np.abs(2 * s - twice), initial=0.0) > 0.25:
            raise FloatingPointError("rank sums lost half-integer precision")
        return np.moveaxis(twice, 1, 2)

    def shift_hits(self, gen, b: int) -> tuple[np.ndarray, int]:
        n = self.N
        ar = np.arange(n)
        A = np.empty((b, n))
        B = np.empty((b, n))
        rows = np.arange(b)[:, None]
        A[rows, gen.permuted(np.broadcast_to(ar, (b, n)), axis=1)] = self.labels
        B[rows, gen.permuted(np.broadcast_to(ar, (b, n)), axis=1)] = self.ranks
        hits, near = self._count_keys(self._rank_sums_twice(A, B))
        return hits.reshape(b, n), near

    def conjugate_hits(self, gen) -> tuple[np.ndarray, int]:
        perm = gen.permutation(self.N)
        A = np.empty((1, self.N))
        B = np.empty((1, self.N))
        A[0, perm] = self.labels
        B[0, perm] = self.ranks
        hits, near = self._count_keys(self._rank_sums_twice(A, B))
        return hits.reshape(1, self.N), near

    def perm_hits(self, perms) -> tuple[int, int]:
        # s_i(sigma) = sum_j R[sigma(j)] [label_j = i]
        onehot = (self.labels[:, None] == np.arange(self.g.k)[None, :]).astype(np.float64)
        twice = np.rint(2 * (self.ranks[perms] @ onehot))
        hits, near = self._count_keys(twice)
        return int(np.count_nonzero(hits)), near

    def chunk_rows(self) -> int:
        return max(1, est.CHUNK_ELEMENTS // (self.N * self.g.k))


def _kw_prepare(g: GroupedSample) -> _KWKernel:
    if g.N < 2:
        raise ValueError("need at least two observations")
    if np.ptp(g.values) == 0:
        warnings.warn("kruskal_wallis: all observations are equal; H is degenerate", TieWarning,
                      stacklevel=3)
    elif has_ties(g.values):
        _warn_ties("kruskal_wallis")
    return _KWKernel(g)


def _kw_batches(kern: _KWKernel, batches: int, rng: RngStream, threads):
    threads = threads or est.default_threads()

    def one(j, b):
        hits, near = kern.shift_hits(rng.derive(j).generator(), b)
        return np.count_nonzero(hits, axis=1), near

    parts = est._map_chunks(one, est._split(batches, min(batches, kern.chunk_rows())), threads)
    return np.concatenate([c for c, _ in parts]), sum(k for _, k in parts)


def _kw_result(kern, counts, near, method, rng, *, trials_per=None, extra=None):
    n = kern.N
    per = n if trials_per is None else trials_per
    hits = int(np.sum(counts))
    B = len(counts)
    means = np.asarray(counts) / per
    info = {"H_observed": h_statistic(kern.g.values, kern.labels), "k": kern.g.k}
    info.update(extra or {})
    return PValueEstimate(
        estimate=hits / (B * per),
        batches=B,
        n=n,
        seed=None if rng is None else rng.seed,
        empirical_batch_variance=float(np.var(means, ddof=1)) if B > 1 else 0.0,
        method=method,
        near_threshold_count=near,
        hits=hits,
        trials=B * per,
        extra=info,
    )


def kruskal_wallis_pvalue(g: GroupedSample, acc: AccuracySpec, rng: RngStream, *,
                          threads=None) -> PValueEstimate:
    """FFT-batch estimate of ``Prob(H(sigma) >= H_observed)``; k FFT passes per batch."""
    kern = _kw_prepare(g)
    B = acc.batches(g.N)
    counts, near = _kw_batches(kern, B, rng, threads)
    return _kw_result(kern, counts, near, "fft", rng)


def kruskal_wallis_median(g: GroupedSample, acc: AccuracySpec, rng: RngStream,
                          repeats: int | None = None, *, threads=None) -> PValueEstimate:
    if repeats is None:
        repeats = est.median_repeats(acc.delta)
    if repeats < 1 or repeats % 2 == 0:
        raise ValueError(f"repeats must be odd and positive, got {repeats}")
    inner = AccuracySpec(acc.epsilon, est.MEDIAN_DELTA, acc.C)
    runs = [kruskal_wallis_pvalue(g, inner, rng if j == 0 else rng.derive(j), threads=threads)
            for j in range(repeats)]
    ests = [r.estimate for r in runs]
    mid = runs[int(np.argsort(ests, kind="stable")[repeats // 2])]
    mid.method = "fft-median"
    mid.repeats = repeats
    mid.batches = sum(r.batches for r in runs)
    mid.extra["repeat_estimates"] = ests
    return mid


def kruskal_wallis_conservative(g: GroupedSample, i_max: int, rng: RngStream, *,
                                threads=None) -> PValueEstimate:
    """Same construction as :func:`estimators.conservative_pvalue`, statistic H."""
    kern = _kw_prepare(g)
    hits0, near = kern.conjugate_hits(rng.derive(0).generator())
    counts = [int(np.count_nonzero(hits0))]
    if i_max:
        rest, near_rest = _kw_batches(kern, i_max, rng.derive(1), threads)
        counts.extend(rest.tolist())
        near += near_rest
    return _kw_result(kern, counts, near, "conservative", rng, extra={"i_max": i_max})


def kruskal_wallis_naive(g: GroupedSample, m: int, rng: RngStream, *, threads=None) -> PValueEstimate:
    kern = _kw_prepare(g)
    N = g.N
    threads = threads or est.default_threads()
    ar = np.arange(N)

    def one(j, b):
        perms = rng.derive(j).generator().permuted(np.broadcast_to(ar, (b, N)), axis=1)
        return kern.perm_hits(perms)

    parts = est._map_chunks(one, est._split(m, max(1, min(m, kern.chunk_rows()))), threads)
    hits = sum(h for h, _ in parts)
    res = _kw_result(kern, [hits], sum(k for _, k in parts), "naive", rng, trials_per=m)
    res.batches = m
    p = hits / m
    res.empirical_batch_variance = p * (1 - p) * m / (m - 1) if m > 1 else 0.0
    return res


def kruskal_wallis_exact(g: GroupedSample, *, exact_limit: int = est.EXACT_LIMIT) -> PValueEstimate:
    kern = _kw_prepare(g)
    if g.N > exact_limit:
        raise ValueError(f"exact enumeration refused for N={g.N} > {exact_limit}")
    perms = est.all_permutations(g.N)
    step = kern.chunk_rows()
    hits = near = 0
    for s in range(0, perms.shape[0], step):
        h, k = kern.perm_hits(perms[s:s + step])
        hits += h
        near += k
    res = _kw_result(kern, [hits], near, "exact", None, trials_per=perms.shape[0])
    return res


def kruskal_wallis_dispatch(g: GroupedSample, method: str, *, acc=None, rng=None,
                            i_max: int = est.DEFAULT_I_MAX, repeats=None, m=None,
                            threads=None) -> PValueEstimate:
    if method == "exact":
        return kruskal_wallis_exact(g)
    if method == "fft":
        if est.prefers_median(acc, g.N):
            return kruskal_wallis_median(g, acc, rng, threads=threads)
        return kruskal_wallis_pvalue(g, acc, rng, threads=threads)
    if method == "fft-median":
        return kruskal_wallis_median(g, acc, rng, repeats, threads=threads)
    if method == "conservative":
        return kruskal_wallis_conservative(g, i_max, rng, threads=threads)
    if method == "naive":
        if m is None:
            m = max(1, math.ceil(acc.C / (acc.delta * acc.epsilon**2)))
        return kruskal_wallis_naive(g, m, rng, threads=threads)
    raise ValueError(f"unknown method {method!r}")
