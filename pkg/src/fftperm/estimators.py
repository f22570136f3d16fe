"""P-value estimators for ``Prob(sigma u . v >= t)`` over uniform sigma in S_n.

``estimate_pvalue``
    correlated FFT batches, ``ceil(C / (delta n eps^2))`` of them.
``estimate_pvalue_median``
    median of several ``estimate_pvalue`` runs at failure probability 1/4.
``conservative_pvalue``
    valid (super-uniform) p-value built from one random conjugate of the long
    cycle plus ``i_max`` FFT batches.
``naive_mc_pvalue``
    one independent permutation per sample, direct dot products.
``exact_pvalue``
    enumeration of S_n, small n only.

Batches are processed in chunks whose size depends only on n, each chunk
drawing from its own derived stream, so results do not depend on the number
of worker threads.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .perm import DimensionError, RngStream, as_sample_vector
from .sampler import (
    batch_counts,
    circulant_dots,
    count_at_least,
    exact_dot,
    guard_band,
    permuted_copies,
)

METHODS = ("fft", "fft-median", "naive", "exact", "conservative")

EXACT_LIMIT = 10
DEFAULT_C = 2.0
DEFAULT_I_MAX = 99
MAX_BATCHES = 10**8
MEDIAN_DELTA = 0.25
# float64 entries per chunk matrix
CHUNK_ELEMENTS = 1 << 16
THREADS_ENV = "FFTPERM_THREADS"


class TooManyBatchesError(ValueError):
    pass


@dataclass
class PValueEstimate:
    estimate: float
    batches: int
    n: int
    seed: int | None
    empirical_batch_variance: float
    method: str
    near_threshold_count: int = 0
    repeats: int = 1
    # estimate == hits / trials exactly, where available
    hits: int | None = None
    trials: int | None = None
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AccuracySpec:
    epsilon: float
    delta: float
    C: float = DEFAULT_C

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")

    def batches(self, n: int) -> int:
        return max(1, math.ceil(self.C / (self.delta * n * self.epsilon**2)))


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def median_repeats(delta: float) -> int:
    """Odd repeat count giving failure <= delta when each run fails w.p. <= 1/4.

    Hoeffding: P(median fails) <= exp(-2 r (1/2 - 1/4)^2) = exp(-r/8).
    """
    r = max(1, math.ceil(8 * math.log(1 / delta)))
    return r if r % 2 else r + 1


def prefers_median(acc: AccuracySpec, n: int) -> bool:
    """Whether the median trick reaches failure probability ``acc.delta`` with fewer batches.

    Algorithm 1 alone needs batches linear in 1/delta, the median wrapper
    about ``8 ln(1/delta)`` runs at delta = 1/4. The wrapper wins only for
    small delta (roughly delta < 0.006 at C-dominated batch counts).
    """
    if acc.delta >= MEDIAN_DELTA:
        return False
    inner = AccuracySpec(acc.epsilon, MEDIAN_DELTA, acc.C)
    return median_repeats(acc.delta) * inner.batches(n) < acc.batches(n)


def _pair(u, v):
    u = as_sample_vector(u, "u")
    v = as_sample_vector(v, "v")
    if u.size != v.size:
        raise DimensionError(f"length mismatch: {u.size} vs {v.size}")
    return u, v


def _chunk_rows(n: int, total: int) -> int:
    return max(1, min(total, CHUNK_ELEMENTS // n))


def _map_chunks(fn, sizes, threads):
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


def _split(total: int, rows: int) -> list[int]:
    sizes = [rows] * (total // rows)
    if total % rows:
        sizes.append(total % rows)
    return sizes


def run_batches(u, v, t, batches, rng: RngStream, threads=None, band=None):
    """Per-batch hit counts (array of length ``batches``) and recompute count."""
    n = u.size
    if band is None:
        band = guard_band(u, v, t)
    threads = threads or default_threads()

    def one(j, b):
        return batch_counts(u, v, t, rng.derive(j).generator(), b, band)

    parts = _map_chunks(one, _split(batches, _chunk_rows(n, batches)), threads)
    counts = np.concatenate([c for c, _ in parts])
    return counts, sum(near for _, near in parts)


def _check_t(t):
    t = float(t)
    if math.isnan(t):
        raise ValueError("threshold is NaN")
    return t


def estimate_pvalue(u, v, t, acc: AccuracySpec, rng: RngStream, *, threads=None,
                    max_batches: int = MAX_BATCHES) -> PValueEstimate:
    """Average of ``ceil(C / (delta n eps^2))`` FFT batch means.

    With probability at least ``1 - delta`` the result is within
    ``eps * sqrt(p)`` of ``p``, given the per-batch variance bound ``C p / n``.
    """
    u, v = _pair(u, v)
    t = _check_t(t)
    n = u.size
    B = acc.batches(n)
    if B > max_batches:
        raise TooManyBatchesError(f"{B} batches requested, limit is {max_batches}")
    counts, near = run_batches(u, v, t, B, rng, threads)
    means = counts / n
    hits = int(counts.sum())
    return PValueEstimate(
        estimate=hits / (B * n),
        batches=B,
        n=n,
        seed=rng.seed,
        empirical_batch_variance=float(np.var(means, ddof=1)) if B > 1 else 0.0,
        method="fft",
        near_threshold_count=near,
        hits=hits,
        trials=B * n,
    )


def estimate_pvalue_median(u, v, t, acc: AccuracySpec, rng: RngStream, repeats: int | None = None,
                           *, threads=None, max_batches: int = MAX_BATCHES) -> PValueEstimate:
    """Median of ``repeats`` runs of :func:`estimate_pvalue` at failure probability 1/4.

    ``repeats`` defaults to the odd count that brings the overall failure
    probability below ``acc.delta``. Run 0 uses ``rng`` itself, run j > 0 uses
    ``rng.derive(j)``.
    """
    if repeats is None:
        repeats = median_repeats(acc.delta)
    if repeats < 1 or repeats % 2 == 0:
        raise ValueError(f"repeats must be odd and positive, got {repeats}")
    inner = AccuracySpec(acc.epsilon, MEDIAN_DELTA, acc.C)
    runs = [
        estimate_pvalue(u, v, t, inner, rng if j == 0 else rng.derive(j),
                        threads=threads, max_batches=max_batches)
        for j in range(repeats)
    ]
    ests = [r.estimate for r in runs]
    mid = runs[int(np.argsort(ests, kind="stable")[repeats // 2])]
    return PValueEstimate(
        estimate=mid.estimate,
        batches=sum(r.batches for r in runs),
        n=mid.n,
        seed=rng.seed,
        empirical_batch_variance=mid.empirical_batch_variance,
        method="fft-median",
        near_threshold_count=sum(r.near_threshold_count for r in runs),
        repeats=repeats,
        hits=mid.hits,
        trials=mid.trials,
        extra={"repeat_estimates": ests},
    )


def conservative_pvalue(u, v, i_max: int = DEFAULT_I_MAX, rng: RngStream | None = None, *,
                        threads=None) -> PValueEstimate:
    """Super-uniform p-value for the observed pairing, ``t = u . v``.

    ``x_0`` counts shifts of a uniformly random conjugate ``alpha`` of the long
    cycle with ``u . alpha^k v >= t``; writing ``alpha = tau lambda tau^-1``
    those products are the circulant dots of ``tau^-1 u`` and ``tau^-1 v``.
    ``x_1 .. x_imax`` are ordinary FFT batches. Under exchangeability the
    result is uniform on ``{1, ..., n (i_max + 1)} / (n (i_max + 1))``.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    if i_max < 0:
        raise ValueError(f"i_max must be nonnegative, got {i_max}")
    u, v = _pair(u, v)
    n = u.size
    t = exact_dot(u, v)
    band = guard_band(u, v, t)

    gen0 = rng.derive(0).generator()
    perm = gen0.permutation(n)
    a = np.empty(n)
    b = np.empty(n)
    a[perm] = u
    b[perm] = v
    c0, near = count_at_least(a, b, t, band)
    counts = [int(c0[0])]
    if i_max:
        rest, near_rest = run_batches(u, v, t, i_max, rng.derive(1), threads, band)
        counts.extend(rest.tolist())
        near += near_rest
    counts = np.asarray(counts)
    hits = int(counts.sum())
    trials = n * (i_max + 1)
    return PValueEstimate(
        estimate=hits / trials,
        batches=i_max + 1,
        n=n,
        seed=rng.seed,
        empirical_batch_variance=float(np.var(counts / n, ddof=1)) if i_max else 0.0,
        method="conservative",
        near_threshold_count=near,
        hits=hits,
        trials=trials,
        extra={"t": t, "i_max": i_max},
    )


def _count_products_at_least(u, v, perms, t, band):
    """Number of rows sigma of ``perms`` with ``sum_j u[j] v[sigma(j)] >= t``."""
    y = v[perms] @ u
    hits = y >= t
    near = np.flatnonzero(np.abs(y - t) <= band)
    for i in near.tolist():
        hits[i] = exact_dot(u, v[perms[i]]) >= t
    return int(np.count_nonzero(hits)), near.size


def naive_mc_pvalue(u, v, t, m: int, rng: RngStream, *, threads=None) -> PValueEstimate:
    """Fraction of ``m`` iid uniform permutations with ``(sigma u) . v >= t``."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    u, v = _pair(u, v)
    t = _check_t(t)
    n = u.size
    band = guard_band(u, v, t)
    threads = threads or default_threads()
    ar = np.arange(n)

    def one(j, b):
        gen = rng.derive(j).generator()
        perms = gen.permuted(np.broadcast_to(ar, (b, n)), axis=1)
        return _count_products_at_least(u, v, perms, t, band)

    parts = _map_chunks(one, _split(m, _chunk_rows(n, m)), threads)
    hits = sum(h for h, _ in parts)
    p = hits / m
    return PValueEstimate(
        estimate=p,
        batches=m,
        n=n,
        seed=rng.seed,
        empirical_batch_variance=p * (1 - p) * m / (m - 1) if m > 1 else 0.0,
        method="naive",
        near_threshold_count=sum(k for _, k in parts),
        hits=hits,
        trials=m,
    )


@lru_cache(maxsize=4)
def all_permutations(n: int) -> np.ndarray:
    """Every permutation of ``range(n)`` in lexicographic order, shape ``(n!, n)``."""
    arr = np.fromiter(itertools.permutations(range(n)), dtype=np.dtype((np.int8, n)),
                      count=math.factorial(n))
    arr.setflags(write=False)
    return arr


def exact_pvalue(u, v, t, *, exact_limit: int = EXACT_LIMIT) -> PValueEstimate:
    """``#{sigma : (sigma u) . v >= t} / n!`` by enumeration."""
    u, v = _pair(u, v)
    t = _check_t(t)
    n = u.size
    if n > exact_limit:
        raise ValueError(f"exact enumeration refused for n={n} > {exact_limit}")
    perms = all_permutations(n)
    band = guard_band(u, v, t)
    step = max(1, CHUNK_ELEMENTS // n)
    hits = near = 0
    for s in range(0, perms.shape[0], step):
        h, k = _count_products_at_least(u, v, perms[s:s + step], t, band)
        hits += h
        near += k
    total = perms.shape[0]
    return PValueEstimate(
        estimate=hits / total,
        batches=1,
        n=n,
        seed=None,
        empirical_batch_variance=0.0,
        method="exact",
        near_threshold_count=near,
        hits=hits,
        trials=total,
    )


def exact_null_products(u, v) -> np.ndarray:
    """All n! values of ``(sigma u) . v``, in the order of :func:`all_permutations`."""
    u, v = _pair(u, v)
    if u.size > EXACT_LIMIT:
        raise ValueError(f"exact enumeration refused for n={u.size}")
    return v[all_permutations(u.size)] @ u


def shift_products_sample(u, v, rng: RngStream, batches: int = 64) -> np.ndarray:
    """Pooled shift products ``y_{i,k}`` from a few batches (used to place thresholds)."""
    u, v = _pair(u, v)
    gen = rng.generator()
    return circulant_dots(permuted_copies(gen, u, batches), permuted_copies(gen, v, batches)).ravel()
