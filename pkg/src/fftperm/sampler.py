"""FFT kernel: all n shifted dot products of two vectors in O(n log n).

``circulant_dots(u, v)[k] = sum_j u[j] * v[(j + k) % n]`` is a circular
cross-correlation, computed with an exact-length real FFT (every n, primes
included, without zero padding).

The batch loop runs on a per-thread :class:`_Workspace` of preallocated
buffers with FFTW plans, so a batch allocates nothing. Large temporaries
would otherwise be mapped and page-faulted afresh on each call, which costs
as much as the transforms themselves once n passes ~2^16. Without pyfftw the
same loop falls back to scipy's pocketfft. Hit counts do not depend on the
backend: FFT rounding (~1e-13 relative) is far inside the guard band.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
import scipy.fft

try:
    import pyfftw
except ImportError:  # pragma: no cover - exercised only without pyfftw
    pyfftw = None

from .perm import DimensionError, RngStream, as_rng

#: Relative width of the band around a threshold inside which FFT values are
#: recomputed exactly before comparing.
GUARD_REL = 1e-9


@dataclass(frozen=True)
class BatchResult:
    mean_indicator: float
    count: int
    n: int
    near_threshold_count: int
    stream: RngStream | None = None


def circulant_dots(u, v) -> np.ndarray:
    """Shifted dot products along the last axis; leading axes broadcast."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n = u.shape[-1]
    if v.shape[-1] != n:
        raise DimensionError(f"length mismatch: {n} vs {v.shape[-1]}")
    if n < 2:
        raise ValueError("vectors must have length >= 2")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite input")
    fu = scipy.fft.rfft(u, axis=-1)
    fv = scipy.fft.rfft(v, axis=-1)
    return scipy.fft.irfft(np.conj(fu) * fv, n, axis=-1)


def direct_dots(u, v) -> np.ndarray:
    """O(n^2) reference for :func:`circulant_dots`."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n = u.size
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return v[idx] @ u


def exact_dot(a, b) -> float:
    """Dot product with a correctly rounded (order independent) final sum."""
    return math.fsum(np.multiply(a, b).tolist())


def guard_band(u, v, t: float) -> float:
    return GUARD_REL * (float(np.linalg.norm(u)) * float(np.linalg.norm(v)) + abs(t))


def _exact_shift_dots(A, B, rows, shifts) -> np.ndarray:
    out = np.empty(rows.size)
    for m, (i, k) in enumerate(zip(rows.tolist(), shifts.tolist())):
        out[m] = exact_dot(A[i], np.roll(B[i], -k))
    return out


def shift_indicators(A, B, t: float, band: float) -> tuple[np.ndarray, int]:
    """Boolean matrix ``z[i, k] = A[i] . roll(B[i], -k) >= t`` (rows broadcast to 2-d).

    Values within ``band`` of ``t`` are recomputed with :func:`exact_dot`.
    Also returns the number of recomputed values.
    """
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    y = circulant_dots(A, B)
    hits = y >= t
    near = np.abs(y - t) <= band
    n_near = int(np.count_nonzero(near))
    if n_near:
        rows, shifts = np.nonzero(near)
        hits[rows, shifts] = _exact_shift_dots(A, B, rows, shifts) >= t
    return hits, n_near


def count_at_least(A, B, t: float, band: float) -> tuple[np.ndarray, int]:
    """Per-row number of shifts reaching ``t``; see :func:`shift_indicators`."""
    hits, n_near = shift_indicators(A, B, t, band)
    return np.count_nonzero(hits, axis=-1), n_near


def _draw_permutations(gen: np.random.Generator, out: np.ndarray) -> np.ndarray:
    """Fill the rows of ``out`` with iid uniform permutations of ``range(n)``."""
    out[...] = np.arange(out.shape[-1])
    return gen.permuted(out, axis=-1, out=out)


def permuted_copies(gen: np.random.Generator, v: np.ndarray, b: int) -> np.ndarray:
    """``b`` rows, row i being ``apply(sigma_i, v)`` for iid uniform ``sigma_i``.

    Rows are built by gathering, ``v[pi_i]``, which is ``apply(pi_i^-1, v)``;
    the inverse of a uniform permutation is uniform, so the law is the same
    and a gather is cheaper than a scatter.
    """
    perms = _draw_permutations(gen, np.empty((b, v.size), dtype=np.intp))
    return v[perms]


class _Workspace:
    """Preallocated buffers and FFTW plans for batches of shape ``(rows, n)``."""

    def __init__(self, n: int, rows: int):
        h = n // 2 + 1
        self.n = n
        self.perm = np.empty((rows, n), dtype=np.intp)
        self.A = pyfftw.empty_aligned((rows, n), dtype=np.float64)
        self.B = pyfftw.empty_aligned((rows, n), dtype=np.float64)
        self.FA = pyfftw.empty_aligned((rows, h), dtype=np.complex128)
        self.FB = pyfftw.empty_aligned((rows, h), dtype=np.complex128)
        self.Y = pyfftw.empty_aligned((rows, n), dtype=np.float64)
        self.hits = np.empty((rows, n), dtype=bool)
        self.near = np.empty((rows, n), dtype=bool)
        flags = ("FFTW_ESTIMATE",)
        self.fwd_a = pyfftw.FFTW(self.A, self.FA, axes=(-1,), flags=flags)
        self.fwd_b = pyfftw.FFTW(self.B, self.FB, axes=(-1,), flags=flags)
        self.inv = pyfftw.FFTW(self.FA, self.Y, axes=(-1,), direction="FFTW_BACKWARD",
                               flags=flags + ("FFTW_DESTROY_INPUT",))

    def counts(self, u, v, t: float, gen: np.random.Generator, band: float):
        np.take(u, _draw_permutations(gen, self.perm), out=self.A)
        np.take(v, _draw_permutations(gen, self.perm), out=self.B)
        self.fwd_a.execute()
        self.fwd_b.execute()
        np.conjugate(self.FA, out=self.FA)
        self.FA *= self.FB
        self.inv.execute()  # unnormalised: Y = n * dots
        Y = self.Y
        Y /= self.n
        np.greater_equal(Y, t, out=self.hits)
        Y -= t
        np.abs(Y, out=Y)
        np.less_equal(Y, band, out=self.near)
        n_near = int(np.count_nonzero(self.near))
        if n_near:
            rows, shifts = np.nonzero(self.near)
            self.hits[rows, shifts] = _exact_shift_dots(self.A, self.B, rows, shifts) >= t
        return np.count_nonzero(self.hits, axis=-1), n_near


_local = threading.local()
_WORKSPACE_CACHE = 4


def _workspace(n: int, rows: int) -> _Workspace:
    cache = getattr(_local, "cache", None)
    if cache is None:
        cache = _local.cache = {}
    ws = cache.pop((n, rows), None)
    if ws is None:
        ws = _Workspace(n, rows)
        while len(cache) >= _WORKSPACE_CACHE:
            cache.pop(next(iter(cache)))
    cache[(n, rows)] = ws  # most recently used last
    return ws


def batch_counts(u, v, t: float, gen: np.random.Generator, b: int, band: float | None = None):
    """Run ``b`` independent batches; return per-batch hit counts (out of n) and recompute total."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if band is None:
        band = guard_band(u, v, t)
    if pyfftw is not None:
        return _workspace(u.size, b).counts(u, v, t, gen, band)
    A = permuted_copies(gen, u, b)
    B = permuted_copies(gen, v, b)
    return count_at_least(A, B, t, band)


def batch_indicator_mean(u, v, t: float, rng) -> BatchResult:
    """One batch: draw sigma1, sigma2 and average ``1[y_k >= t]`` over all n shifts."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionError(f"length mismatch: {u.size} vs {v.size}")
    if not math.isfinite(t):
        raise ValueError("threshold must be finite")
    counts, near = batch_counts(u, v, t, as_rng(rng), 1)
    c = int(counts[0])
    return BatchResult(
        mean_indicator=c / u.size,
        count=c,
        n=u.size,
        near_threshold_count=near,
        stream=rng if isinstance(rng, RngStream) else None,
    )
