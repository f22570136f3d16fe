from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fftperm import sampler
from fftperm.perm import DimensionError, RngStream
from fftperm.sampler import (
    batch_counts,
    batch_indicator_mean,
    circulant_dots,
    direct_dots,
    exact_dot,
    guard_band,
    permuted_copies,
)


def test_fft_matches_direct_for_all_lengths():
    gen = np.random.default_rng(0)
    for i in range(200):
        n = 2 + i % 63  # 2..64, primes included
        u = gen.standard_normal(n) * gen.uniform(0.1, 100)
        v = gen.standard_normal(n)
        scale = np.linalg.norm(u) * np.linalg.norm(v)
        err = np.abs(circulant_dots(u, v) - direct_dots(u, v)).max()
        assert err <= 1e-9 * scale, (n, err)


def test_direct_dots_definition():
    u = np.array([1.0, -2.0, 0.5, 3.0])
    v = np.array([2.0, 1.0, -1.0, 4.0])
    want = [sum(u[j] * v[(j + k) % 4] for j in range(4)) for k in range(4)]
    np.testing.assert_allclose(direct_dots(u, v), want)


@pytest.mark.parametrize(
    "u, v, want",
    [
        ([1, 0, 0], [5, 7, 9], [5, 7, 9]),
        ([1, 1, 1], [5, 7, 9], [21, 21, 21]),
        ([1, 2], [3, 4], [11, 10]),
    ],
)
def test_circulant_examples(u, v, want):
    np.testing.assert_allclose(circulant_dots(u, v), want, atol=1e-12)


def test_circulant_broadcasts_rows():
    gen = np.random.default_rng(1)
    A = gen.standard_normal((5, 11))
    B = gen.standard_normal((5, 11))
    got = circulant_dots(A, B)
    for i in range(5):
        np.testing.assert_allclose(got[i], direct_dots(A[i], B[i]), atol=1e-12)


def test_circulant_errors():
    with pytest.raises(DimensionError):
        circulant_dots([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        circulant_dots([1, np.nan], [1, 2])
    with pytest.raises(ValueError):
        circulant_dots([1.0], [2.0])


def test_exact_dot_is_correctly_rounded():
    a = [1e16, 1.0, -1e16]
    assert exact_dot(a, [1, 1, 1]) == 1.0


def test_batch_on_zero_vectors():
    z = np.zeros(4)
    assert batch_indicator_mean(z, z, 0.0, RngStream(1)).mean_indicator == 1.0
    assert batch_indicator_mean(z, z, 1.0, RngStream(1)).mean_indicator == 0.0


def test_batch_result_fields():
    res = batch_indicator_mean([1, 2, 3, 4, 5], [2, 1, 0, 3, 3], 20.0, RngStream(5, 2))
    assert res.n == 5
    assert res.count == round(res.mean_indicator * 5)
    assert 0 <= res.count <= 5
    assert res.stream == RngStream(5, 2)


def test_batch_rejects_bad_input():
    with pytest.raises(DimensionError):
        batch_indicator_mean([1, 2, 3], [1, 2], 0.0, RngStream(0))
    with pytest.raises(ValueError):
        batch_indicator_mean([1, 2], [1, 2], float("inf"), RngStream(0))


def test_batch_mean_expectation_small_example():
    # only the identity pairing of (1,2,3) with itself reaches 14, so p = 1/6
    u = v = np.array([1.0, 2.0, 3.0])
    counts, near = batch_counts(u, v, 14.0, RngStream(2).generator(), 20000)
    assert abs(counts.mean() / 3 - 1 / 6) <= 0.01
    assert near > 0  # 14 is hit exactly, so the guard band must fire


def test_batch_counts_match_direct_computation():
    gen = np.random.default_rng(4)
    for n in (2, 3, 5, 8, 13, 31):
        u = gen.integers(-3, 4, n).astype(float)
        v = gen.integers(-3, 4, n).astype(float)
        t = float(gen.integers(-5, 6))
        counts, _ = batch_counts(u, v, t, np.random.default_rng(n), 40)
        replay = np.random.default_rng(n)
        A = permuted_copies(replay, u, 40)
        B = permuted_copies(replay, v, 40)
        want = [sum(exact_dot(A[i], np.roll(B[i], -k)) >= t for k in range(n)) for i in range(40)]
        np.testing.assert_array_equal(counts, want)


def test_backends_agree(monkeypatch):
    gen = np.random.default_rng(8)
    cases = []
    for n in (2, 3, 7, 64, 97, 1000):
        u = np.round(gen.standard_normal(n), 1)
        v = np.round(gen.standard_normal(n), 1)
        cases.append((u, v, 0.2 * exact_dot(u, v)))
    fast = [batch_counts(u, v, t, np.random.default_rng(1), 6) for u, v, t in cases]
    monkeypatch.setattr(sampler, "pyfftw", None)
    plain = [batch_counts(u, v, t, np.random.default_rng(1), 6) for u, v, t in cases]
    for (c1, n1), (c2, n2) in zip(fast, plain):
        np.testing.assert_array_equal(c1, c2)
        assert n1 == n2


def test_concurrent_batches_match_serial():
    gen = np.random.default_rng(3)
    u, v = gen.standard_normal(257), gen.standard_normal(257)

    def job(j):
        return batch_counts(u, v, 1.0, RngStream(0).derive(j).generator(), 8)[0]

    serial = [job(j) for j in range(16)]
    with ThreadPoolExecutor(4) as pool:
        threaded = list(pool.map(job, range(16)))
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a, b)


def test_swap_roles_same_distribution():
    gen = np.random.default_rng(6)
    u, v = gen.standard_normal(9), gen.standard_normal(9)
    t = 0.5
    a, _ = batch_counts(u, v, t, np.random.default_rng(1), 20000)
    b, _ = batch_counts(v, u, t, np.random.default_rng(2), 20000)
    se = np.sqrt(a.var() / a.size + b.var() / b.size)
    assert abs(a.mean() - b.mean()) <= 4 * se


def test_guard_band_scale():
    assert guard_band([3, 4], [0, 1], 2.0) == pytest.approx(1e-9 * (5 + 2))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32))
def test_hit_counts_bounded(n, seed):
    gen = np.random.default_rng(seed)
    u, v = gen.standard_normal(n), gen.standard_normal(n)
    counts, near = batch_counts(u, v, 0.0, gen, 3)
    assert counts.shape == (3,)
    assert np.all((0 <= counts) & (counts <= n))
    assert near >= 0
