import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fftperm.perm import Permutation, apply
from fftperm.rep.lattice import (
    alternating_sum,
    discrepancy,
    discrepancy_sign,
    from_lehmer_code,
    is_closed_under_covers,
    is_upper_set,
    lehmer_code,
    transposition_covers,
    threshold_set,
)


def all_perms(n):
    return [Permutation(p) for p in itertools.permutations(range(n))]


def word_to_perm(word):
    """The permutation with sigma(word[i]) = i."""
    return Permutation(word).inverse()


def codes_leq(a, b):
    return all(x <= y for x, y in zip(a, b))


def brute_upper(S, n):
    S = set(S)
    codes = {p: lehmer_code(p) for p in all_perms(n)}
    return all(q in S for p in S for q, cq in codes.items() if codes_leq(codes[p], cq))


def test_code_examples():
    for n in range(1, 8):
        assert lehmer_code(Permutation.identity(n)) == tuple(range(n))
        assert lehmer_code(word_to_perm(list(range(n - 1, -1, -1)))) == (0,) * n


def test_code_definition_on_words():
    word = [2, 0, 3, 1]
    sigma = word_to_perm(word)
    want = tuple(sum(word[j] < word[i] for j in range(i)) for i in range(4))
    assert lehmer_code(sigma) == want


def test_code_is_bijection():
    for n in range(1, 7):
        codes = {lehmer_code(p) for p in all_perms(n)}
        assert len(codes) == math.factorial(n)
        assert all(0 <= c[i] <= i for c in codes for i in range(n))
        for p in all_perms(n):
            assert from_lehmer_code(lehmer_code(p)) == p


def test_bad_code_rejected():
    with pytest.raises(ValueError):
        from_lehmer_code((0, 2, 0))


def test_parity_from_code_exhaustive():
    for n in range(1, 7):
        for p in all_perms(n):
            assert p.parity() == (-1) ** sum(i - l for i, l in enumerate(lehmer_code(p)))


def test_threshold_set_examples():
    u = v = np.array([1.0, 2.0, 3.0])
    S = threshold_set(u, v, 14)
    assert S == {Permutation.identity(3)}
    assert len(threshold_set(u, v, 9)) == 6
    assert threshold_set(u, v, 15) == frozenset()
    with pytest.raises(ValueError):
        threshold_set([3.0, 1.0, 2.0], v, 10)


def test_threshold_set_matches_definition():
    gen = np.random.default_rng(0)
    for n in range(2, 6):
        u = np.sort(gen.standard_normal(n))
        v = np.sort(gen.standard_normal(n))
        t = float(np.median([apply(p, u) @ v for p in all_perms(n)]))
        want = {p for p in all_perms(n) if apply(p, u) @ v >= t}
        assert threshold_set(u, v, t) == want


def test_upper_set_trivial_cases():
    for n in range(1, 6):
        assert is_upper_set(set(), n)
        assert is_upper_set(set(all_perms(n)), n)
        assert is_upper_set({Permutation.identity(n)}, n)
    assert not is_upper_set({word_to_perm([2, 1, 0])}, 3)


def test_upper_set_matches_brute_force():
    gen = np.random.default_rng(1)
    perms = all_perms(4)
    for _ in range(60):
        S = {p for p in perms if gen.random() < 0.3}
        assert is_upper_set(S, 4) == brute_upper(S, 4)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31), st.floats(0, 1))
def test_threshold_sets_are_upper_sets(n, seed, q):
    gen = np.random.default_rng(seed)
    u = np.sort(gen.integers(0, 4, n).astype(float))
    v = np.sort(gen.standard_normal(n))
    ys = sorted(apply(p, u) @ v for p in all_perms(n))
    t = ys[int(q * (len(ys) - 1))]
    S = threshold_set(u, v, t)
    assert is_upper_set(S, n)
    assert abs(discrepancy(S, n)) <= math.factorial(n) // n


def test_covers_raise_sorted_products():
    # a cover moves a smaller letter forward, which cannot lower (sigma u) . v
    # when u and v are both ascending
    gen = np.random.default_rng(2)
    for n in range(2, 6):
        u = np.sort(gen.standard_normal(n))
        v = np.sort(gen.standard_normal(n))
        for p in all_perms(n):
            for q in transposition_covers(p):
                assert apply(q, u) @ v >= apply(p, u) @ v - 1e-12


def test_threshold_sets_closed_under_covers():
    gen = np.random.default_rng(3)
    for n in (3, 4, 5):
        u = np.sort(gen.standard_normal(n))
        v = np.sort(gen.standard_normal(n))
        for t in np.quantile([apply(p, u) @ v for p in all_perms(n)], [0.2, 0.5, 0.9]):
            S = threshold_set(u, v, t)
            assert is_closed_under_covers(S) and is_upper_set(S, n)


def test_cover_order_differs_from_code_order():
    p = word_to_perm([1, 2, 0])
    q = word_to_perm([1, 0, 2])
    assert q in transposition_covers(p)
    assert lehmer_code(p) == (0, 1, 0) and lehmer_code(q) == (0, 0, 2)


def test_discrepancy_examples():
    assert discrepancy(set(all_perms(3)), 3) == 0
    top = {Permutation.identity(3)}
    assert abs(discrepancy(top, 3)) == 1
    u = v = np.array([1.0, 2.0, 3.0])
    S = threshold_set(u, v, 13)
    assert len(S) == 3
    assert abs(discrepancy(S, 3)) == 1 <= math.factorial(3) // 3


def test_discrepancy_equals_signed_alternating_sum():
    gen = np.random.default_rng(3)
    for n in range(2, 7):
        perms = all_perms(n)
        for _ in range(10):
            S = {p for p in perms if gen.random() < 0.4}
            assert discrepancy(S, n) == discrepancy_sign(n) * alternating_sum(S)
    assert [discrepancy_sign(n) for n in range(1, 7)] == [1, -1, -1, 1, 1, -1]
