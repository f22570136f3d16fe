"""Lehmer codes, the factorial lattice, threshold sets and their discrepancy.

A permutation sigma is written as the word ``(a_1, ..., a_n)`` with
``sigma(a_i) = i``, i.e. ``a = sigma^-1``. Its code is
``l_i = #{j < i : a_j < a_i}``, so ``0 <= l_i <= i - 1`` (1-based i) and S_n is
identified with the product of chains ``I_1 x ... x I_n``. The identity has the
largest code ``(0, 1, ..., n-1)``.

With the package action convention, ``(sigma u) . v = sum_i u[a_i] v[i]``.

Sets of permutations are handled internally as boolean masks over
``all_permutations(n)`` (lexicographic order); the public functions accept
and return sets of :class:`~fftperm.perm.Permutation`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..estimators import all_permutations
from ..perm import Permutation
from ..sampler import exact_dot, guard_band

LATTICE_CAP = 8


def _check_n(n):
    if n > LATTICE_CAP:
        raise ValueError(f"enumeration of S_n capped at n={LATTICE_CAP}, got {n}")


def lehmer_code(sigma: Permutation) -> tuple[int, ...]:
    a = sigma.inverse().mapping
    return tuple(int(np.count_nonzero(a[:i] < a[i])) for i in range(a.size))


def from_lehmer_code(code) -> Permutation:
    """Inverse of :func:`lehmer_code`."""
    n = len(code)
    a = []
    for i, l in enumerate(code):
        if not 0 <= l <= i:
            raise ValueError(f"invalid code entry l[{i}] = {l}")
    # rebuild the word from the back: a_i is the (l_i)-th smallest of the letters
    # still unused among positions 1..i
    remaining = list(range(n))
    word = [0] * n
    for i in range(n - 1, -1, -1):
        word[i] = remaining.pop(code[i])
    a = np.asarray(word)
    inv = np.empty(n, dtype=np.intp)
    inv[a] = np.arange(n)  # sigma(a_i) = i
    return Permutation(inv)


@lru_cache(maxsize=None)
def _tables(n: int):
    """Codes, code ids and parities for all_permutations(n), plus id -> row lookup."""
    perms = np.asarray(all_permutations(n), dtype=np.intp)
    words = np.argsort(perms, axis=1)  # a = sigma^-1
    codes = np.zeros_like(words)
    for i in range(1, n):
        codes[:, i] = np.count_nonzero(words[:, :i] < words[:, i:i + 1], axis=1)
    # mixed radix id: coordinate i has radix i + 1
    radix_w = np.array([math.prod(range(i + 2, n + 1)) for i in range(n)], dtype=np.int64)
    ids = codes @ radix_w
    row_of = np.empty(math.factorial(n), dtype=np.intp)
    row_of[ids] = np.arange(ids.size)
    inversions = n * (n - 1) // 2 - codes.sum(axis=1)
    parity = np.where(inversions % 2, -1, 1)
    for arr in (perms, codes, ids, row_of, parity):
        arr.setflags(write=False)
    return perms, codes, ids, radix_w, row_of, parity


def _row_index(n: int):
    perms = _tables(n)[0]
    return {perms[i].tobytes(): i for i in range(perms.shape[0])}


def set_to_mask(S, n: int) -> np.ndarray:
    _check_n(n)
    index = _row_index(n)
    mask = np.zeros(math.factorial(n), dtype=bool)
    for s in S:
        if s.n != n:
            raise ValueError(f"permutation of size {s.n} in a set over S_{n}")
        mask[index[np.asarray(s.mapping, dtype=np.intp).tobytes()]] = True
    return mask


def mask_to_set(mask, n: int) -> frozenset:
    perms = _tables(n)[0]
    return frozenset(Permutation(perms[i], check=False) for i in np.flatnonzero(mask))


def _is_sorted(x):
    return bool(np.all(np.diff(x) >= 0))


def threshold_mask(u, v, t) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be 1-d of equal length")
    if not (_is_sorted(u) and _is_sorted(v)):
        raise ValueError("threshold sets require u and v sorted ascending")
    n = u.size
    _check_n(n)
    perms = _tables(n)[0]
    y = v[perms] @ u
    hits = y >= t
    band = guard_band(u, v, float(t))
    for i in np.flatnonzero(np.abs(y - t) <= band).tolist():
        hits[i] = exact_dot(u, v[perms[i]]) >= t
    return hits


def threshold_set(u, v, t) -> frozenset:
    """``{sigma : (sigma u) . v >= t}`` for ascending u, v."""
    mask = threshold_mask(u, v, t)
    return mask_to_set(mask, np.asarray(u).size)


def is_upper_mask(mask, n: int) -> bool:
    """Upward closure under the componentwise code order.

    In a product of chains it suffices to check the immediate successors
    (one coordinate raised by one).
    """
    _, codes, ids, radix_w, row_of, _ = _tables(n)
    mask = np.asarray(mask, dtype=bool)
    members = np.flatnonzero(mask)
    for i in range(1, n):
        can_raise = members[codes[members, i] < i]
        succ = row_of[ids[can_raise] + radix_w[i]]
        if not mask[succ].all():
            return False
    return True


def is_upper_set(S, n: int) -> bool:
    return is_upper_mask(set_to_mask(S, n), n)


def transposition_covers(sigma: Permutation) -> list[Permutation]:
    """Successors of sigma under the generating relation of the factorial lattice.

    For the word ``a``, swap positions ``i < j`` with ``a_i > a_j`` when every
    letter strictly between them exceeds ``a_i``.
    """
    a = sigma.inverse().mapping.tolist()
    n = len(a)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            if a[i] > a[j] and all(a[k] > a[i] for k in range(i + 1, j)):
                b = list(a)
                b[i], b[j] = b[j], b[i]
                out.append(Permutation(b).inverse())
    return out


def is_closed_under_covers(S) -> bool:
    S = set(S)
    return all(c in S for s in S for c in transposition_covers(s))


def discrepancy_mask(mask, n: int) -> int:
    codes = _tables(n)[1]
    signs = np.where(codes[np.asarray(mask, dtype=bool)].sum(axis=1) % 2, -1, 1)
    return int(signs.sum())


def discrepancy(S, n: int | None = None) -> int:
    """Even-code-sum count minus odd-code-sum count."""
    S = list(S)
    if not S:
        return 0
    n = S[0].n if n is None else n
    return discrepancy_mask(set_to_mask(S, n), n)


def alternating_sum_mask(mask, n: int) -> int:
    parity = _tables(n)[5]
    return int(parity[np.asarray(mask, dtype=bool)].sum())


def alternating_sum(S, n: int | None = None) -> int:
    """Sum of sign(sigma) over S: the alternating representation's Fourier coefficient."""
    return sum(s.parity() for s in S)


def discrepancy_sign(n: int) -> int:
    """``discrepancy(S) == discrepancy_sign(n) * alternating_sum(S)`` for every S."""
    # code sum = n(n-1)/2 - inversions
    return -1 if (n * (n - 1) // 2) % 2 else 1
