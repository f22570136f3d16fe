"""Permutation and vector primitives.

Action convention used throughout the package: applying ``sigma`` to a vector
``v`` moves entry ``j`` to position ``sigma(j)``, i.e. ``result[sigma[j]] = v[j]``.
With this convention ``apply(s, apply(t, v)) == apply(s @ t, v)`` where
``(s @ t)(j) = s(t(j))``.

The long cycle used by the samplers is the rotation
``cyclic_shift_pow(v, 1)[j] = v[(j + 1) % n]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy.stats import rankdata


class DimensionError(ValueError):
    """Vectors or permutations of incompatible length."""


class InvalidSizeError(ValueError):
    pass


@dataclass(frozen=True)
class RngStream:
    """Seeded, splittable source of randomness.

    A stream is identified by ``(seed, stream_id)`` plus an optional derivation
    path. Identical identifiers give identical draws on every platform, since
    the generator is PCG64 seeded through ``numpy.random.SeedSequence``.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        for x in (self.seed, self.stream_id, *self.path):
            if not 0 <= int(x) < 2**64:
                raise ValueError(f"stream identifiers must fit in 64 bits, got {x}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def derive(self, *keys: int) -> "RngStream":
        """Child stream; statistically independent of the parent and of siblings."""
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


class Permutation:
    """A bijection of ``{0, ..., n-1}`` stored as ``mapping[j] = sigma(j)``."""

    __slots__ = ("mapping",)

    def __init__(self, mapping, *, check: bool = True):
        m = np.asarray(mapping, dtype=np.intp)
        if m.ndim != 1:
            raise ValueError("permutation mapping must be one-dimensional")
        if check:
            n = m.size
            seen = np.zeros(n, dtype=bool)
            if n and (m.min() < 0 or m.max() >= n):
                raise ValueError("permutation entries out of range")
            seen[m] = True
            if not seen.all():
                raise ValueError("permutation mapping is not a bijection")
        m.setflags(write=False)
        self.mapping = m

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n), check=False)

    @classmethod
    def long_cycle_power(cls, n: int, k: int = 1) -> "Permutation":
        """The permutation acting on vectors as ``cyclic_shift_pow(., k)``."""
        return cls((np.arange(n) - k) % n, check=False)

    @property
    def n(self) -> int:
        return self.mapping.size

    def __len__(self):
        return self.mapping.size

    def __call__(self, j: int) -> int:
        return int(self.mapping[j])

    def __matmul__(self, other: "Permutation") -> "Permutation":
        if self.n != other.n:
            raise DimensionError(f"cannot compose permutations of size {self.n} and {other.n}")
        return Permutation(self.mapping[other.mapping], check=False)

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.n)
        return Permutation(inv, check=False)

    def cycle_type(self) -> tuple[int, ...]:
        """Cycle lengths in weakly decreasing order."""
        seen = np.zeros(self.n, dtype=bool)
        lengths = []
        m = self.mapping
        for start in range(self.n):
            if seen[start]:
                continue
            length = 0
            j = start
            while not seen[j]:
                seen[j] = True
                j = m[j]
                length += 1
            lengths.append(length)
        return tuple(sorted(lengths, reverse=True))

    def parity(self) -> int:
        """+1 for even permutations, -1 for odd ones."""
        return -1 if (self.n - len(self.cycle_type())) % 2 else 1

    def inversions(self) -> int:
        m = self.mapping
        return int(sum(np.count_nonzero(m[:i] > m[i]) for i in range(1, self.n)))

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    def __hash__(self):
        return hash(self.mapping.tobytes())

    def __repr__(self):
        return f"Permutation({self.mapping.tolist()})"


def as_sample_vector(v, name: str = "v") -> np.ndarray:
    """Validate and convert to a 1-d float64 array of finite entries, length >= 2."""
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if a.size < 2:
        raise InvalidSizeError(f"{name} must have length >= 2, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def uniform_permutation(rng, n: int) -> Permutation:
    """Uniform random element of S_n (Fisher-Yates via ``Generator.permutation``)."""
    if n < 1:
        raise InvalidSizeError(f"n must be positive, got {n}")
    return Permutation(as_rng(rng).permutation(n), check=False)


def apply(sigma: Permutation, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != sigma.n:
        raise DimensionError(f"permutation of size {sigma.n} applied to vector of length {v.shape[-1]}")
    out = np.empty_like(v)
    out[..., sigma.mapping] = v
    return out


def cyclic_shift_pow(v, k: int) -> np.ndarray:
    """``result[j] = v[(j + k) % n]`` for ``0 <= k < n``."""
    v = np.asarray(v)
    n = v.shape[-1]
    if not 0 <= k < n:
        raise ValueError(f"shift must satisfy 0 <= k < {n}, got {k}")
    return np.roll(v, -k, axis=-1)


def conjugate(sigma: Permutation, tau: Permutation) -> Permutation:
    """``tau^-1 o sigma o tau``."""
    if sigma.n != tau.n:
        raise DimensionError(f"sizes differ: {sigma.n} vs {tau.n}")
    return tau.inverse() @ sigma @ tau


def shift_cycle_type(n: int, k: int) -> tuple[int, ...]:
    """Cycle type of the k-th power of the long cycle: ``[a^(n/a)]``, ``a = n/gcd(n, k)``."""
    a = n // gcd(n, k)
    return (a,) * (n // a)


def midranks(v) -> np.ndarray:
    """1-based ranks with ties replaced by the mean of the ranks they span."""
    return rankdata(np.asarray(v, dtype=np.float64), method="average")


def has_ties(v) -> bool:
    v = np.asarray(v)
    return np.unique(v).size < v.size


def tie_counts(v) -> np.ndarray:
    """Sizes of the groups of equal values."""
    _, counts = np.unique(np.asarray(v), return_counts=True)
    return counts
