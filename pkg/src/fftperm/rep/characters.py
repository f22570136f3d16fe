"""Partitions, hook-length dimensions and Murnaghan-Nakayama characters of S_n.

Everything is exact: Python integers and ``fractions.Fraction``.
Partitions are tuples of weakly decreasing positive integers; cycle types use
the same representation (the multiset of cycle lengths, sorted decreasingly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

PARTITION_CAP = 40
CHARACTER_CAP = 14


class CapExceededError(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    pass


def _check_cap(n, cap, what):
    if n > cap:
        raise CapExceededError(f"{what} capped at n={cap}, got n={n}")


def partitions(n: int, cap: int = PARTITION_CAP) -> list[tuple[int, ...]]:
    """All partitions of n in reverse lexicographic order: (n), (n-1, 1), ..., (1^n)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    _check_cap(n, cap, "partition enumeration")
    return list(_partitions(n, n))


@lru_cache(maxsize=None)
def _partitions(n: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, largest), 0, -1):
        out.extend((first,) + rest for rest in _partitions(n - first, first))
    return tuple(out)


def partition_count(n: int) -> int:
    return len(_partitions(n, n))


def conjugate_partition(p) -> tuple[int, ...]:
    p = tuple(p)
    if not p:
        return ()
    return tuple(sum(1 for part in p if part > i) for i in range(p[0]))


def validate_partition(p) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if not p or any(x <= 0 for x in p) or any(a < b for a, b in zip(p, p[1:])):
        raise ValueError(f"not a partition: {p}")
    return p


def hook_lengths(p) -> list[list[int]]:
    p = validate_partition(p)
    conj = conjugate_partition(p)
    return [[(row - j - 1) + (conj[j] - i - 1) + 1 for j in range(row)] for i, row in enumerate(p)]


def hook_dimension(p) -> int:
    """Dimension of the irreducible representation: n! / product of hook lengths."""
    hooks = hook_lengths(p)
    n = sum(len(row) for row in hooks)
    prod = math.prod(h for row in hooks for h in row)
    d, rem = divmod(math.factorial(n), prod)
    if rem:
        raise InternalConsistencyError(f"hook product of {p} does not divide {n}!")
    return d


def class_size(cycle_type) -> int:
    """Number of permutations with the given cycle type."""
    ct = validate_partition(cycle_type)
    n = sum(ct)
    denom = 1
    for a in set(ct):
        b = ct.count(a)
        denom *= a**b * math.factorial(b)
    return math.factorial(n) // denom


def rectangular_class(n: int, r: int) -> tuple[int, ...]:
    """Cycle type [r^(n/r)]."""
    if r < 1 or n % r:
        raise ValueError(f"r={r} does not divide n={n}")
    return (r,) * (n // r)


@lru_cache(maxsize=None)
def _mn(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    if not mu:
        return 1 if not lam else 0
    r, rest = mu[0], mu[1:]
    L = len(lam)
    # beta-set: removing an r-border strip moves one bead from b to b - r
    beta = [lam[i] + (L - 1 - i) for i in range(L)]
    occupied = set(beta)
    total = 0
    for b in beta:
        c = b - r
        if c < 0 or c in occupied:
            continue
        height = sum(1 for x in beta if c < x < b)
        new_beta = sorted((c if x == b else x for x in beta), reverse=True)
        new_lam = tuple(x for x in (new_beta[i] - (L - 1 - i) for i in range(L)) if x > 0)
        term = _mn(new_lam, rest)
        total += -term if height % 2 else term
    return total


def mn_character(p, c, cap: int = CHARACTER_CAP) -> int:
    """Character value chi_p(c) by the Murnaghan-Nakayama rule (memoized)."""
    p = validate_partition(p)
    c = validate_partition(sorted(c, reverse=True))
    n = sum(p)
    if sum(c) != n:
        raise ValueError(f"partition of {n} and cycle type of {sum(c)} differ in size")
    _check_cap(n, cap, "character evaluation")
    return _mn(p, c)


def character_table(n: int, cap: int = CHARACTER_CAP):
    """Rows indexed by partitions (irreps), columns by cycle types, both canonical order."""
    _check_cap(n, cap, "character table")
    parts = partitions(n)
    return parts, [[_mn(p, c) for c in parts] for p in parts]


def _excluded(n: int) -> set[tuple[int, ...]]:
    return {(n,), (1,) * n}


def exceptional_partitions(n: int) -> set[tuple[int, ...]]:
    """Trivial, alternating, (n-1, 1) and its conjugate."""
    ex = _excluded(n)
    if n >= 2:
        ex |= {(n - 1, 1), conjugate_partition((n - 1, 1))}
    return ex


def character_ratio_max(n: int, r: int, cap: int = CHARACTER_CAP) -> tuple[Fraction, tuple[int, ...]]:
    """Max over non-trivial, non-alternating p of |chi_p([r^(n/r)])| / d_p."""
    if r <= 1:
        raise ValueError(f"r must exceed 1, got {r}")
    cls = rectangular_class(n, r)
    _check_cap(n, cap, "character ratio")
    best, arg = None, None
    for p in partitions(n):
        if p in _excluded(n):
            continue
        ratio = Fraction(abs(_mn(p, cls)), hook_dimension(p))
        if best is None or ratio > best:
            best, arg = ratio, p
    if best is None:
        raise ValueError(f"S_{n} has no representation outside the trivial and alternating ones")
    return best, arg


@dataclass
class FominLulovRow:
    partition: tuple[int, ...]
    character: int
    dimension: int
    holds: bool
    # |chi| / bound, as a float; <= 1 when the inequality holds
    ratio: float


@dataclass
class FominLulovReport:
    n: int
    r: int
    rows: list[FominLulovRow] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(row.holds for row in self.rows)

    @property
    def tightest(self) -> FominLulovRow:
        return max(self.rows, key=lambda row: row.ratio)

    def to_dict(self) -> dict:
        t = self.tightest
        return {
            "n": self.n,
            "r": self.r,
            "partitions": len(self.rows),
            "all_hold": self.all_hold,
            "tightest_partition": list(t.partition),
            "tightest_ratio": t.ratio,
        }


def fomin_lulov_check(n: int, r: int, cap: int = CHARACTER_CAP) -> FominLulovReport:
    """Check |chi_p([r^m])| <= m! r^m / (mr)!^(1/r) * d_p^(1/r) for every partition p of n.

    Compared exactly after raising both sides to the r-th power:
    |chi|^r (mr)! <= (m! r^m)^r d.
    """
    cls = rectangular_class(n, r)
    _check_cap(n, cap, "Fomin-Lulov check")
    m = n // r
    const = (math.factorial(m) * r**m) ** r
    nfact = math.factorial(n)
    report = FominLulovReport(n, r)
    for p in partitions(n):
        chi = _mn(p, cls)
        d = hook_dimension(p)
        lhs = abs(chi) ** r * nfact
        rhs = const * d
        ratio = math.exp((math.log(lhs) - math.log(rhs)) / r) if lhs else 0.0
        report.rows.append(FominLulovRow(p, chi, d, lhs <= rhs, ratio))
    return report


@dataclass
class DimensionReport:
    n: int
    plancherel_ok: bool
    # (partition, dimension, exceeds n^2/3) for partitions outside the exceptional set
    rows: list[tuple[tuple[int, ...], int, bool]]
    exceptional: dict

    @property
    def min_row(self):
        return min(self.rows, key=lambda row: row[1]) if self.rows else None

    @property
    def all_exceed(self) -> bool:
        return all(ok for _, _, ok in self.rows)

    def to_dict(self) -> dict:
        mn = self.min_row
        return {
            "n": self.n,
            "plancherel_ok": self.plancherel_ok,
            "threshold": self.n**2 / 3,
            "checked": len(self.rows),
            "min_dimension": None if mn is None else mn[1],
            "min_partition": None if mn is None else list(mn[0]),
            "count_not_exceeding": sum(1 for _, _, ok in self.rows if not ok),
            "all_exceed": self.all_exceed,
            "exceptional_dimensions": {",".join(map(str, k)): v for k, v in self.exceptional.items()},
            "note": "the dimension bound is claimed only for n >= 400; reported, not asserted",
        }


def dim_bound_report(n: int, cap: int = PARTITION_CAP) -> DimensionReport:
    parts = partitions(n, cap)
    dims = {p: hook_dimension(p) for p in parts}
    if sum(d * d for d in dims.values()) != math.factorial(n):
        raise InternalConsistencyError(f"sum of squared dimensions differs from {n}!")
    ex = exceptional_partitions(n)
    rows = [(p, d, 3 * d > n * n) for p, d in dims.items() if p not in ex]
    return DimensionReport(n, True, rows, {p: dims[p] for p in sorted(ex, reverse=True)})
