"""Invariant suites behind ``fftperm verify``.

Each suite returns a list of :class:`Check`. Hard checks decide the exit
status; informational ones (``hard=False``) are reported only, e.g. the
large-n dimension and character-ratio statements, which are claimed only for
n >= 400 and cannot be enumerated.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .covariance import empirical_covariance_probe, quantile_threshold
from .estimators import all_permutations, conservative_pvalue
from .perm import RngStream
from .rep import characters as ch
from .rep import lattice as lat

SCOPES = ("lattice", "characters", "bounds", "covariance", "conservative")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    hard: bool = True

    def to_dict(self):
        return asdict(self)


# characters ---------------------------------------------------------------


def plancherel(n_max: int = 14) -> Check:
    bad = [n for n in range(1, n_max + 1)
           if sum(ch.hook_dimension(p) ** 2 for p in ch.partitions(n)) != math.factorial(n)]
    return Check(f"plancherel n<={n_max}", not bad, {"failing_n": bad})


def column_orthogonality(n_max: int = 10) -> Check:
    bad = []
    for n in range(1, n_max + 1):
        parts, table = ch.character_table(n)
        T = np.array(table, dtype=object)
        gram = T.T.dot(T)
        for a, c in enumerate(parts):
            for b in range(len(parts)):
                want = math.factorial(n) // ch.class_size(c) if a == b else 0
                if gram[a, b] != want:
                    bad.append({"n": n, "class": list(c), "other": list(parts[b]), "got": int(gram[a, b])})
    return Check(f"column orthogonality n<={n_max}", not bad, {"failures": bad[:10]})


def standard_rep_characters(n_max: int = 14) -> Check:
    """|chi_(n-1,1)([r^m])| = 1 and the same for the conjugate partition."""
    bad = []
    for n in range(2, n_max + 1):
        for r in range(2, n + 1):
            if n % r:
                continue
            cls = ch.rectangular_class(n, r)
            for p in ((n - 1, 1), ch.conjugate_partition((n - 1, 1))):
                val = ch.mn_character(p, cls)
                if abs(val) != 1:
                    bad.append({"n": n, "r": r, "partition": list(p), "chi": val})
    return Check(f"|chi_(n-1,1)([r^m])| = 1 for n<={n_max}", not bad, {"failures": bad})


def characters_suite() -> list[Check]:
    return [plancherel(14), column_orthogonality(10), standard_rep_characters(14)]


# bounds -------------------------------------------------------------------


def fomin_lulov_all(n_max: int = 14) -> Check:
    bad = []
    tight = []
    for n in range(2, n_max + 1):
        for r in range(2, n + 1):
            if n % r:
                continue
            rep = ch.fomin_lulov_check(n, r)
            tight.append(rep.to_dict())
            bad.extend({"n": n, "r": r, "partition": list(row.partition)}
                       for row in rep.rows if not row.holds)
    worst = max(tight, key=lambda d: d["tightest_ratio"])
    return Check(f"Fomin-Lulov inequality n<={n_max}", not bad,
                 {"failures": bad[:10], "cases": len(tight), "tightest": worst})


def ratio_trend(n_max: int = 14) -> Check:
    rows = []
    for n in range(4, n_max + 1):
        for r in range(2, n + 1):
            if n % r:
                continue
            ratio, arg = ch.character_ratio_max(n, r)
            bound = 3 / n if r >= 4 else 3 / math.sqrt(n)
            rows.append({"n": n, "r": r, "max_ratio": str(ratio), "value": float(ratio),
                         "argmax": list(arg), "large_n_bound": bound,
                         "within_large_n_bound": float(ratio) <= bound})
    return Check("character ratio trend (informational, bound claimed for n>=400)", True,
                 {"rows": rows}, hard=False)


def dimension_reports(ns=(10, 14, 20, 30)) -> list[Check]:
    out = []
    for n in ns:
        rep = ch.dim_bound_report(n)
        out.append(Check(f"dimension report n={n} (informational)", True, rep.to_dict(), hard=False))
    return out


def bounds_suite() -> list[Check]:
    return [fomin_lulov_all(14), ratio_trend(14), *dimension_reports()]


# lattice ------------------------------------------------------------------


def _lattice_instances(n, rng, count):
    for i in range(count):
        if i % 3 == 0:
            u = rng.integers(0, 3, n).astype(float)
            v = rng.integers(0, 4, n).astype(float)
        else:
            u = rng.standard_normal(n)
            v = rng.standard_normal(n)
        yield np.sort(u), np.sort(v)


def lattice_case(u, v, t) -> dict | None:
    """None when all three lattice properties hold, else a failure record."""
    n = u.size
    mask = lat.threshold_mask(u, v, t)
    upper = lat.is_upper_mask(mask, n)
    disc = lat.discrepancy_mask(mask, n)
    alt = lat.alternating_sum_mask(mask, n)
    bound_ok = abs(disc) <= math.factorial(n) // n
    sign_ok = disc == lat.discrepancy_sign(n) * alt
    if upper and bound_ok and sign_ok:
        return None
    return {"u": u.tolist(), "v": v.tolist(), "t": float(t), "upper": upper,
            "discrepancy": disc, "alternating_sum": alt}


def lattice_suite(seed: int = 0, exhaustive_n: int = 6, instances: int = 12,
                  random_ns=(7, 8), random_instances: int = 10) -> list[Check]:
    """Every achievable threshold for small n; random thresholds for n = 7, 8."""
    rng = np.random.default_rng(seed)
    out = []
    for n in range(2, exhaustive_n + 1):
        fails, cases = [], 0
        for u, v in _lattice_instances(n, rng, instances):
            ys = np.unique(v[all_permutations(n)] @ u)
            for t in ys:
                cases += 1
                f = lattice_case(u, v, t)
                if f:
                    fails.append(f)
        out.append(Check(f"threshold sets: upper set, |disc| <= n!/n, disc = +-alt sum (n={n}, exhaustive)",
                         not fails, {"cases": cases, "failures": fails[:5]}))
    for n in random_ns:
        fails, cases = [], 0
        for u, v in _lattice_instances(n, rng, random_instances):
            ys = v[all_permutations(n)] @ u
            for t in rng.choice(ys, 5):
                cases += 1
                f = lattice_case(u, v, t)
                if f:
                    fails.append(f)
        out.append(Check(f"threshold sets (n={n}, randomized)", not fails,
                         {"cases": cases, "failures": fails[:5]}))
    return out


# covariance ---------------------------------------------------------------


def covariance_suite(seed: int = 0, ratio_ns=(256, 1024), ratio_trials: int = 3000,
                     probe_ns=(6, 64, 512), probe_instances: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    root = RngStream(seed, 7)
    out = []
    for i, n in enumerate(ratio_ns):
        u, v = rng.standard_normal(n), rng.standard_normal(n)
        t = quantile_threshold(u, v, 0.95, root.derive(0, i))
        rep = empirical_covariance_probe(u, v, t, ratio_trials, root.derive(1, i))
        out.append(Check(f"n Var(x)/(p(1-p)) <= 1.2 at n={n}", rep.variance_ratio <= 1.2, rep.to_dict()))
    rows = []
    for i, n in enumerate(probe_ns):
        for j in range(probe_instances):
            u, v = rng.standard_normal(n), rng.standard_normal(n)
            t = quantile_threshold(u, v, 0.5, root.derive(2, i, j))
            rep = empirical_covariance_probe(u, v, t, 2000, root.derive(3, i, j))
            rows.append({"n": n, "cov": rep.mean_pairwise_cov, "se": rep.mean_pairwise_cov_se,
                         "nonpositive_within_3se": rep.nonpositive_within(3.0)})
    out.append(Check("average pairwise covariance <= 0 within 3 SE (open question, informational)",
                     all(r["nonpositive_within_3se"] for r in rows), {"rows": rows}, hard=False))
    return out


# conservative -------------------------------------------------------------


def conservative_uniformity(n: int = 6, i_max: int = 4, trials: int = 20000, seed: int = 0) -> dict:
    """Distribution of the conservative p-value under exchangeable Gaussian data."""
    data = np.random.default_rng(seed)
    root = RngStream(seed, 11)
    grid = n * (i_max + 1)
    counts = np.zeros(grid + 1, dtype=np.int64)
    for trial in range(trials):
        u = data.standard_normal(n)
        v = data.standard_normal(n)
        res = conservative_pvalue(u, v, i_max, root.derive(trial))
        counts[res.hits] += 1
    observed = counts[1:]
    chi2 = stats.chisquare(observed)
    cdf = np.cumsum(observed) / trials
    alphas = np.arange(1, grid + 1) / grid
    excess = cdf - alphas
    slack = 3 * np.sqrt(alphas * (1 - alphas) / trials)
    return {
        "n": n,
        "i_max": i_max,
        "trials": trials,
        "zero_count": int(counts[0]),
        "counts": observed.tolist(),
        "chi2": float(chi2.statistic),
        "chi2_pvalue": float(chi2.pvalue),
        "max_excess": float(excess.max()),
        "excess_ok": bool(np.all(excess <= slack)),
    }


def conservative_suite(seed: int = 0, trials: int = 20000) -> list[Check]:
    rep = conservative_uniformity(6, 4, trials, seed)
    return [
        Check("conservative p-value grid uniformity (chi-square at 0.001)",
              rep["chi2_pvalue"] >= 0.001 and rep["zero_count"] == 0, rep),
        Check("P(ret <= a) - a <= 3 sqrt(a(1-a)/trials) on the grid", rep["excess_ok"],
              {"max_excess": rep["max_excess"]}),
    ]


SUITES = {
    "characters": characters_suite,
    "bounds": bounds_suite,
    "lattice": lattice_suite,
    "covariance": covariance_suite,
    "conservative": conservative_suite,
}


def run(scope: str) -> list[Check]:
    scopes = SCOPES if scope == "all" else (scope,)
    if any(s not in SUITES for s in scopes):
        raise ValueError(f"unknown scope {scope!r}")
    out = []
    for s in scopes:
        out.extend(SUITES[s]())
    return out
