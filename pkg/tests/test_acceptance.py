"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Criterion 3 is an open question: its outcome is reported as PASS or FINDING
and never fails the build.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from fftperm import verify
from fftperm.adapters import GroupedSample, kruskal_wallis_exact, mann_whitney_reduction, spearman_reduction
from fftperm.cli import run_bench
from fftperm.covariance import empirical_covariance_probe, quantile_threshold
from fftperm.estimators import AccuracySpec, estimate_pvalue, exact_pvalue
from fftperm.perm import RngStream


def test_criterion_1_oracle_equivalence(acceptance):
    gen = np.random.default_rng(2024)
    acc = AccuracySpec(0.1, 0.05)
    worst, total_miss, runs = 0.0, 0, 0
    for inst in range(50):
        n = 4 + inst % 4
        u, v = gen.standard_normal(n), gen.standard_normal(n)
        t = float(u @ v)
        p = exact_pvalue(u, v, t).estimate
        tol = 0.1 * math.sqrt(p)
        miss = sum(abs(estimate_pvalue(u, v, t, acc, RngStream(seed, 0, (inst,))).estimate - p) > tol
                   for seed in range(200))
        worst = max(worst, miss / 200)
        total_miss += miss
        runs += 200
    ok = worst <= 0.07
    acceptance(1, ok, f"worst per-instance failure rate {worst:.3f}, pooled {total_miss / runs:.4f} "
                      f"(limit 0.07 over 50 instances x 200 seeds)")
    assert ok


def test_criterion_2_variance_reduction(acceptance):
    gen = np.random.default_rng(7)
    root = RngStream(7, 1)
    ratios = {}
    for i, n in enumerate((256, 1024, 4096)):
        u, v = gen.standard_normal(n), gen.standard_normal(n)
        t = quantile_threshold(u, v, 0.95, root.derive(0, i))
        rep = empirical_covariance_probe(u, v, t, 3000, root.derive(1, i))
        ratios[n] = (rep.variance_ratio, rep.variance_ratio_se, rep.p)
    ok = all(r <= 1.2 for r, _, _ in ratios.values())
    detail = ", ".join(f"n={n}: {r:.3f} (se {se:.3f}, p {p:.3f})" for n, (r, se, p) in ratios.items())
    acceptance(2, ok, f"n Var(x)/(p(1-p)) <= 1.2: {detail}")
    assert ok


def test_criterion_3_covariance_sign_probe(acceptance):
    gen = np.random.default_rng(11)
    root = RngStream(11, 2)
    rows = []
    for i, n in enumerate((6, 64, 512)):
        for j in range(20):
            u, v = gen.standard_normal(n), gen.standard_normal(n)
            q = (0.5, 0.8, 0.95)[j % 3]
            t = quantile_threshold(u, v, q, root.derive(0, i, j))
            rep = empirical_covariance_probe(u, v, t, 2000, root.derive(1, i, j), p_samples=50_000)
            rows.append((n, rep.cov_z, rep.nonpositive_within(3.0)))
    bad = [(n, z) for n, z, ok in rows if not ok]
    zs = {n: np.mean([z for m, z, _ in rows if m == n]) for n in (6, 64, 512)}
    summary = (f"{len(rows) - len(bad)}/{len(rows)} instances with mean pairwise covariance <= 3 SE; "
               f"mean z by n: " + ", ".join(f"{n}: {z:+.1f}" for n, z in zs.items()))
    acceptance(3, not bad, summary, label=None if not bad else "FINDING")


def test_criterion_4_conservative_uniformity(acceptance):
    rep = verify.conservative_uniformity(n=6, i_max=4, trials=20000, seed=0)
    ok = rep["chi2_pvalue"] >= 0.001 and rep["excess_ok"] and rep["zero_count"] == 0
    acceptance(4, ok, f"chi-square p = {rep['chi2_pvalue']:.3f} over 30 grid values, "
                      f"max excess {rep['max_excess']:.4f} within 3 sqrt(a(1-a)/20000)")
    assert ok


def test_criterion_5_speed(acceptance):
    sizes = [2**e for e in range(12, 19)]
    report = run_bench(sizes, seed=0, repeats=20, naive_samples=2000, passes=3)
    rows = {r["n"]: r for r in report["rows"]}
    speedup = rows[65536]["speedup"]
    ratios = [r["batch_time_ratio_vs_prev"] for r in report["rows"][1:]]
    ok = speedup >= 10 and max(ratios) <= 2.5
    acceptance(5, ok, f"speedup at n=65536 {speedup:.0f}x (>= 10); per-doubling batch time ratios "
                      + " ".join(f"{r:.2f}" for r in ratios) + " (<= 2.5)")
    assert ok


def test_criterion_6_representation_suites(acceptance):
    checks = [verify.plancherel(14), verify.column_orthogonality(10), verify.standard_rep_characters(14),
              verify.fomin_lulov_all(14)]
    ok = all(c.passed for c in checks)
    acceptance(6, ok, "; ".join(f"{c.name}: {'ok' if c.passed else 'FAILED'}" for c in checks))
    assert ok


def test_criterion_7_lattice_suites(acceptance):
    checks = verify.lattice_suite()
    ok = all(c.passed for c in checks)
    cases = sum(c.detail["cases"] for c in checks)
    acceptance(7, ok, f"{cases} threshold sets (exhaustive n <= 6, randomized n = 7, 8): "
                      "upper set, |disc| <= n!/n, disc = sign(n) * alternating sum")
    assert ok


def _kw_direct(groups):
    values = np.concatenate(groups)
    labels = np.repeat(np.arange(len(groups)), [len(g) for g in groups])
    obs = stats.kruskal(*[values[labels == i] for i in range(len(groups))]).statistic
    hits = total = 0
    for lab in set(itertools.permutations(labels.tolist())):
        lab = np.array(lab)
        h = stats.kruskal(*[values[lab == i] for i in range(len(groups))]).statistic
        hits += h >= obs - 1e-9
        total += 1
    return hits / total


def test_criterion_8_adapter_fidelity(acceptance):
    red = mann_whitney_reduction([1, 2], [3, 4])
    mw = exact_pvalue(red.u, red.v, red.t)
    mw_ok = Fraction(mw.hits, mw.trials) == Fraction(1, 6)
    sp_ok = True
    for n in range(3, 8):
        x = np.arange(1.0, n + 1)
        res = exact_pvalue(*(lambda r: (r.u, r.v, r.t))(spearman_reduction(x, np.sqrt(x))))
        sp_ok &= Fraction(res.hits, res.trials) == Fraction(1, math.factorial(n))
    gen = np.random.default_rng(8)
    kw_ok, cases = True, 0
    for N in range(3, 8):
        for n1 in range(1, N):
            groups = [gen.standard_normal(n1), gen.standard_normal(N - n1) + 0.5]
            got = kruskal_wallis_exact(GroupedSample.from_groups(groups)).estimate
            kw_ok &= got == pytest.approx(_kw_direct(groups), abs=1e-12)
            cases += 1
    ok = mw_ok and sp_ok and kw_ok
    acceptance(8, ok, f"Mann-Whitney {{1,2}} vs {{3,4}} = {Fraction(mw.hits, mw.trials)}; "
                      f"Spearman monotone = 1/n! for n = 3..7: {sp_ok}; "
                      f"Kruskal-Wallis two groups vs direct H enumeration ({cases} cases, N <= 7): {kw_ok}")
    assert ok
