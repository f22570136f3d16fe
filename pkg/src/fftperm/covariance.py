"""Empirical probe of the within-batch covariance of shift indicators.

For one batch the n indicators ``z_k = 1[sigma1 u . lambda^k sigma2 v >= t]``
each have mean ``p``. The probe estimates

* ``n Var(x) / (p (1 - p))`` where ``x`` is the batch mean; equals 1 when the
  indicators are uncorrelated, and is below 1 when their covariances are
  negative;
* the average pairwise covariance ``mean_{j != k} Cov(z_j, z_k)`` with a
  standard error, via the per-batch unbiased statistic
  ``((sum_k (z_k - p))^2 - sum_k (z_k - p)^2) / (n (n - 1))``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .estimators import (
    CHUNK_ELEMENTS,
    EXACT_LIMIT,
    _pair,
    _split,
    exact_null_products,
    exact_pvalue,
    naive_mc_pvalue,
    shift_products_sample,
)
from .perm import RngStream
from .sampler import guard_band, permuted_copies, shift_indicators

DEFAULT_P_SAMPLES = 200_000


@dataclass
class CovarianceReport:
    n: int
    t: float
    p: float
    p_source: str
    trials: int
    batch_mean_variance: float
    variance_ratio: float
    variance_ratio_se: float
    mean_pairwise_cov: float
    mean_pairwise_cov_se: float

    @property
    def cov_z(self) -> float:
        """Covariance estimate in units of its standard error."""
        if self.mean_pairwise_cov_se == 0:
            return 0.0 if self.mean_pairwise_cov == 0 else math.copysign(math.inf, self.mean_pairwise_cov)
        return self.mean_pairwise_cov / self.mean_pairwise_cov_se

    def nonpositive_within(self, k_se: float = 3.0) -> bool:
        return self.mean_pairwise_cov <= k_se * self.mean_pairwise_cov_se

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cov_z"] = self.cov_z
        return d


def reference_p(u, v, t, rng: RngStream, p_samples: int = DEFAULT_P_SAMPLES) -> tuple[float, str]:
    if u.size <= EXACT_LIMIT:
        return exact_pvalue(u, v, t).estimate, "exact"
    return naive_mc_pvalue(u, v, t, p_samples, rng).estimate, f"naive[{p_samples}]"


def quantile_threshold(u, v, q: float, rng: RngStream) -> float:
    """Threshold at the q-quantile of the null distribution of ``(sigma u) . v``.

    Exact for small n, otherwise estimated from pooled shift products.
    """
    u, v = _pair(u, v)
    if u.size <= 8:
        y = exact_null_products(u, v)
    else:
        y = shift_products_sample(u, v, rng, batches=max(16, 2**16 // u.size))
    return float(np.quantile(y, q))


def empirical_covariance_probe(u, v, t, trials: int, rng: RngStream, *, p: float | None = None,
                               p_samples: int = DEFAULT_P_SAMPLES) -> CovarianceReport:
    u, v = _pair(u, v)
    t = float(t)
    n = u.size
    if trials < 2:
        raise ValueError("need at least two trials")
    if p is None:
        p, source = reference_p(u, v, t, rng.derive(1), p_samples)
    else:
        source = "given"
    band = guard_band(u, v, t)

    xs = []
    cs = []
    rows = max(1, CHUNK_ELEMENTS // n)
    for j, b in enumerate(_split(trials, min(trials, rows))):
        gen = rng.derive(0, j).generator()
        z, _ = shift_indicators(permuted_copies(gen, u, b), permuted_copies(gen, v, b), t, band)
        d = z - p
        s1 = d.sum(axis=1)
        s2 = (d * d).sum(axis=1)
        xs.append(z.mean(axis=1))
        cs.append((s1 * s1 - s2) / (n * (n - 1)))
    x = np.concatenate(xs)
    c = np.concatenate(cs)

    var = float(np.var(x, ddof=1))
    # standard error of the sample variance from the spread of squared deviations
    sq = (x - x.mean()) ** 2
    var_se = float(np.std(sq, ddof=1) / math.sqrt(trials))
    denom = p * (1 - p)
    if var == 0:
        ratio, ratio_se = 0.0, 0.0
    elif denom == 0:
        ratio, ratio_se = math.nan, math.nan
    else:
        ratio, ratio_se = n * var / denom, n * var_se / denom
    return CovarianceReport(
        n=n,
        t=t,
        p=p,
        p_source=source,
        trials=trials,
        batch_mean_variance=var,
        variance_ratio=ratio,
        variance_ratio_se=ratio_se,
        mean_pairwise_cov=float(c.mean()),
        mean_pairwise_cov_se=float(np.std(c, ddof=1) / math.sqrt(trials)),
    )
