"""Statistical machinery: proportion tests, Welch t, Shapiro-Wilk, bootstrap.

The Shapiro-Wilk implementation follows the standard polynomial
approximation (Royston's algorithm) for 3 <= n <= 2000; the test suite
cross-checks it against an independent reference implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri, stdtr

from .errors import DegenerateSample, SampleTooSmall, TooFewDefects


def _phi(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def two_proportion_z(p1_count: int, n1: int, p2_count: int, n2: int) -> tuple[float, float]:
    """Pooled two-proportion z statistic with a two-sided normal p-value."""
    if n1 <= 0 or n2 <= 0:
        raise DegenerateSample("both groups need at least one observation")
    p1 = p1_count / n1
    p2 = p2_count / n2
    pooled = (p1_count + p2_count) / (n1 + n2)
    variance = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    if variance == 0.0:
        # pooled proportion 0 or 1 forces equal groups
        return 0.0, 1.0
    z = (p2 - p1) / math.sqrt(variance)
    p = 2.0 * (1.0 - _phi(abs(z)))
    return z, p


def welch_t_one_sided(sample_a, sample_b) -> tuple[float, float, float]:
    """Welch's t with Satterthwaite df; one-sided p for H1: mean(a) < mean(b)."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DegenerateSample("each sample needs at least two observations")
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        if a.mean() == b.mean():
            return 0.0, float(a.size + b.size - 2), 0.5
        raise DegenerateSample("zero variance in both samples with unequal means")
    sa = va / a.size
    sb = vb / b.size
    t = (a.mean() - b.mean()) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    p = float(stdtr(df, t))
    return float(t), float(df), p


def shapiro_wilk(sample) -> tuple[float, float]:
    """W statistic and approximate p-value for 3 <= n <= 2000."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n < 3:
        raise SampleTooSmall("Shapiro-Wilk needs at least 3 observations")
    if n > 2000:
        raise SampleTooSmall("polynomial approximation is valid only up to n = 2000")
    if x[0] == x[-1]:
        raise DegenerateSample("constant sample")

    m = ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    mm = float(m @ m)
    c = m / math.sqrt(mm)
    u = 1.0 / math.sqrt(n)

    a = np.zeros(n)
    if n == 3:
        a[2] = math.sqrt(0.5)
        a[0] = -a[2]
    else:
        poly1 = (-2.706056, 4.434685, -2.071190, -0.147981, 0.221157, c[-1])
        a_n = _polyval(poly1, u)
        if n <= 5:
            phi = (mm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n**2)
            a[1 : n - 1] = m[1 : n - 1] / math.sqrt(phi)
            a[-1] = a_n
            a[0] = -a_n
        else:
            poly2 = (-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, c[-2])
            a_n1 = _polyval(poly2, u)
            phi = (mm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
                1.0 - 2.0 * a_n**2 - 2.0 * a_n1**2
            )
            a[2 : n - 2] = m[2 : n - 2] / math.sqrt(phi)
            a[-1] = a_n
            a[-2] = a_n1
            a[0] = -a_n
            a[1] = -a_n1

    mean = x.mean()
    ssq = float(((x - mean) ** 2).sum())
    w = float((a @ x) ** 2) / ssq
    w = min(w, 1.0)

    if n == 3:
        pi6 = 6.0 / math.pi
        stqr = math.asin(math.sqrt(0.75))
        p = pi6 * (math.asin(math.sqrt(w)) - stqr)
        return w, float(min(max(p, 0.0), 1.0))
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        if gamma - math.log(1.0 - w) <= 0.0:
            return w, 0.0
        y = -math.log(gamma - math.log(1.0 - w))
        mu = 0.5440 - 0.39978 * n + 0.025054 * n**2 - 0.0006714 * n**3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n**2 - 0.0020322 * n**3)
    else:
        ln_n = math.log(n)
        y = math.log(1.0 - w)
        mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n**2 + 0.0038915 * ln_n**3
        sigma = math.exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n**2)
    z = (y - mu) / sigma
    return w, float(1.0 - _phi(z))


def _polyval(coeffs, u: float) -> float:
    """Horner evaluation; coeffs ordered highest power first, constant last."""
    acc = 0.0
    for coef in coeffs[:-1]:
        acc = acc * u + coef
    return acc * u + coeffs[-1]


@dataclass
class EffectSize:
    delta: float
    ci_low: float
    ci_high: float
    m: int
    replicates: int


def bootstrap_effect_ci(
    q1_values,
    q4_values,
    replicates: int = 10000,
    m: int = 2,
    seed: int = 0,
) -> EffectSize:
    """Percentile CI for the Q4 - Q1 delta under defect resampling.

    Values are per-defect aggregates aligned by position; the CI level is
    Bonferroni-widened to 1 - 0.05/m.
    """
    q1 = np.asarray(q1_values, dtype=float)
    q4 = np.asarray(q4_values, dtype=float)
    if q1.size != q4.size:
        raise TooFewDefects("Q1 and Q4 must provide one value per defect")
    n = q1.size
    if n < 2:
        raise TooFewDefects("bootstrap over defects needs at least 2 defects")
    if replicates < 1000:
        raise ValueError("use at least 1000 bootstrap replicates")

    delta = float(q4.mean() - q1.mean())
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(replicates, n))
    deltas = q4[idx].mean(axis=1) - q1[idx].mean(axis=1)
    alpha = 0.05 / m
    ci_low = float(np.percentile(deltas, 100.0 * alpha / 2.0))
    ci_high = float(np.percentile(deltas, 100.0 * (1.0 - alpha / 2.0)))
    return EffectSize(delta=delta, ci_low=ci_low, ci_high=ci_high, m=m,
                      replicates=replicates)
