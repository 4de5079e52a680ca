"""Small statistical helpers on top of scipy.stats."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def ks_uniform(sample, low: float = 0.0, high: float = 1.0) -> float:
    """Kolmogorov-Smirnov distance to Uniform[low, high]."""
    return float(stats.kstest(np.asarray(sample), "uniform", args=(low, high - low)).statistic)


def ks_two_sample(a, b) -> float:
    return float(stats.ks_2samp(np.asarray(a), np.asarray(b)).statistic)


def mean_with_stderr(sample) -> tuple[float, float]:
    x = np.asarray(sample, dtype=np.float64)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def linear_fit(x, y):
    """Least squares y = slope*x + intercept; returns (slope, intercept, r2, residuals)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    res = stats.linregress(x, y)
    resid = y - (res.slope * x + res.intercept)
    return float(res.slope), float(res.intercept), float(res.rvalue ** 2), resid


def loglog_slope(x, p) -> float:
    """Slope of log p against log x over the points with p > 0."""
    x = np.asarray(x, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    keep = p > 0
    if keep.sum() < 2:
        return math.nan
    return linear_fit(np.log(x[keep]), np.log(p[keep]))[0]
