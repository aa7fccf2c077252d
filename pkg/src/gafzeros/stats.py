"""Goodness-of-fit machinery turning trial records into verdicts.

Kolmogorov-Smirnov distances against the limit laws, the Poisson
dispersion index, chi-square uniformity of event locations over
equal-measure bins, and empirical (factorial) moments of region counts.
Verdicts use fixed references: the 0.999 chi-square quantiles up to 15
degrees of freedom and the 1.36/sqrt(m) KS rule, so no statistical
dependency is needed at decision time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleSpec, Model
from .geometry import Chart, SurfacePoint

# 0.999 quantiles of chi-square by degrees of freedom (frozen; tests
# recompute them independently)
CHI2_Q999 = {
    1: 10.827566170662733, 2: 13.815510557964274, 3: 16.26623619623813,
    4: 18.46682695290317, 5: 20.515005652432873, 6: 22.457744484825323,
    7: 24.321886347856854, 8: 26.12448155837614, 9: 27.877164871256568,
    10: 29.58829844507442, 11: 31.264133620239985, 12: 32.90949040736021,
    13: 34.52817897487089, 14: 36.12327368039813, 15: 37.69729821835383,
}


def ks_bound(m: int, factor: float = 1.36) -> float:
    """Classical large-sample KS acceptance bound factor/sqrt(m)."""
    return factor / math.sqrt(m)


def ks_stat(samples, cdf) -> float:
    """Sup distance between the empirical CDF of samples and cdf.

    Two-sided evaluation at the jump points: both i/m - F(x_i) and
    F(x_i) - (i-1)/m enter the max. Samples must be sorted ascending.
    """
    x = np.asarray(samples, dtype=float)
    m = x.size
    if m < 2:
        raise ValueError("ks_stat needs at least 2 samples")
    if np.any(np.diff(x) < 0):
        raise ValueError("samples must be sorted ascending")
    F = np.array([cdf(v) for v in x], dtype=float)
    hi = np.arange(1, m + 1) / m - F
    lo = F - np.arange(0, m) / m
    return float(max(hi.max(), lo.max()))


def ks_two_sample(a, b) -> float:
    """Sup distance between the empirical CDFs of two sorted samples."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("ks_two_sample needs at least 2 samples each")
    allv = np.concatenate([a, b])
    allv.sort(kind="mergesort")
    ca = np.searchsorted(a, allv, side="right") / a.size
    cb = np.searchsorted(b, allv, side="right") / b.size
    return float(np.abs(ca - cb).max())


def dispersion(counts) -> float:
    """Variance-to-mean ratio of integer counts (1 for Poisson data)."""
    c = np.asarray(counts, dtype=float)
    mean = c.mean() if c.size else 0.0
    if mean <= 0:
        raise ValueError("dispersion needs counts with positive mean")
    return float(c.var() / mean)


def _sphere_band(p: SurfacePoint) -> float:
    # 1/(1 + |z|^2) is uniform on [0, 1] for normalized-volume-uniform
    # points; evaluate it overflow-free in either chart
    r2 = abs(p.coord) ** 2
    if p.chart is Chart.SPHERE_0:
        return 1.0 / (1.0 + r2)
    return r2 / (1.0 + r2)


def _grid_shape(bins: int) -> tuple[int, int]:
    gx = int(math.isqrt(bins))
    while bins % gx:
        gx -= 1
    return gx, bins // gx


def bin_index(spec: EnsembleSpec, p: SurfacePoint, bins: int) -> int:
    """Index of the equal-measure bin containing a point.

    Sphere: latitude bands equal under the normalized round measure.
    Torus: an axis-aligned grid of equal rectangles. Plane: equal angular
    sectors of the observed disk.
    """
    if spec.model is Model.SU2:
        t = _sphere_band(p)
        return min(int(t * bins), bins - 1)
    if spec.model is Model.TORUS:
        gx, gy = _grid_shape(bins)
        ix = min(int((p.coord.real % 1.0) * gx), gx - 1)
        iy = min(int((p.coord.imag % 1.0) * gy), gy - 1)
        return iy * gx + ix
    th = math.atan2(p.coord.imag, p.coord.real) % (2.0 * math.pi)
    return min(int(th / (2.0 * math.pi) * bins), bins - 1)


def chi_square_uniform(marks, spec: EnsembleSpec, bins: int) -> tuple[float, int]:
    """Chi-square statistic of marks against uniformity over equal bins.

    Returns (statistic, dof) with dof = bins - 1. Rejects runs with
    expected bin occupancy below 5, where the chi-square reference is
    unreliable.
    """
    m = len(marks)
    if bins < 2:
        raise ValueError("need at least 2 bins")
    expected = m / bins
    if expected < 5:
        raise ValueError(f"expected bin count {expected:.2f} < 5; "
                         "collect more marks or use fewer bins")
    obs = np.zeros(bins)
    for p in marks:
        obs[bin_index(spec, p, bins)] += 1
    stat = float(((obs - expected) ** 2 / expected).sum())
    return stat, bins - 1


def empirical_intensity(records, a: float, region: str) -> tuple[float, float]:
    """Sample mean and standard error of the count N(a, region)."""
    c = np.array([r.counts[(a, region)] for r in records], dtype=float)
    if c.size == 0:
        return 0.0, 0.0
    sd = c.std(ddof=1) if c.size > 1 else 0.0
    return float(c.mean()), float(sd / math.sqrt(c.size))


def factorial_moment(records, a: float, region: str, k: int) -> tuple[float, float]:
    """Mean and standard error of N(N-1)...(N-k+1) for the count N(a, region).

    For Poisson counts this estimates intensity^k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    c = np.array([r.counts[(a, region)] for r in records], dtype=float)
    f = np.ones_like(c)
    for j in range(k):
        f *= c - j
    sd = f.std(ddof=1) if f.size > 1 else 0.0
    return float(f.mean()), float(sd / math.sqrt(max(f.size, 1)))


@dataclass
class GofReport:
    """Aggregated goodness-of-fit verdicts for one experiment.

    ks_stats maps (model, k) to the KS distance of the k-th smallest
    rescaled distance against its limit law; dispersion and mean_counts
    are keyed by threshold and (threshold, region); flags carry the
    pass/fail decisions with the thresholds that produced them.
    """

    trials: int
    ks_stats: dict = field(default_factory=dict)
    dispersion: dict = field(default_factory=dict)
    chi_square: tuple[float, int] | None = None
    mean_counts: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
