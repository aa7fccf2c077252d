import math

import numpy as np
import pytest
import scipy.stats

from gafzeros.ensembles import EnsembleSpec
from gafzeros.extremes import TrialRecord
from gafzeros.geometry import Chart, SurfacePoint
from gafzeros.kacrice import limit_survival
from gafzeros.stats import (CHI2_Q999, GofReport, bin_index, chi_square_uniform,
                            dispersion, empirical_intensity, factorial_moment,
                            ks_bound, ks_stat, ks_two_sample)


def test_ks_stat_matches_scipy():
    rng = np.random.default_rng(5)
    x = np.sort(rng.exponential(size=300))
    cdf = lambda v: 1.0 - math.exp(-v)
    want = scipy.stats.kstest(x, scipy.stats.expon.cdf).statistic
    assert ks_stat(x, cdf) == pytest.approx(want, abs=1e-15)
    # against the rescaled-distance limit law for k=1
    y = np.sort(rng.weibull(4.0, size=500))
    want = scipy.stats.kstest(y, lambda v: 1.0 - np.exp(-v**4)).statistic
    got = ks_stat(y, lambda v: 1.0 - limit_survival(1, v))
    assert got == pytest.approx(want, abs=1e-15)


def test_ks_stat_validation():
    with pytest.raises(ValueError):
        ks_stat([1.0], lambda v: v)
    with pytest.raises(ValueError):
        ks_stat([2.0, 1.0, 3.0], lambda v: v)


def test_ks_two_sample_matches_scipy():
    rng = np.random.default_rng(6)
    a = np.sort(rng.standard_normal(211))
    b = np.sort(rng.standard_normal(137) * 1.2 + 0.1)
    want = scipy.stats.ks_2samp(a, b, method="asymp").statistic
    assert ks_two_sample(a, b) == pytest.approx(want, abs=1e-15)
    assert ks_two_sample(a, a) == 0.0
    with pytest.raises(ValueError):
        ks_two_sample(a, [1.0])


def test_ks_bound():
    assert ks_bound(10000) == pytest.approx(0.0136)
    assert ks_bound(100, factor=1.0) == 0.1


def test_dispersion():
    assert dispersion([3, 3, 3, 3]) == 0.0
    c = np.random.default_rng(7).poisson(2.0, size=50000)
    assert dispersion(c) == pytest.approx(1.0, abs=0.03)
    # variance/mean for a fixed small case: counts 0,2 -> var 1, mean 1
    assert dispersion([0, 2]) == 1.0
    with pytest.raises(ValueError):
        dispersion([0, 0, 0])
    with pytest.raises(ValueError):
        dispersion([])


def test_chi2_table_matches_scipy():
    for dof, q in CHI2_Q999.items():
        assert q == pytest.approx(scipy.stats.chi2.ppf(0.999, dof), rel=1e-10)


def sphere_marks(m, rng):
    # uniform on the sphere under normalized volume: 1/(1+|z|^2) ~ U(0,1)
    t = rng.uniform(0.0, 1.0, size=m)
    r = np.sqrt(1.0 / t - 1.0)
    th = rng.uniform(0.0, 2.0 * math.pi, size=m)
    return [SurfacePoint(Chart.SPHERE_0, complex(rv * math.cos(a), rv * math.sin(a)))
            for rv, a in zip(r, th)]


def test_chi_square_uniform_accepts_uniform_marks():
    rng = np.random.default_rng(8)
    spec = EnsembleSpec.su2(64)
    stat, dof = chi_square_uniform(sphere_marks(4000, rng), spec, 8)
    assert dof == 7
    assert stat < CHI2_Q999[dof]

    tspec = EnsembleSpec.torus(64)
    marks = [SurfacePoint(Chart.TORUS, complex(x, y))
             for x, y in rng.uniform(0, 1, size=(4000, 2))]
    stat, dof = chi_square_uniform(marks, tspec, 8)
    assert stat < CHI2_Q999[dof]

    gspec = EnsembleSpec.gef(6.0)
    r = 6.0 * np.sqrt(rng.uniform(0, 1, size=4000))
    th = rng.uniform(0, 2 * math.pi, size=4000)
    marks = [SurfacePoint(Chart.PLANE, complex(rv * math.cos(a), rv * math.sin(a)))
             for rv, a in zip(r, th)]
    stat, dof = chi_square_uniform(marks, gspec, 8)
    assert stat < CHI2_Q999[dof]


def test_chi_square_uniform_rejects_clumped_marks():
    spec = EnsembleSpec.su2(64)
    marks = [SurfacePoint(Chart.SPHERE_0, 0.01j * k) for k in range(200)]
    stat, dof = chi_square_uniform(marks, spec, 8)
    assert stat > CHI2_Q999[dof]


def test_chi_square_uniform_validation():
    spec = EnsembleSpec.su2(64)
    marks = sphere_marks(30, np.random.default_rng(0))
    with pytest.raises(ValueError):
        chi_square_uniform(marks, spec, 8)  # expected count 3.75 < 5
    with pytest.raises(ValueError):
        chi_square_uniform(marks, spec, 1)


def test_bin_index_ranges_and_balance():
    rng = np.random.default_rng(9)
    for spec, marks in [
        (EnsembleSpec.su2(64), sphere_marks(8000, rng)),
        (EnsembleSpec.torus(64),
         [SurfacePoint(Chart.TORUS, complex(x, y))
          for x, y in rng.uniform(0, 1, size=(8000, 2))]),
    ]:
        for bins in (2, 6, 8, 9):
            idx = np.array([bin_index(spec, p, bins) for p in marks])
            assert idx.min() >= 0 and idx.max() < bins
            occ = np.bincount(idx, minlength=bins)
            assert occ.min() > 0.7 * len(marks) / bins


def test_bin_index_sphere_chart_agreement():
    spec = EnsembleSpec.su2(64)
    z = 0.8 + 0.3j
    a = bin_index(spec, SurfacePoint(Chart.SPHERE_0, z), 8)
    b = bin_index(spec, SurfacePoint(Chart.SPHERE_1, 1.0 / z), 8)
    assert a == b


def fake_record(counts, isolated=None, sigma=(1.0,), marks=()):
    return TrialRecord(sigma=tuple(sigma), marks=tuple(marks),
                       counts=dict(counts), isolated=dict(isolated or {}),
                       seed=(0, 0))


def test_empirical_intensity_and_factorial_moment():
    recs = [fake_record({(1.0, "all"): c}) for c in (0, 1, 2, 3)]
    mean, se = empirical_intensity(recs, 1.0, "all")
    assert mean == 1.5
    assert se == pytest.approx(np.std([0, 1, 2, 3], ddof=1) / 2.0)
    m1, _ = factorial_moment(recs, 1.0, "all", 1)
    assert m1 == 1.5
    m2, _ = factorial_moment(recs, 1.0, "all", 2)
    assert m2 == pytest.approx(np.mean([0, 0, 2, 6]))
    m3, _ = factorial_moment(recs, 1.0, "all", 3)
    assert m3 == pytest.approx(np.mean([0, 0, 0, 6]))
    with pytest.raises(ValueError):
        factorial_moment(recs, 1.0, "all", 0)
    assert empirical_intensity([], 1.0, "all") == (0.0, 0.0)


def test_gof_report_defaults():
    rep = GofReport(trials=100)
    assert rep.trials == 100
    assert rep.ks_stats == {} and rep.flags == {}
    assert rep.chi_square is None
