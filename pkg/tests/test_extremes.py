import math

import numpy as np
import pytest

import oracles
from gafzeros.ensembles import EnsembleSpec, sample_section
from gafzeros.extremes import (EIGHTH_ROOT, PairEvent, REGIONS, TrialConfig,
                               collect_trial, filter_isolated, k_smallest,
                               pair_events, region)
from gafzeros.geometry import Chart, SurfacePoint, rescale_factor
from gafzeros.rng import trial_stream
from gafzeros.rootfind import ZeroSet, compute_zeros

SPECS = [EnsembleSpec.su2(32), EnsembleSpec.su2(200), EnsembleSpec.torus(64),
         EnsembleSpec.torus(121), EnsembleSpec.gef(4.0), EnsembleSpec.gef(9.0)]


def charts_of(zs):
    return [zs.point(i).chart.value for i in range(len(zs))]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.model.value}-{s.n or s.radius}")
def test_pair_events_match_brute_force(spec):
    model = spec.model.value
    for seed in range(3):
        zs = compute_zeros(sample_section(spec, trial_stream(31, seed)))
        ref = oracles.all_pair_distances(model, charts_of(zs), zs.coord)
        resc = rescale_factor(spec)
        for a in (0.5, 1.0, 2.0, 5.0, 20.0):
            want = {(i, j) for d, i, j in ref if d < a / resc}
            events = pair_events(zs, a, trial_stream(32, seed))
            got = {(e.i, e.j) for e in events}
            assert got == want
            # events arrive sorted by index pair with exact rescaling
            assert [(e.i, e.j) for e in events] == sorted(got)
            for e in events:
                assert e.x == resc * e.raw_distance


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.model.value}-{s.n or s.radius}")
def test_k_smallest_matches_sorted_brute_force(spec):
    zs = compute_zeros(sample_section(spec, trial_stream(33, 0)))
    ref = [d for d, _, _ in oracles.all_pair_distances(
        spec.model.value, charts_of(zs), zs.coord)]
    for k in (1, 2, 5, 23):
        got = k_smallest(zs, k)
        assert got.shape == (k,)
        assert np.allclose(got, ref[:k], rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        k_smallest(zs, 0)
    m = len(zs)
    with pytest.raises(ValueError):
        k_smallest(zs, m * (m - 1) // 2 + 1)


def test_marks_are_fair_coin_over_endpoints():
    spec = EnsembleSpec.su2(64)
    zs = compute_zeros(sample_section(spec, trial_stream(34, 0)))
    n_draws = 4000
    first = 0
    for t in range(n_draws):
        ev = pair_events(zs, 3.0, trial_stream(35, t))
        assert ev, "threshold 3 should produce at least one event here"
        e = ev[0]
        assert e.mark in (zs.point(e.i), zs.point(e.j))
        first += e.mark == zs.point(e.i)
    freq = first / n_draws
    assert abs(freq - 0.5) < 4.0 * 0.5 / math.sqrt(n_draws)


def test_marks_deterministic_given_stream():
    spec = EnsembleSpec.gef(6.0)
    zs = compute_zeros(sample_section(spec, trial_stream(36, 0)))
    a = pair_events(zs, 8.0, trial_stream(37, 5))
    b = pair_events(zs, 8.0, trial_stream(37, 5))
    assert a == b


def synthetic_torus_zeroset(coords):
    n = 10**6  # large degree: isolation radius 4 log^2(n)/sqrt(n) ~ 0.76
    spec = EnsembleSpec.torus(n)
    c = np.asarray(coords, np.complex128)
    return ZeroSet(spec, np.zeros(c.size, np.uint8), c,
                   np.zeros(c.size), 0)


def ev(i, j, zs, x=0.0):
    return PairEvent(i, j, x, zs.point(i), 0.0)


def test_filter_drops_both_events_sharing_a_zero():
    zs = synthetic_torus_zeroset([0.1 + 0.1j, 0.1 + 0.1001j, 0.1001 + 0.1j,
                                  0.6 + 0.6j, 0.6 + 0.6001j])
    events = [ev(0, 1, zs), ev(0, 2, zs), ev(3, 4, zs)]
    kept = filter_isolated(events, zs, zs.spec.n)
    # events 0 and 1 share zero 0 -> distance zero -> both dropped; the far
    # pair (3,4) is isolated and survives
    assert kept == [events[2]]


def test_filter_thresholds_at_the_stated_radius():
    n = 10**6
    thr = 4.0 * math.log(n) ** 2 / math.sqrt(n)
    base = 0.1 + 0.1j
    for gap, survive in ((thr / math.sqrt(math.pi) * 1.05, True),
                         (thr / math.sqrt(math.pi) * 0.95, False)):
        zs = synthetic_torus_zeroset([base, base + 0.0001j,
                                      base + gap, base + gap + 0.0001j])
        events = [ev(0, 1, zs), ev(2, 3, zs)]
        kept = filter_isolated(events, zs, n)
        assert (len(kept) == 2) == survive
        if not survive:
            assert kept == []


def test_filter_keeps_singleton():
    zs = synthetic_torus_zeroset([0.2 + 0.2j, 0.2 + 0.2001j])
    events = [ev(0, 1, zs)]
    assert filter_isolated(events, zs, zs.spec.n) == events


def test_collect_trial_record_shape_and_determinism():
    spec = EnsembleSpec.su2(64)
    cfg = TrialConfig(thresholds=(1.0, 2.5), kmax=3,
                      regions=("all", "hemisphere"))
    zs = compute_zeros(sample_section(spec, trial_stream(38, 0)))
    rec = collect_trial(zs, cfg, trial_stream(39, 0), seed=(38, 0))
    rec2 = collect_trial(zs, cfg, trial_stream(39, 0), seed=(38, 0))
    assert np.array_equal(rec.sigma, rec2.sigma)
    assert rec.counts == rec2.counts and rec.marks == rec2.marks
    assert rec.seed == (38, 0)
    # law-rescaled distances: (1/8)^(1/4) * n^(3/4) * raw, ascending
    resc = rescale_factor(spec)
    dk = k_smallest(zs, 3)
    assert np.array_equal(rec.sigma, EIGHTH_ROOT * resc * dk)
    assert np.all(np.diff(rec.sigma) >= 0)
    assert len(rec.marks) == 3
    # counts agree with an independent pass over the events
    for a in cfg.thresholds:
        evs = pair_events(zs, a, trial_stream(40, 0))
        assert rec.counts[(a, "all")] == len(evs)
        assert rec.counts[(a, "hemisphere")] <= rec.counts[(a, "all")]
        assert rec.isolated[a] <= rec.counts[(a, "all")]


def test_collect_trial_gef_has_no_isolation_counts():
    spec = EnsembleSpec.gef(5.0)
    zs = compute_zeros(sample_section(spec, trial_stream(41, 0)))
    rec = collect_trial(zs, TrialConfig(thresholds=(1.5,), kmax=2,
                                        regions=("all", "half_disk")),
                        trial_stream(42, 0))
    assert rec.isolated == {}
    assert set(rec.counts) == {(1.5, "all"), (1.5, "half_disk")}


def test_trial_config_validation():
    with pytest.raises(ValueError):
        TrialConfig(thresholds=())
    with pytest.raises(ValueError):
        TrialConfig(thresholds=(0.0,))
    with pytest.raises(ValueError):
        TrialConfig(kmax=0)
    with pytest.raises(KeyError):
        TrialConfig(regions=("nowhere",))


def test_regions():
    with pytest.raises(KeyError):
        region("atlantis")
    assert region("all").fraction == 1.0
    hemi = region("hemisphere")
    assert hemi.fraction == 0.5
    assert hemi.contains(SurfacePoint(Chart.SPHERE_0, 0.5j))
    assert not hemi.contains(SurfacePoint(Chart.SPHERE_1, 0.5j))
    hs = region("half_square")
    assert hs.contains(SurfacePoint(Chart.TORUS, 0.25 + 0.9j))
    assert not hs.contains(SurfacePoint(Chart.TORUS, 0.75 + 0.9j))
    hd = region("half_disk")
    assert hd.contains(SurfacePoint(Chart.PLANE, 1 - 5j))
    assert not hd.contains(SurfacePoint(Chart.PLANE, -1 + 5j))
    assert set(REGIONS) == {"all", "hemisphere", "half_square", "half_disk"}


def test_pair_events_requires_positive_threshold():
    zs = compute_zeros(sample_section(EnsembleSpec.su2(8), trial_stream(43, 0)))
    with pytest.raises(ValueError):
        pair_events(zs, 0.0, trial_stream(43, 1))
