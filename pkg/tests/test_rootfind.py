import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

import oracles
from gafzeros.ensembles import EnsembleSpec, sample_section, section_from_coefficients
from gafzeros.geometry import Chart, sphere_embed
from gafzeros.rng import trial_stream
from gafzeros.rootfind import (RootFindError, ZeroSet, compute_zeros,
                               roots_polynomial, verify_zeroset, zeros_gef,
                               zeros_su2, zeros_torus)
from gafzeros._theta import value_scaled


def match_sets(a, b, tol):
    """Greedy-free one-to-one matching; asserts max pair distance <= tol."""
    a = np.asarray(a)
    b = np.asarray(b)
    assert a.shape == b.shape
    if a.ndim == 1:
        cost = np.abs(a[:, None] - b[None, :])
    else:
        cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    ri, ci = linear_sum_assignment(cost)
    worst = cost[ri, ci].max() if len(ri) else 0.0
    assert worst <= tol, f"worst matched distance {worst:.3e} > {tol:g}"


def test_cubed_linear_factor():
    # (z - 2)^3; a triple root stresses the solver's multiple-root behavior
    pr = roots_polynomial([-8.0, 12.0, -6.0, 1.0])
    assert pr.roots.size == 3
    assert np.all(np.abs(pr.roots - 2.0) < 1e-4)
    assert abs(pr.roots.mean() - 2.0) < 1e-4  # cluster is centered


def test_roots_of_unity():
    n = 17
    c = np.zeros(n + 1, np.complex128)
    c[0] = -1.0
    c[n] = 1.0
    pr = roots_polynomial(c)
    got = np.sort(np.angle(pr.roots) % (2 * math.pi))
    want = np.sort(2 * math.pi * np.arange(n) / n)
    assert np.allclose(got, want, atol=1e-12)
    assert np.allclose(np.abs(pr.roots), 1.0, atol=1e-12)


def test_random_polynomial_against_companion_matrix():
    rng = np.random.default_rng(12)
    for deg in (3, 12, 40):
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        pr = roots_polynomial(c)
        match_sets(pr.roots, oracles.companion_roots(c), 1e-7)


def test_structural_end_zeros():
    # z^2 (1+z)^2: two exact zeros at the origin, double root at -1
    pr = roots_polynomial([0.0, 0.0, 1.0, 2.0, 1.0])
    match_sets(pr.roots, np.array([0, 0, -1, -1], np.complex128), 2e-6)
    assert np.count_nonzero(pr.roots == 0) == 2  # exact, not approximate
    # trailing zeros only lower the degree
    pr2 = roots_polynomial([1.0, 2.0, 1.0, 0.0, 0.0])
    match_sets(pr2.roots, np.array([-1, -1], np.complex128), 2e-6)


def test_roots_polynomial_input_validation():
    with pytest.raises(ValueError):
        roots_polynomial([3.0])
    with pytest.raises(ValueError):
        roots_polynomial([0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        roots_polynomial([1.0, np.nan])
    with pytest.raises(ValueError):
        roots_polynomial(np.ones((2, 2)))


def embed_zeroset(zs: ZeroSet) -> np.ndarray:
    return np.array([sphere_embed(zs.point(i).chart, zs.point(i).coord)
                     for i in range(len(zs))])


def test_sphere_zeros_match_companion_oracle():
    for seed in range(6):
        spec = EnsembleSpec.su2(40)
        sec = sample_section(spec, trial_stream(21, seed))
        zs = zeros_su2(sec)
        assert len(zs) == 40
        assert np.all(np.abs(zs.coord) <= 1.0 + 1e-12)  # well-conditioned charts
        ref = oracles.companion_roots(oracles.su2_weighted_coeffs(sec.coeffs, 40))
        ref_embed = np.array([oracles.embed_unit_sphere("sphere0", complex(z))
                              for z in ref])
        match_sets(embed_zeroset(zs), ref_embed, 1e-7)


def test_sphere_zeros_at_infinity():
    # vanishing top coefficients put zeros at the second chart's origin
    n = 6
    b = np.array([1.0, 0.5, -0.25, 1.0, 0.3, 0.0, 0.0], np.complex128)
    zs = zeros_su2(section_from_coefficients(EnsembleSpec.su2(n), b))
    assert len(zs) == n
    at_inf = (zs.chart == 1) & (zs.coord == 0)
    assert at_inf.sum() == 2


def test_sphere_count_is_exact_across_trials():
    spec = EnsembleSpec.su2(64)
    for seed in range(120):
        assert len(zeros_su2(sample_section(spec, trial_stream(22, seed)))) == 64


def test_plane_zeros_match_companion_oracle():
    spec = EnsembleSpec.gef(4.0)
    for seed in range(6):
        sec = sample_section(spec, trial_stream(23, seed))
        zs = zeros_gef(sec)
        assert np.all(np.abs(zs.coord) <= spec.radius + 1e-9)
        assert np.all(zs.chart == 0)
        assert np.all(zs.residuals <= 1e-10)
        ref = oracles.companion_roots(sec.scaled) * spec.radius
        ref_in = ref[np.abs(ref) <= spec.radius]
        assert len(zs) == len(ref_in)
        match_sets(np.sort_complex(zs.coord), np.sort_complex(ref_in), 1e-7)
        ring = zs.boundary
        assert np.all((np.abs(ring) > spec.radius)
                      & (np.abs(ring) <= spec.radius + 1.0 / spec.radius))


def test_torus_zeros_certified_and_small():
    for n, seeds in ((4, 6), (16, 4), (64, 2)):
        spec = EnsembleSpec.torus(n)
        for seed in range(seeds):
            sec = sample_section(spec, trial_stream(24, seed))
            zs = zeros_torus(sec)
            assert len(zs) == n
            bmax = np.abs(sec.coeffs).max()
            for z in zs.coord:
                v = abs(value_scaled(sec.coeffs, n, float(z.real), float(z.imag)))
                assert v <= 1e-9 * bmax
            # pairwise distinct
            d = np.abs(zs.coord[:, None] - zs.coord[None, :])
            np.fill_diagonal(d, 1.0)
            assert d.min() > 1e-8


def test_verify_zeroset_passes_and_detects_tampering():
    for spec in (EnsembleSpec.su2(24), EnsembleSpec.torus(9), EnsembleSpec.gef(3.0)):
        sec = sample_section(spec, trial_stream(25, 0))
        zs = compute_zeros(sec)
        rep = verify_zeroset(sec, zs)
        assert rep["ok"], rep
        assert rep["count_ok"] and rep["residual_ok"]
        bad_coord = zs.coord.copy()
        bad_coord[0] += 0.05 + 0.02j
        bad = ZeroSet(spec, zs.chart, bad_coord, zs.residuals,
                      zs.iterations, zs.boundary)
        assert not verify_zeroset(sec, bad)["ok"]


def test_compute_zeros_dispatch():
    for spec in (EnsembleSpec.su2(8), EnsembleSpec.torus(4), EnsembleSpec.gef(2.0)):
        sec = sample_section(spec, trial_stream(26, 1))
        zs = compute_zeros(sec)
        assert zs.spec is spec
        assert zs.residuals.shape == zs.coord.shape
        pts = zs.points()
        assert len(pts) == len(zs)
        if spec.model.value == "torus":
            assert all(p.chart is Chart.TORUS for p in pts)


def test_su2_rejects_wrong_model():
    sec = sample_section(EnsembleSpec.gef(2.0), trial_stream(27, 0))
    with pytest.raises(ValueError):
        zeros_su2(sec)
    with pytest.raises(ValueError):
        zeros_torus(sec)
    sec2 = sample_section(EnsembleSpec.su2(4), trial_stream(27, 1))
    with pytest.raises(ValueError):
        zeros_gef(sec2)
