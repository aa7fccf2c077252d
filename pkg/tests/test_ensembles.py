import math

import mpmath
import numpy as np
import pytest

import oracles
from gafzeros.ensembles import (EnsembleSpec, EvaluationOverflow, Model,
                                NonFiniteKernel, default_gef_truncation,
                                evaluate_raw, evaluate_weighted, kernel_jet,
                                sample_section, section_from_coefficients)
from gafzeros.rng import trial_stream


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(Model.SU2)
    with pytest.raises(ValueError):
        EnsembleSpec(Model.SU2, n=0)
    with pytest.raises(ValueError):
        EnsembleSpec(Model.SU2, n=4, radius=2.0)
    with pytest.raises(ValueError):
        EnsembleSpec(Model.GEF)
    with pytest.raises(ValueError):
        EnsembleSpec(Model.GEF, radius=3.0, n=5)
    with pytest.raises(ValueError):
        EnsembleSpec.gef(5.0, truncation=20)  # below R^2
    assert EnsembleSpec.su2(8).basis_size == 9
    assert EnsembleSpec.torus(8).basis_size == 8
    assert EnsembleSpec.gef(2.0).basis_size == default_gef_truncation(2.0) + 1


def test_sampler_consumes_fixed_stream_budget():
    spec = EnsembleSpec.su2(12)
    s1 = trial_stream(11, 0)
    sample_section(spec, s1)
    after = s1.random()
    s2 = trial_stream(11, 0)
    s2.standard_normal(2 * spec.basis_size)
    assert after == s2.random()


def test_coefficients_are_standard_complex_gaussians():
    spec = EnsembleSpec.torus(16)
    draws = np.concatenate(
        [sample_section(spec, trial_stream(3, i)).coeffs for i in range(800)])
    # E|b|^2 = 1 and E b^2 = 0 within 5 standard errors
    m = draws.size
    assert abs(np.mean(np.abs(draws) ** 2) - 1.0) < 5.0 / math.sqrt(m)
    assert abs(np.mean(draws**2)) < 5.0 / math.sqrt(m)


def test_su2_scaled_matches_binomial_oracle():
    rng = np.random.default_rng(7)
    n = 60
    b = (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)) / np.sqrt(2)
    sec = section_from_coefficients(EnsembleSpec.su2(n), b)
    assert np.max(np.abs(sec.scaled)) == pytest.approx(1.0, rel=1e-12)
    ref = oracles.su2_weighted_coeffs(b, n)
    ratio = sec.scaled[np.abs(ref) > 1e-12] / ref[np.abs(ref) > 1e-12]
    assert np.allclose(ratio, ratio[0], rtol=1e-10)


def test_gef_scaled_matches_direct_formula():
    rng = np.random.default_rng(8)
    spec = EnsembleSpec.gef(1.5)
    b = rng.standard_normal(spec.basis_size) + 0j
    sec = section_from_coefficients(spec, b)
    for j in (0, 1, 5, 17):
        want = b[j] * spec.radius**j / math.sqrt(math.factorial(j))
        assert sec.scaled[j] == pytest.approx(want, rel=1e-12)


def test_su2_evaluate_against_direct_sum():
    rng = np.random.default_rng(9)
    n = 10
    spec = EnsembleSpec.su2(n)
    b = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    sec = section_from_coefficients(spec, b)
    for z in (0.3 + 0.1j, -0.8j, 0.99 + 0.01j):
        direct = sum(
            b[j] * math.sqrt((n + 1) / math.pi) * math.sqrt(math.comb(n, j)) * z**j
            for j in range(n + 1))
        assert evaluate_raw(sec, z) == pytest.approx(direct, rel=1e-11)
        want_w = direct * (1 + abs(z) ** 2) ** (-n / 2)
        assert evaluate_weighted(sec, z) == pytest.approx(want_w, rel=1e-11)


def test_gef_evaluate_against_direct_sum():
    rng = np.random.default_rng(10)
    spec = EnsembleSpec.gef(1.5)
    b = rng.standard_normal(spec.basis_size) + 1j * rng.standard_normal(spec.basis_size)
    sec = section_from_coefficients(spec, b)
    for z in (0.2 - 0.4j, 1.4 + 0.1j):
        direct = sum(b[j] * z**j / math.sqrt(math.factorial(j))
                     for j in range(spec.basis_size))
        assert evaluate_raw(sec, z) == pytest.approx(direct, rel=1e-11)
        assert evaluate_weighted(sec, z) == pytest.approx(
            direct * math.exp(-0.5 * abs(z) ** 2), rel=1e-11)


def test_torus_evaluate_against_theta_series_oracle():
    rng = np.random.default_rng(11)
    n = 4
    spec = EnsembleSpec.torus(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    sec = section_from_coefficients(spec, b)
    const = (2.0 * n) ** 0.25 / math.sqrt(math.pi)
    for z in (0.13 + 0.22j, 0.91 + 0.77j, 0.5 + 0.0j):
        want = const * oracles.theta_section_value(b, n, z)
        assert evaluate_weighted(sec, z) == pytest.approx(want, rel=1e-10)


def test_gef_overflow_raises():
    spec = EnsembleSpec.gef(1.5)
    sec = section_from_coefficients(spec, np.ones(spec.basis_size))
    with pytest.raises(EvaluationOverflow):
        evaluate_raw(sec, 1e12 + 0j)


@pytest.mark.parametrize("model", ["su2", "torus", "gef"])
def test_empirical_covariance_matches_kernel(model):
    # the sampler and the closed-form kernel are independent derivations of
    # the same ensemble; Monte Carlo ties them together
    if model == "su2":
        spec, pairs = EnsembleSpec.su2(6), [(0.3 + 0.2j, 0.1 - 0.3j), (0.5j, 0.5j)]
    elif model == "torus":
        spec, pairs = EnsembleSpec.torus(4), [(0.2 + 0.3j, 0.4 + 0.5j), (0.7 + 0.6j, 0.7 + 0.6j)]
    else:
        spec, pairs = EnsembleSpec.gef(1.5), [(0.4 + 0.1j, 0.9 - 0.2j), (1.0 + 0j, 1.0 + 0j)]
    nsamp = 20000
    vals = np.empty((nsamp, 2 * len(pairs)), dtype=np.complex128)
    for t in range(nsamp):
        sec = sample_section(spec, trial_stream(101, t))
        for pi_, (z, w) in enumerate(pairs):
            vals[t, 2 * pi_] = evaluate_weighted(sec, z)
            vals[t, 2 * pi_ + 1] = evaluate_weighted(sec, w)
    scale = math.pi if model == "gef" else 1.0  # planar kernel carries 1/pi
    for pi_, (z, w) in enumerate(pairs):
        want = scale * kernel_jet(spec, z, w, weighted=True).K
        got = np.mean(vals[:, 2 * pi_] * np.conj(vals[:, 2 * pi_ + 1]))
        sd = np.std(vals[:, 2 * pi_] * np.conj(vals[:, 2 * pi_ + 1])) / math.sqrt(nsamp)
        assert abs(got - want) < 6.0 * max(sd, 1e-3 * abs(want))


@pytest.mark.parametrize("model", ["su2", "torus", "gef"])
@pytest.mark.parametrize("weighted", [False, True])
def test_jet_derivatives_match_finite_differences(model, weighted):
    if model == "su2":
        spec, z, w = EnsembleSpec.su2(12), 0.31 + 0.17j, 0.05 - 0.23j
    elif model == "torus":
        spec, z, w = EnsembleSpec.torus(6), 0.31 + 0.17j, 0.45 + 0.43j
    else:
        spec, z, w = EnsembleSpec.gef(3.0), 0.31 + 0.17j, 0.05 - 0.23j
    h = 1e-5

    def K(zz, ww):
        return kernel_jet(spec, zz, ww, weighted=weighted).K

    jet = kernel_jet(spec, z, w, weighted=weighted)
    # Wirtinger derivatives via central differences in both real directions
    kx = (K(z + h, w) - K(z - h, w)) / (2 * h)
    ky = (K(z + 1j * h, w) - K(z - 1j * h, w)) / (2 * h)
    dz_fd = 0.5 * (kx - 1j * ky)
    lx = (K(z, w + h) - K(z, w - h)) / (2 * h)
    ly = (K(z, w + 1j * h) - K(z, w - 1j * h)) / (2 * h)
    dwb_fd = 0.5 * (lx + 1j * ly)
    scale = max(abs(jet.K), 1.0)
    assert abs(jet.dK_dz - dz_fd) < 2e-8 * max(abs(jet.dK_dz), scale)
    assert abs(jet.dK_dwbar - dwb_fd) < 2e-8 * max(abs(jet.dK_dwbar), scale)

    def dwb(zz):
        return kernel_jet(spec, zz, w, weighted=weighted).dK_dwbar

    mx = (dwb(z + h) - dwb(z - h)) / (2 * h)
    my = (dwb(z + 1j * h) - dwb(z - 1j * h)) / (2 * h)
    d2_fd = 0.5 * (mx - 1j * my)
    assert abs(jet.d2K_dzdwbar - d2_fd) < 2e-7 * max(abs(jet.d2K_dzdwbar), scale)


def test_su2_weighted_diagonal_is_constant():
    for n in (1, 16, 512, 4096):
        spec = EnsembleSpec.su2(n)
        for z in (0j, 0.7 - 0.2j, 50.0 + 12.0j):
            k = kernel_jet(spec, z, z, weighted=True).K
            assert k.real == pytest.approx((n + 1) / math.pi, rel=1e-12)
            assert abs(k.imag) < 1e-12 * k.real


def test_gef_weighted_diagonal_is_constant():
    spec = EnsembleSpec.gef(10.0)
    for z in (0j, 3 + 4j, 9.9j):
        k = kernel_jet(spec, z, z, weighted=True).K
        assert k.real == pytest.approx(1.0 / math.pi, rel=1e-13)


def test_torus_weighted_kernel_lattice_symmetries():
    n = 8
    spec = EnsembleSpec.torus(n)
    z, w = 0.23 + 0.37j, 0.61 + 0.15j
    base = abs(kernel_jet(spec, z, w, weighted=True).K)
    # full-lattice translations leave the weighted kernel magnitude fixed
    for t in (1.0, 1j, 1 + 1j):
        assert abs(kernel_jet(spec, z + t, w + t, weighted=True).K) == \
            pytest.approx(base, rel=1e-10)
    # so do translations on the 1/n sublattice (the exact symmetry used
    # for conditioning elsewhere)
    for t in (3.0 / n, (5j) / n, (2 + 7j) / n):
        assert abs(kernel_jet(spec, z + t, w + t, weighted=True).K) == \
            pytest.approx(base, rel=1e-10)


def test_unweighted_kernels_overflow_loudly():
    with pytest.raises(NonFiniteKernel):
        kernel_jet(EnsembleSpec.su2(512), 5.0 + 0j, 5.0 + 0j, weighted=False)
    with pytest.raises(NonFiniteKernel):
        kernel_jet(EnsembleSpec.torus(512), 0.9j, 0.9j, weighted=False)
    # the weighted forms stay finite at the same arguments
    kernel_jet(EnsembleSpec.su2(512), 5.0 + 0j, 5.0 + 0j, weighted=True)
    kernel_jet(EnsembleSpec.torus(512), 0.9j, 0.9j, weighted=True)


def test_truncation_tail_bound():
    # dropped weighted-kernel mass sum_{j>J} e^{-R^2} R^(2j)/j! on the rim
    for radius in (2.0, 4.0, 8.0, 12.0, 16.0):
        J = default_gef_truncation(radius)
        with mpmath.workdps(60):
            r2 = mpmath.mpf(radius) ** 2
            tail = mpmath.mpf(0)
            for j in range(J + 1, J + 400):
                tail += r2**j / mpmath.factorial(j)
            tail *= mpmath.e ** (-r2)
            assert tail < mpmath.mpf("1e-20")


def test_weighted_su2_kernel_approaches_planar_limit():
    # rescaled weighted kernel converges to the planar one as n grows
    u, v = 0.3 + 0j, 0.1j
    for n, tol in ((256, 6e-3), (4096, 4e-4)):
        got = kernel_jet(EnsembleSpec.su2(n), u / math.sqrt(n),
                         v / math.sqrt(n), weighted=True).K / n
        want = kernel_jet(EnsembleSpec.gef(3.0), u, v, weighted=True).K
        assert abs(got - want) < tol * abs(want)
