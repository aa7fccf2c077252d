"""Gaussian ensembles of holomorphic sections and their covariance kernels.

Three models, one per constant-curvature surface:

- ``su2``: random degree-n polynomials sum_j b_j sqrt((n+1)/pi) sqrt(C(n,j)) z^j
  whose zeros are n points on the sphere, invariant under all rotations.
- ``torus``: random combinations of the n translated theta sections on the
  square torus, basis constant pi^(-1/2) (2n)^(1/4).
- ``gef``: the Gaussian entire function sum_j b_j z^j / sqrt(j!), truncated at
  degree J and observed on the disk of radius R.

Coefficients b_j are i.i.d. standard complex Gaussians: E b = 0, E b^2 = 0,
E |b|^2 = 1. Each model also fixes a smooth positive weight e^(-n phi / 2)
(phi is the Kahler potential) under which the section becomes a bounded,
stationary-in-law random field; ``evaluate_weighted`` returns that field and
``kernel_jet`` its covariance kernel with first and mixed derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import gammaln

from . import _theta


class Model(str, Enum):
    SU2 = "su2"
    TORUS = "torus"
    GEF = "gef"


class EvaluationOverflow(ArithmeticError):
    """A requested raw value does not fit in double precision."""


class NonFiniteKernel(ArithmeticError):
    """A kernel jet entry left double range (use the weighted kernel instead)."""


def default_gef_truncation(radius: float) -> int:
    """Truncation degree with weighted-kernel tail below 1e-24 on the disk."""
    return math.ceil(radius * radius + 12.0 * radius + 20.0)


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to draw from: model plus its size parameter.

    ``n`` is the polynomial degree (su2) or the number of theta sections
    (torus). ``radius``/``truncation`` apply to the planar model only.
    """

    model: Model
    n: int | None = None
    radius: float | None = None
    truncation: int | None = None

    def __post_init__(self):
        if self.model in (Model.SU2, Model.TORUS):
            if self.n is None or self.n < 1:
                raise ValueError("compact models need a degree n >= 1")
            if self.radius is not None or self.truncation is not None:
                raise ValueError("radius/truncation are planar-model parameters")
        else:
            if self.radius is None or not (self.radius > 0):
                raise ValueError("planar model needs a radius > 0")
            if self.n is not None:
                raise ValueError("n is a compact-model parameter")
            if self.truncation is None:
                object.__setattr__(self, "truncation", default_gef_truncation(self.radius))
            if self.truncation < math.ceil(self.radius**2):
                raise ValueError("truncation below R^2 distorts the ensemble on the disk")

    @classmethod
    def su2(cls, n: int) -> "EnsembleSpec":
        return cls(Model.SU2, n=n)

    @classmethod
    def torus(cls, n: int) -> "EnsembleSpec":
        return cls(Model.TORUS, n=n)

    @classmethod
    def gef(cls, radius: float, truncation: int | None = None) -> "EnsembleSpec":
        return cls(Model.GEF, radius=float(radius), truncation=truncation)

    @property
    def basis_size(self) -> int:
        if self.model == Model.SU2:
            return self.n + 1
        if self.model == Model.TORUS:
            return self.n
        return self.truncation + 1


@dataclass(frozen=True)
class KernelJet:
    """Kernel value with its z-, conj(w)-, and mixed derivatives."""

    K: complex
    dK_dz: complex
    dK_dwbar: complex
    d2K_dzdwbar: complex


@dataclass
class RandomSection:
    """One sampled section.

    ``coeffs`` are the raw Gaussians b_j. ``scaled`` is the numerically safe
    representation actually evaluated: for su2 the coefficients
    c_j = b_j exp(lb_j - s) with lb_j = log sqrt(C(n,j)) and the recorded
    shift s = log_shift chosen so max |c_j| = 1; for gef the coefficients of
    the polynomial in z/R. Zeros are invariant under both rescalings.
    """

    spec: EnsembleSpec
    coeffs: np.ndarray
    scaled: np.ndarray | None = None
    log_shift: float = 0.0


def _su2_half_log_binomials(n: int) -> np.ndarray:
    j = np.arange(n + 1, dtype=float)
    return 0.5 * (gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0))


def section_from_coefficients(spec: EnsembleSpec, coeffs) -> RandomSection:
    """Build a section from explicit coefficients b_j (tests, replay)."""
    b = np.asarray(coeffs, dtype=np.complex128)
    if b.shape != (spec.basis_size,):
        raise ValueError(f"expected {spec.basis_size} coefficients, got {b.shape}")
    if spec.model == Model.SU2:
        lb = _su2_half_log_binomials(spec.n)
        with np.errstate(divide="ignore"):
            logmag = lb + np.log(np.abs(b))
        s = float(np.max(logmag))
        if not math.isfinite(s):  # all-zero coefficient vector (synthetic only)
            s = 0.0
        scaled = b * np.exp(lb - s)
        return RandomSection(spec, b, scaled, s)
    if spec.model == Model.GEF:
        j = np.arange(spec.truncation + 1, dtype=float)
        # coefficients of p(z/R): b_j R^j / sqrt(j!), kept in exact log form
        scaled = b * np.exp(j * math.log(spec.radius) - 0.5 * gammaln(j + 1.0))
        return RandomSection(spec, b, scaled, 0.0)
    return RandomSection(spec, b, None, 0.0)


def sample_section(spec: EnsembleSpec, stream: np.random.Generator) -> RandomSection:
    """Draw one section; consumes exactly 2*basis_size normals from the stream."""
    m = spec.basis_size
    draws = stream.standard_normal(2 * m)
    b = (draws[:m] + 1j * draws[m:]) * math.sqrt(0.5)
    return section_from_coefficients(spec, b)


def _exp_scaled(value: complex, log_factor: float) -> complex:
    """value * exp(log_factor) computed through log magnitude; raises on overflow."""
    if value == 0:
        return 0.0 + 0.0j
    logmag = math.log(abs(value)) + log_factor
    if logmag > 709.0:
        raise EvaluationOverflow(f"raw value magnitude exp({logmag:.1f})")
    mag = math.exp(logmag)
    phase = math.atan2(value.imag, value.real)
    return complex(mag * math.cos(phase), mag * math.sin(phase))


def _torus_basis_const(n: int) -> float:
    # pi^(-1/2) (2n)^(1/4)
    return (2.0 * n) ** 0.25 / math.sqrt(math.pi)


def evaluate_raw(section: RandomSection, z: complex) -> complex:
    """Unweighted section value at a chart point.

    su2 expects the |z| <= 1 chart convention (values at large |z| overflow
    by design and raise); torus expects z in the fundamental square; gef any
    z with |z| not far beyond R.
    """
    spec = section.spec
    z = complex(z)
    if spec.model == Model.SU2:
        poly = complex(npoly.polyval(z, section.scaled))
        pref = 0.5 * math.log((spec.n + 1) / math.pi)
        return _exp_scaled(poly, section.log_shift + pref)
    if spec.model == Model.TORUS:
        f = _theta.value_scaled(section.coeffs, spec.n, z.real, z.imag)
        logfac = math.pi * spec.n * z.imag * z.imag + math.log(_torus_basis_const(spec.n))
        return _exp_scaled(f, logfac)
    with np.errstate(over="ignore", invalid="ignore"):
        poly = complex(npoly.polyval(z / spec.radius, section.scaled))
    if not (math.isfinite(poly.real) and math.isfinite(poly.imag)):
        raise EvaluationOverflow("planar series value outside double range")
    return poly


def evaluate_weighted(section: RandomSection, z: complex) -> complex:
    """Section value times the weight e^(-n phi(z)/2); bounded in law.

    phi is log(1+|z|^2) (su2), 2 pi y^2 (torus), |z|^2 with n = 1 (gef).
    """
    spec = section.spec
    z = complex(z)
    if spec.model == Model.SU2:
        poly = complex(npoly.polyval(z, section.scaled))
        pref = 0.5 * math.log((spec.n + 1) / math.pi)
        logfac = section.log_shift + pref - 0.5 * spec.n * math.log1p(abs(z) ** 2)
        return _exp_scaled(poly, logfac)
    if spec.model == Model.TORUS:
        f = _theta.value_scaled(section.coeffs, spec.n, z.real, z.imag)
        return f * _torus_basis_const(spec.n)
    with np.errstate(over="ignore", invalid="ignore"):
        poly = complex(npoly.polyval(z / spec.radius, section.scaled))
    return _exp_scaled(poly, -0.5 * abs(z) ** 2)


def _clog1p(zeta: complex) -> complex:
    """log(1 + zeta) accurate for small |zeta| (real log1p on the modulus)."""
    x, y = zeta.real, zeta.imag
    return complex(0.5 * math.log1p(2.0 * x + x * x + y * y), math.atan2(y, 1.0 + x))


def _su2_jet(n: int, z: complex, w: complex, weighted: bool) -> KernelJet:
    pref = (n + 1) / math.pi
    base = _clog1p(z * w.conjugate())  # log(1 + z conj w)
    if weighted:
        wlog = -0.5 * n * (math.log1p(abs(z) ** 2) + math.log1p(abs(w) ** 2))
    else:
        wlog = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        en = np.exp(n * base + wlog)
        en1 = np.exp((n - 1) * base + wlog)
        en2 = np.exp((n - 2) * base + wlog) if n >= 2 else 0.0j
        K = pref * en
        dz = pref * n * w.conjugate() * en1
        dwb = pref * n * z * en1
        d2 = pref * (n * en1 + n * (n - 1) * z * w.conjugate() * en2)
    if weighted:
        pz = z.conjugate() / (1.0 + abs(z) ** 2)  # d phi / dz at z
        pw = w / (1.0 + abs(w) ** 2)              # d phi / d conj(w) at w
        h = 0.5 * n
        d2 = d2 - h * pz * dwb - h * pw * dz + h * h * pz * pw * K
        dz = dz - h * pz * K
        dwb = dwb - h * pw * K
    return KernelJet(complex(K), complex(dz), complex(dwb), complex(d2))


def _gef_jet(z: complex, w: complex, weighted: bool) -> KernelJet:
    wlog = -0.5 * (abs(z) ** 2 + abs(w) ** 2) if weighted else 0.0
    e = np.exp(z * w.conjugate() + wlog) / math.pi
    K = e
    dz = w.conjugate() * e
    dwb = z * e
    d2 = (1.0 + z * w.conjugate()) * e
    if weighted:
        pz = z.conjugate()
        pw = w
        d2 = d2 - 0.5 * pz * dwb - 0.5 * pw * dz + 0.25 * pz * pw * K
        dz = dz - 0.5 * pz * K
        dwb = dwb - 0.5 * pw * K
    return KernelJet(complex(K), complex(dz), complex(dwb), complex(d2))


def _torus_jet(n: int, z: complex, w: complex, weighted: bool) -> KernelJet:
    a00, a10, a01, a11 = _theta.kernel_sums(n, z.real, z.imag, w.real, w.imag)
    c2 = math.sqrt(2.0 * n) / math.pi
    pi = math.pi
    if weighted:
        yz, yw = z.imag, w.imag
        K = c2 * a00
        dz = c2 * 1j * pi * (2.0 * a10 + n * yz * a00)
        dwb = c2 * -1j * pi * (2.0 * a01 + n * yw * a00)
        d2 = c2 * pi * pi * (
            4.0 * a11 + 2.0 * n * yw * a10 + 2.0 * n * yz * a01 + n * n * yz * yw * a00
        )
        return KernelJet(complex(K), complex(dz), complex(dwb), complex(d2))
    boost = math.pi * n * (z.imag * z.imag + w.imag * w.imag)
    if boost > 700.0:
        raise NonFiniteKernel(
            "unweighted theta kernel overflows at this n and height; "
            "request the weighted jet"
        )
    x = math.exp(boost)
    return KernelJet(
        complex(c2 * a00 * x),
        complex(c2 * 2j * pi * a10 * x),
        complex(c2 * -2j * pi * a01 * x),
        complex(c2 * 4.0 * pi * pi * a11 * x),
    )


def kernel_jet(spec: EnsembleSpec, z: complex, w: complex, weighted: bool = False) -> KernelJet:
    """Covariance kernel of the section process with its first derivatives.

    Unweighted kernels: ((n+1)/pi)(1 + z conj w)^n (su2),
    sqrt(2n)/pi * sum_j theta_j(z) conj(theta_j(w)) (torus), e^(z conj w)/pi
    (gef; the 1/pi is the planar reference density, the sampled process has
    covariance pi times this). ``weighted`` multiplies by
    e^(-n(phi(z)+phi(w))/2) and differentiates through the weight, so the
    four entries are always the exact derivatives of the returned kernel.
    """
    z = complex(z)
    w = complex(w)
    if spec.model == Model.SU2:
        jet = _su2_jet(spec.n, z, w, weighted)
    elif spec.model == Model.GEF:
        jet = _gef_jet(z, w, weighted)
    else:
        jet = _torus_jet(spec.n, z, w, weighted)
    for v in (jet.K, jet.dK_dz, jet.dK_dwbar, jet.d2K_dzdwbar):
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise NonFiniteKernel("kernel jet left double range")
    return jet
