"""Limit laws of near zero pairs and a k-point correlation engine.

The closed forms: the universal two-point function H, the densities and
survival functions of the k-th smallest rescaled distance, and the Poisson
intensity a^4/8 per unit normalized volume.

The numerical engine computes k-point zero correlations for any of the three
ensembles by Gaussian regression: with value covariance K, value-derivative
cross covariance B, and derivative covariance A between the k points, the
conditional derivative covariance is Lambda = A - B K^{-1} B^H and

    rho_k = perm(Lambda) / (pi^k det K * prod_a volume_density(z_a)),

the density taken against the normalized volume (omega/pi per point). Before
building matrices the points are moved by an exact symmetry of the ensemble
(a sphere rotation, a 1/n lattice translation, a plane translation) to
center them in the chart; zero statistics are invariant under these moves
and the kernel matrices stay far better conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .ensembles import EnsembleSpec, Model, kernel_jet
from .geometry import Chart, SurfacePoint, sphere_embed_arrays, volume_density


class KernelConditionError(ArithmeticError):
    """The value-covariance matrix is numerically singular.

    Raised when its condition number exceeds 1e12; widen the point
    separation (or drop near-coincident points) and retry.
    """


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def H(t: float) -> float:
    """Universal two-point function of rescaled zero separation.

    ((sinh^2 t + t^2) cosh t - 2 t sinh t) / sinh^3 t, with the small-t
    series t - (2/9) t^3 + (2/45) t^5 below t = 0.01 where the closed form
    loses about six digits to cancellation. Increases from 0 at t = 0
    (zeros repel) to 1 at infinity (independence).
    """
    if t < 0:
        raise ValueError("H is defined for t >= 0")
    if t < 0.01:
        return t - (2.0 / 9.0) * t**3 + (2.0 / 45.0) * t**5
    if t > 200.0:
        return 1.0
    sh = math.sinh(t)
    ch = math.cosh(t)
    return ((sh * sh + t * t) * ch - 2.0 * t * sh) / sh**3


def rho2_inf(z: complex, w: complex) -> float:
    """Limiting normalized 2-point function; depends only on |z - w|."""
    return H(0.5 * abs(complex(z) - complex(w)) ** 2)


def permanent(mtx) -> complex:
    """Permanent of a k x k matrix, k <= 8, by Ryser's formula.

    Subsets are visited in Gray-code order so each step updates the row
    sums by one column. Cost 2^k k; the size cap keeps misuse from
    exploding (correlation orders here never exceed 6).
    """
    A = np.asarray(mtx, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("permanent needs a square matrix")
    k = A.shape[0]
    if k == 0 or k > 8:
        raise ValueError("permanent supports sizes 1..8")
    rows = np.zeros(k, np.complex128)
    total = 0.0 + 0.0j
    parity = 0
    prev = 0
    for s in range(1, 1 << k):
        gray = s ^ (s >> 1)
        bit = gray ^ prev
        col = bit.bit_length() - 1
        if gray & bit:
            rows += A[:, col]
            parity += 1
        else:
            rows -= A[:, col]
            parity -= 1
        prev = gray
        term = complex(np.prod(rows))
        if (k - parity) % 2 == 0:
            total += term
        else:
            total -= term
    return total


@dataclass(frozen=True)
class CorrelationResult:
    """rho_k value against (omega/pi)^k, with conditioning diagnostics.

    normalization records the denominator pieces actually applied: the
    pi^k power, det K of the centered value covariance, and the per-point
    volume densities.
    """

    value: float
    cond: float
    normalization: dict


def _su2_centering(charts, coords):
    """Rotation (as an SU(2) Mobius pair a, b) sending the point cloud's
    mean direction to the base-chart origin; identity for balanced clouds."""
    v = sphere_embed_arrays(charts, coords)
    m = v.mean(axis=0)
    norm = float(np.linalg.norm(m))
    if norm < 1e-9:
        return 1.0, 0.0 + 0.0j
    X, Y, Z = (m / norm).tolist()
    # 1 - Z without cancellation on either hemisphere
    one_minus_z = (X * X + Y * Y) / (1.0 + Z) if Z > 0 else 1.0 - Z
    if one_minus_z < 1e-30:
        return 0.0, 1.0 + 0.0j
    a = math.sqrt(0.5 * one_minus_z)
    b = -complex(X, Y) / math.sqrt(2.0 * one_minus_z)
    return a, b


def _working_coords(spec: EnsembleSpec, points) -> np.ndarray:
    """Chart coordinates after the exact-symmetry centering move."""
    if spec.model is Model.SU2:
        ok = {Chart.SPHERE_0, Chart.SPHERE_1}
        if any(p.chart not in ok for p in points):
            raise ValueError("sphere correlations need sphere-chart points")
        charts = np.array([0 if p.chart is Chart.SPHERE_0 else 1
                           for p in points], np.uint8)
        coords = np.array([p.coord for p in points], np.complex128)
        a, b = _su2_centering(charts, coords)
        out = np.empty(len(points), np.complex128)
        for t, p in enumerate(points):
            z = coords[t]
            if charts[t] == 0:
                num, den = a * z + b, -np.conj(b) * z + a
            else:
                num, den = a + b * z, -np.conj(b) + a * z
            if den == 0:
                raise KernelConditionError(
                    "point maps to the chart's infinity; rotate the cloud "
                    "to one hemisphere first")
            out[t] = num / den
        return out
    if spec.model is Model.TORUS:
        if any(p.chart is not Chart.TORUS for p in points):
            raise ValueError("torus correlations need torus-chart points")
        x = np.array([p.coord.real for p in points])
        y = np.array([p.coord.imag for p in points])
        # circular means, snapped to the exact 1/n translation lattice
        n = spec.n
        mx = math.atan2(np.sin(2 * np.pi * x).mean(), np.cos(2 * np.pi * x).mean()) / (2 * np.pi)
        my = math.atan2(np.sin(2 * np.pi * y).mean(), np.cos(2 * np.pi * y).mean()) / (2 * np.pi)
        sx = round(mx * n) / n
        sy = round(my * n) / n
        rx = (x - sx + 0.5) % 1.0 - 0.5
        ry = (y - sy + 0.5) % 1.0 - 0.5
        return rx + 1j * ry
    if any(p.chart is not Chart.PLANE for p in points):
        raise ValueError("plane correlations need plane-chart points")
    coords = np.array([p.coord for p in points], np.complex128)
    return coords - coords.mean()


def _min_gap(spec: EnsembleSpec, z: np.ndarray) -> float:
    k = len(z)
    gap = math.inf
    for i in range(k):
        for j in range(i + 1, k):
            d = z[i] - z[j]
            if spec.model is Model.TORUS:
                dx = (d.real + 0.5) % 1.0 - 0.5
                dy = (d.imag + 0.5) % 1.0 - 0.5
                gap = min(gap, math.hypot(dx, dy))
            else:
                gap = min(gap, abs(d))
    return gap


def rho_k(spec: EnsembleSpec, points) -> CorrelationResult:
    """k-point correlation of the zero process against (omega/pi)^k.

    Points must be pairwise distinct (chart separation above 1e-8) and at
    most 6. Calibrated so the 1-point function is identically n for the
    compact models and identically 1 for the plane.
    """
    k = len(points)
    if not 1 <= k <= 6:
        raise ValueError("supported correlation orders are 1..6")
    z = _working_coords(spec, points)
    if k > 1 and _min_gap(spec, z) <= 1e-8:
        raise ValueError("points closer than 1e-8 in the chart; rho_k "
                         "needs pairwise distinct points")
    K = np.empty((k, k), np.complex128)
    B = np.empty((k, k), np.complex128)
    A = np.empty((k, k), np.complex128)
    for i in range(k):
        for j in range(k):
            jet = kernel_jet(spec, z[i], z[j])
            K[i, j] = jet.K
            B[i, j] = jet.dK_dz
            A[i, j] = jet.d2K_dzdwbar
    K = 0.5 * (K + K.conj().T)
    ev = np.linalg.eigvalsh(K)
    if ev[0] <= 0 or ev[-1] / ev[0] > 1e12:
        cond = math.inf if ev[0] <= 0 else ev[-1] / ev[0]
        raise KernelConditionError(
            f"value covariance condition {cond:.2e} exceeds 1e12; widen the "
            "point separation")
    cond = float(ev[-1] / ev[0])
    factor = cho_factor(K, lower=True)
    lam = A - B @ cho_solve(factor, B.conj().T)
    lam = 0.5 * (lam + lam.conj().T)
    num = permanent(lam).real
    det_k = float(np.prod(ev))
    dens = [volume_density(spec, SurfacePoint(_base_chart(spec), complex(w)))
            for w in z]
    denom = math.pi**k * det_k * math.prod(dens)
    return CorrelationResult(
        value=num / denom,
        cond=cond,
        normalization={"pi_power": math.pi**k, "det_K": det_k,
                       "volume_densities": tuple(dens)},
    )


def _base_chart(spec: EnsembleSpec) -> Chart:
    if spec.model is Model.SU2:
        return Chart.SPHERE_0
    if spec.model is Model.TORUS:
        return Chart.TORUS
    return Chart.PLANE


def rescaled_rho_k(spec: EnsembleSpec, z0: SurfacePoint, us) -> float:
    """n^{-k} rho_k at the chart points z0 + u_i / sqrt(n).

    The chart serves as the normal coordinate: the sphere anchor must be
    the base-chart origin (rotate first; statistics are rotation
    invariant), the torus anchor is arbitrary. Valid for |u| up to log^2 n,
    the window in which this converges to the universal limit.

    Units: u is a chart offset. On the sphere, the chart at the origin is
    the geodesic normal coordinate and the limit is rho_inf(u) with an
    O(1/n) defect. The torus chart is the flat unit square, a factor
    sqrt(pi) shorter than geodesic length, so the limit there is
    rho_inf(sqrt(pi) u), with an exponentially small defect.
    """
    if spec.n is None:
        raise ValueError("rescaling by degree needs a compact model")
    n = spec.n
    us = np.asarray(us, dtype=np.complex128)
    window = math.log(n) ** 2
    if np.any(np.abs(us) > window):
        raise ValueError(f"rescaled points must satisfy |u| <= log^2 n = {window:.3g}")
    if spec.model is Model.SU2:
        if z0.chart is not Chart.SPHERE_0 or abs(z0.coord) > 1e-12:
            raise ValueError("sphere rescaling is anchored at the base-chart "
                             "origin; rotate the configuration there first")
    pts = [SurfacePoint(z0.chart, complex(z0.coord + u / math.sqrt(n)))
           for u in us]
    return rho_k(spec, pts).value / float(n) ** len(pts)


def limit_density(k: int, x: float) -> float:
    """Density of the k-th smallest rescaled distance: 4x^{4k-1}e^{-x^4}/(k-1)!."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return 4.0 * x ** (4 * k - 1) * math.exp(-(x**4)) / math.factorial(k - 1)


def limit_survival(k: int, x: float) -> float:
    """P(k-th smallest rescaled distance > x) = e^{-x^4} sum_{j<k} x^{4j}/j!."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    s = sum(x ** (4 * j) / math.factorial(j) for j in range(k))
    return math.exp(-(x**4)) * s


def intensity(a: float, region_measure: float) -> float:
    """Mean number of near-pair events below threshold a with marks in a
    region of normalized volume region_measure: (a^4 / 8) region_measure."""
    if not 0.0 <= region_measure <= 1.0:
        raise ValueError("region_measure is a fraction of the total volume")
    return a**4 / 8.0 * region_measure


def ball_integral_rho2(spec: EnsembleSpec, z0: SurfacePoint,
                       radius: float) -> float:
    """Integral of rho_2(z0, w) over the geodesic ball of the given radius,
    against the normalized volume omega/pi.

    Every ensemble here is homogeneous, so the integral is computed around
    the chart origin regardless of z0. Polar quadrature: Gauss-Legendre in
    the radial chart coordinate times a periodic trapezoid rule in angle,
    with both counts doubled until the value is stable to 1e-8 relative.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if spec.model is Model.SU2:
        if radius >= 0.999 * (math.pi / 2):
            raise ValueError("radius beyond the sphere chart's reach")
        S = math.tan(radius)
    elif spec.model is Model.TORUS:
        if radius >= 0.5 * math.sqrt(math.pi):
            raise ValueError("radius beyond the torus injectivity scale")
        S = radius / math.sqrt(math.pi)
    else:
        S = radius
    chart = _base_chart(spec)
    origin = SurfacePoint(chart, 0j)

    def value(nr: int, nth: int) -> float:
        xs, ws = np.polynomial.legendre.leggauss(nr)
        rs = 0.5 * S * (xs + 1.0)
        ws = 0.5 * S * ws
        ths = 2.0 * np.pi * np.arange(nth) / nth
        total = 0.0
        for r, wr in zip(rs, ws):
            ring = 0.0
            for th in ths:
                w = complex(r * math.cos(th), r * math.sin(th))
                rho = rho_k(spec, [origin, SurfacePoint(chart, w)]).value
                ring += rho * volume_density(spec, SurfacePoint(chart, w))
            total += wr * r * ring * (2.0 * np.pi / nth)
        return total

    prev = None
    for level in range(5):
        nr = 8 << level
        cur = value(nr, nr)
        if prev is not None and abs(cur - prev) <= 1e-8 * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureError("ball integral did not stabilize to 1e-8 relative")
