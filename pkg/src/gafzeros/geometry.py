"""Charts, geodesic distances, and reference volume densities.

The three surfaces are the round sphere carrying the Fubini-Study metric
(area pi), the square flat torus C/(Z+iZ) rescaled so its Kahler form also
has total area pi, and the Euclidean plane. Every distance here is the
geodesic distance of the metric whose normalized volume form omega/pi is
the reference measure for all intensities in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ensembles import EnsembleSpec, Model

SQRT_PI = math.sqrt(math.pi)


class Chart(str, Enum):
    """Coordinate chart a point lives in."""

    SPHERE_0 = "sphere0"  # affine chart z; covers everything but z = infinity
    SPHERE_1 = "sphere1"  # inverted chart zeta = 1/z; covers everything but 0
    TORUS = "torus"       # fundamental square [0,1)^2
    PLANE = "plane"


@dataclass(frozen=True)
class SurfacePoint:
    """A point on one of the three surfaces, as (chart, complex coordinate)."""

    chart: Chart
    coord: complex

    def __post_init__(self):
        if not (math.isfinite(self.coord.real) and math.isfinite(self.coord.imag)):
            raise ValueError("non-finite coordinate")


_SPHERE_CHARTS = (Chart.SPHERE_0, Chart.SPHERE_1)

_MODEL_CHARTS = {
    Model.SU2: _SPHERE_CHARTS,
    Model.TORUS: (Chart.TORUS,),
    Model.GEF: (Chart.PLANE,),
}


def _check_point(spec: EnsembleSpec, p: SurfacePoint) -> None:
    if p.chart not in _MODEL_CHARTS[spec.model]:
        raise ValueError(f"chart {p.chart.value} does not belong to model {spec.model.value}")


def sphere_embed(chart: Chart, coord: complex) -> np.ndarray:
    """Unit-vector embedding of a sphere chart point into R^3.

    Chart 0 sends z to (2 Re z, 2 Im z, |z|^2 - 1)/(1 + |z|^2); the inverted
    chart sends zeta to the same point written without dividing by |zeta|^2,
    so zeta = 0 is the pole missing from chart 0.
    """
    x, y = coord.real, coord.imag
    r2 = x * x + y * y
    d = 1.0 + r2
    if chart == Chart.SPHERE_0:
        return np.array([2.0 * x / d, 2.0 * y / d, (r2 - 1.0) / d])
    if chart == Chart.SPHERE_1:
        return np.array([2.0 * x / d, -2.0 * y / d, (1.0 - r2) / d])
    raise ValueError("not a sphere chart")


def sphere_embed_arrays(chart: np.ndarray, coord: np.ndarray) -> np.ndarray:
    """Vectorized sphere_embed; chart is an integer array (0 or 1)."""
    x = coord.real
    y = coord.imag
    r2 = x * x + y * y
    d = 1.0 + r2
    sign = np.where(chart == 0, 1.0, -1.0)
    out = np.empty((len(coord), 3))
    out[:, 0] = 2.0 * x / d
    out[:, 1] = sign * 2.0 * y / d
    out[:, 2] = sign * (r2 - 1.0) / d
    return out


def to_sphere_chart0(p: SurfacePoint) -> complex:
    """Chart-0 coordinate of a sphere point. Rejects the point at infinity."""
    if p.chart == Chart.SPHERE_0:
        return p.coord
    if p.chart == Chart.SPHERE_1:
        if p.coord == 0:
            raise ValueError("point at infinity has no chart-0 coordinate")
        return 1.0 / p.coord
    raise ValueError("not a sphere point")


def reduce_torus(coord: complex) -> complex:
    """Representative of a torus point in the fundamental square [0,1)^2."""
    return complex(coord.real % 1.0, coord.imag % 1.0)


def _sphere_dist_vec(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # Geodesic distance on the Fubini-Study sphere is half the central angle
    # of the unit-sphere embedding; atan2 form is accurate at both ends.
    diff = np.linalg.norm(u - v, axis=-1)
    summ = np.linalg.norm(u + v, axis=-1)
    return np.arctan2(diff, summ)


def _torus_dist_flat(da: np.ndarray, db: np.ndarray) -> np.ndarray:
    # Min over the nine lattice translates of the coordinate difference;
    # inputs are already reduced to (-1, 1).
    da = np.where(da > 0.5, da - 1.0, np.where(da < -0.5, da + 1.0, da))
    db = np.where(db > 0.5, db - 1.0, np.where(db < -0.5, db + 1.0, db))
    return np.hypot(da, db)


def dist(spec: EnsembleSpec, p: SurfacePoint, q: SurfacePoint) -> float:
    """Geodesic distance between two points of the model surface.

    Sphere: arccos(|1 + z conj(w)| / sqrt((1+|z|^2)(1+|w|^2))), evaluated in
    the numerically robust embedded form, with cross-chart arguments handled
    through zeta = 1/z. Torus: sqrt(pi) times the minimum over lattice
    translates of the flat distance. Plane: |z - w|.
    """
    _check_point(spec, p)
    _check_point(spec, q)
    if spec.model == Model.SU2:
        u = sphere_embed(p.chart, p.coord)
        v = sphere_embed(q.chart, q.coord)
        return float(_sphere_dist_vec(u, v))
    if spec.model == Model.TORUS:
        a = reduce_torus(p.coord)
        b = reduce_torus(q.coord)
        return float(
            SQRT_PI
            * _torus_dist_flat(np.asarray(a.real - b.real), np.asarray(a.imag - b.imag))
        )
    return abs(p.coord - q.coord)


def dist_pairs(
    spec: EnsembleSpec,
    chart_a: np.ndarray,
    coord_a: np.ndarray,
    chart_b: np.ndarray,
    coord_b: np.ndarray,
) -> np.ndarray:
    """Vectorized dist over aligned arrays of points (hot path for pair search)."""
    if spec.model == Model.SU2:
        u = sphere_embed_arrays(chart_a, coord_a)
        v = sphere_embed_arrays(chart_b, coord_b)
        return _sphere_dist_vec(u, v)
    if spec.model == Model.TORUS:
        da = coord_a.real % 1.0 - coord_b.real % 1.0
        db = coord_a.imag % 1.0 - coord_b.imag % 1.0
        return SQRT_PI * _torus_dist_flat(da, db)
    return np.abs(coord_a - coord_b)


def volume_density(spec: EnsembleSpec, p: SurfacePoint) -> float:
    """Density of the reference measure omega/pi against chart Lebesgue measure."""
    _check_point(spec, p)
    if spec.model == Model.SU2:
        r2 = abs(p.coord) ** 2
        return 1.0 / (math.pi * (1.0 + r2) ** 2)
    if spec.model == Model.TORUS:
        return 1.0
    return 1.0 / math.pi


def rescale_factor(spec: EnsembleSpec) -> float:
    """Distance rescaling that renders the smallest-pair process order one.

    n^(3/4) for the two compact models (degree n), sqrt(R) for the planar
    model observed in the disk of radius R.
    """
    if spec.model == Model.GEF:
        return math.sqrt(spec.radius)
    return float(spec.n) ** 0.75


def diameter(spec: EnsembleSpec) -> float:
    """Largest possible geodesic distance (plane: across the observed disk)."""
    if spec.model == Model.SU2:
        return math.pi / 2.0
    if spec.model == Model.TORUS:
        return SQRT_PI * math.sqrt(0.5)
    return 2.0 * spec.radius
