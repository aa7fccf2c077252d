"""Complete zero sets of sampled sections.

Sphere and plane sections are polynomials (the plane model after truncation),
solved by simultaneous Aberth-Ehrlich iteration. Torus sections are entire
but not polynomial; their zeros are located by recursive cell subdivision
with boundary winding counts and finished by Newton iteration. Every zero
set is validated by residuals and exact counts before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import _poly, _theta
from .ensembles import EnsembleSpec, Model, RandomSection
from .geometry import Chart, SurfacePoint


class RootFindError(RuntimeError):
    """Root finding failed to reach its accuracy target."""


class ZeroCountError(RootFindError):
    """The located zeros do not account for the known total count."""


@dataclass(frozen=True)
class PolyRoots:
    """All roots of one polynomial with per-root relative residuals."""

    roots: np.ndarray
    residuals: np.ndarray
    iterations: int


def roots_polynomial(coeffs, max_iterations: int = 500,
                     residual_target: float = 1e-12) -> PolyRoots:
    """All roots of sum_j c_j z^j, ascending coefficients.

    Exact zero coefficients at the ends are handled structurally: trailing
    zeros lower the effective degree, leading zeros become exact roots at the
    origin. Each returned root r satisfies
    |p(r)| / sum_j |c_j| |r|^j <= residual_target; otherwise RootFindError
    carries the worst offender.
    """
    c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need a coefficient vector of degree >= 1")
    if not np.all(np.isfinite(c.view(np.float64))):
        raise ValueError("coefficients must be finite")
    last = c.size - 1
    while last > 0 and c[last] == 0:
        last -= 1
    if last == 0:
        raise ValueError("zero or constant polynomial has no finite root set")
    c = c[: last + 1]
    first = 0
    while c[first] == 0:
        first += 1
    core = c[first:]
    if core.size == 1:
        roots = np.zeros(first, np.complex128)
        resid = np.zeros(first)
        iters = 0
    else:
        r, rs, iters = _poly.aberth(core, max_iterations)
        roots = np.concatenate([np.zeros(first, np.complex128), r])
        resid = np.concatenate([np.zeros(first), rs])
    worst = float(resid.max())
    if worst > residual_target:
        nbad = int(np.count_nonzero(resid > residual_target))
        raise RootFindError(
            f"{nbad} of {roots.size} roots above residual target "
            f"{residual_target:g}; worst {worst:.3e} after {iters} iterations")
    return PolyRoots(roots, resid, iters)


_BASE_CHART = {Model.SU2: Chart.SPHERE_0, Model.TORUS: Chart.TORUS,
               Model.GEF: Chart.PLANE}


@dataclass(frozen=True)
class ZeroSet:
    """Validated zeros of one sampled section.

    chart[i] is 0 for the model's base chart and 1 for the inverted sphere
    chart; coord[i] is the complex coordinate in that chart. residuals are
    relative to max|coefficients| times the local basis scale. For the plane
    model, `boundary` holds zeros of the truncated series just outside the
    kept disk (radius R to R + 1/R); they are diagnostics, not members.
    """

    spec: EnsembleSpec
    chart: np.ndarray
    coord: np.ndarray
    residuals: np.ndarray
    iterations: int
    boundary: np.ndarray = field(default_factory=lambda: np.empty(0, np.complex128))

    def __len__(self) -> int:
        return int(self.coord.size)

    def point(self, i: int) -> SurfacePoint:
        ch = Chart.SPHERE_1 if self.chart[i] == 1 else _BASE_CHART[self.spec.model]
        return SurfacePoint(ch, complex(self.coord[i]))

    def points(self) -> list[SurfacePoint]:
        return [self.point(i) for i in range(len(self))]


def zeros_su2(section: RandomSection) -> ZeroSet:
    """All n zeros of a sphere section, each in its well-conditioned chart.

    Roots with |z| <= 1 are reported in the base chart; the rest are reported
    in the inverted chart at 1/z, where their residual equals the relative
    residual of the coefficient-reversed polynomial. Zero leading/trailing
    coefficients give exact zeros at the chart origins.
    """
    spec = section.spec
    if spec.model is not Model.SU2:
        raise ValueError("section is not a sphere section")
    n = spec.n
    pr = roots_polynomial(section.scaled)
    inf_mult = n - pr.roots.size
    chart = np.zeros(n, np.uint8)
    coord = np.empty(n, np.complex128)
    resid = np.zeros(n)
    inner = np.abs(pr.roots) <= 1.0
    k = 0
    for z, rs, inside in zip(pr.roots, pr.residuals, inner):
        if inside:
            chart[k] = 0
            coord[k] = z
        else:
            chart[k] = 1
            coord[k] = 1.0 / z
        resid[k] = rs
        k += 1
    for _ in range(inf_mult):
        chart[k] = 1
        coord[k] = 0.0
        k += 1
    if k != n:
        raise ZeroCountError(f"expected {n} sphere zeros, assembled {k}")
    return ZeroSet(spec, chart, coord, resid, pr.iterations)


def zeros_gef(section: RandomSection) -> ZeroSet:
    """Zeros of the truncated plane section inside the disk of radius R.

    The solve runs in the rescaled variable z/R, whose coefficients stay in
    double range. Roots just outside the disk (|z| in (R, R+1/R]) are kept as
    boundary diagnostics; farther roots are truncation artifacts of the
    polynomial tail and are discarded.
    """
    spec = section.spec
    if spec.model is not Model.GEF:
        raise ValueError("section is not a plane section")
    R = spec.radius
    pr = roots_polynomial(section.scaled)
    z = R * pr.roots
    az = np.abs(z)
    keep = az <= R
    ring = (az > R) & (az <= R + 1.0 / R)
    resid = pr.residuals[keep]
    if resid.size and float(resid.max()) > 1e-10:
        raise RootFindError(f"kept plane zero residual {resid.max():.3e} > 1e-10")
    return ZeroSet(spec, np.zeros(int(keep.sum()), np.uint8), z[keep],
                   resid, pr.iterations, boundary=z[ring])


# winding search controls; offsets are deterministic and irrational-flavored
# so a retry never lands cell boundaries back on the same zero
_JITTERS = ((0.0, 0.0), (0.0137313, 0.0071113), (0.0319479, 0.0211371),
            (0.0473101, 0.0367747), (0.0607927, 0.0521341),
            (0.0761253, 0.0673007), (0.0902531, 0.0817359),
            (0.1049287, 0.0961111), (0.1193771, 0.1109383))
_SPLITS = ((0.5, 0.5), (0.53125, 0.46875), (0.4609375, 0.5390625),
           (0.515625, 0.484375))
_HALF_PI = 0.5 * np.pi


def _winding(b, n, x0, y0, sx, sy):
    """Integer winding for one cell, or None when it cannot be trusted."""
    for crit, cap in ((_HALF_PI, 46), (0.5 * _HALF_PI, 50)):
        w, status = _theta.cell_winding(b, n, x0, y0, sx, sy, crit, cap)
        if status != 0:
            continue
        r = int(round(w))
        if abs(w - r) <= 0.02:
            return r
    return None


def _torus_grid_attempt(b, n, bmax):
    """Fast path: modulus-grid minima, Newton, then a winding certificate.

    The weighted log-modulus is superharmonic away from zeros, so every
    local minimum of |F| on a fine enough grid marks a zero basin. When the
    polished zeros are distinct, n in number, and the winding around the
    whole square is n, the set is complete: no further search is needed.
    Returns None when any of that fails (close pairs sharing a basin), in
    which case the subdivision search takes over.
    """
    G = max(24, int(np.ceil(5.0 * np.sqrt(n))))
    vals = np.empty((G, G), np.complex128)
    for iy in range(G):
        vals[iy] = _theta.x_edge_values(b, n, 0.0, iy / G, 1.0 / G, G, 0)
    A = np.abs(vals)
    mins = np.ones((G, G), bool)
    for sy, sx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        mins &= A <= np.roll(A, (sy, sx), axis=(0, 1))
    xs: list[float] = []
    ys: list[float] = []
    rs: list[float] = []
    iters = 0

    def _polish(iy, ix, max_steps):
        nonlocal iters
        X, Y, rel, steps, ok = _theta.newton_zero(
            b, n, ix / G, iy / G, 6.0 / G, max_steps, 1e-13, bmax)
        iters += steps
        if ok and rel <= 1e-10:
            xs.append(X % 1.0)
            ys.append(Y % 1.0)
            rs.append(rel)

    for iy, ix in np.argwhere(mins):
        _polish(iy, ix, 60)
    if not xs:
        return None
    # |F| grows linearly off a zero, so the grid cell nearest each zero sits
    # well below the field's median level. Low cells not sitting on a zero
    # already found mark basins whose discrete minimum fell on a ridge cell
    # shared with a deeper neighbor basin (typically a close pair); polishing
    # from them, from several angles, recovers the swallowed member.
    x = np.array(xs)
    y = np.array(ys)
    low = np.argwhere(A < 0.5 * np.median(A))
    if low.size:
        cx = low[:, 1] / G
        cy = low[:, 0] / G
        dx = np.abs(cx[:, None] - x[None, :])
        dy = np.abs(cy[:, None] - y[None, :])
        dx = np.minimum(dx, 1.0 - dx)
        dy = np.minimum(dy, 1.0 - dy)
        orphan = np.hypot(dx, dy).min(axis=1) > 0.9 / G
        for iy, ix in low[orphan]:
            _polish(iy, ix, 25)
    x = np.array(xs)
    y = np.array(ys)
    dx = np.abs(x[:, None] - x[None, :])
    dy = np.abs(y[:, None] - y[None, :])
    dx = np.minimum(dx, 1.0 - dx)
    dy = np.minimum(dy, 1.0 - dy)
    idx = np.arange(x.size)
    dup = (np.hypot(dx, dy) < 1e-7) & (idx[:, None] < idx[None, :])
    keep = ~dup.any(axis=1)
    if int(keep.sum()) != n:
        return None
    wind = None
    for ox, oy in _JITTERS:
        wind = _winding(b, n, ox, oy, 1.0, 1.0)
        if wind is not None:
            break
    if wind != n:
        return None
    return (x[keep] + 1j * y[keep]), np.array(rs)[keep], iters


def _torus_attempt(b, n, bmax, ox, oy):
    """One jitter attempt of the subdivision search; None means retry."""
    newton_size = 2.0 / np.sqrt(n)
    top = _winding(b, n, ox, oy, 1.0, 1.0)
    if top != n:
        return None
    stack = [(ox, oy, 1.0, 1.0, n)]
    xs: list[float] = []
    ys: list[float] = []
    rs: list[float] = []
    iters = 0
    while stack:
        x0, y0, sx, sy, w = stack.pop()
        size = max(sx, sy)
        if w == 1 and size <= newton_size:
            X, Y, rel, steps, ok = _theta.newton_zero(
                b, n, x0 + 0.5 * sx, y0 + 0.5 * sy, 3.0 * size, 60, 1e-13, bmax)
            iters += steps
            m = 1e-9 * size
            if (ok and rel <= 1e-10 and x0 - m <= X <= x0 + sx + m
                    and y0 - m <= Y <= y0 + sy + m):
                xs.append(X)
                ys.append(Y)
                rs.append(rel)
                continue
        if size < 1e-7:
            # a cluster that never separated: accept only a genuine
            # near-multiple zero, where the value itself vanishes
            cx = x0 + 0.5 * sx
            cy = y0 + 0.5 * sy
            rel = abs(_theta.point_value(b, n, cx, cy, 0)) / bmax
            if rel <= 1e-10:
                for _ in range(w):
                    xs.append(cx)
                    ys.append(cy)
                    rs.append(rel)
                continue
            return None
        placed = False
        for fx, fy in _SPLITS:
            mx = x0 + fx * sx
            my = y0 + fy * sy
            quads = ((x0, y0, fx * sx, fy * sy),
                     (mx, y0, (1.0 - fx) * sx, fy * sy),
                     (x0, my, fx * sx, (1.0 - fy) * sy),
                     (mx, my, (1.0 - fx) * sx, (1.0 - fy) * sy))
            ws = [_winding(b, n, *q) for q in quads]
            if any(v is None for v in ws) or sum(ws) != w:
                continue
            for q, wq in zip(quads, ws):
                if wq > 0:
                    stack.append((*q, wq))
            placed = True
            break
        if not placed:
            return None
    if len(xs) != n:
        return None
    x = np.mod(np.array(xs), 1.0)
    y = np.mod(np.array(ys), 1.0)
    # distinct search cells must have produced distinct zeros
    dx = np.abs(x[:, None] - x[None, :])
    dy = np.abs(y[:, None] - y[None, :])
    dx = np.minimum(dx, 1.0 - dx)
    dy = np.minimum(dy, 1.0 - dy)
    close = (np.hypot(dx, dy) < 1e-12).sum() - n
    if close > 0:
        return None
    return x + 1j * y, np.array(rs), iters


def zeros_torus(section: RandomSection) -> ZeroSet:
    """All n zeros of a torus section in the fundamental square.

    Cell winding numbers drive the subdivision (64 base samples per unit
    edge, refined adaptively until every phase step is below pi/2); Newton
    finishes each isolated zero. The lattice-sum evaluation is entire and
    obeys the translation laws of the basis, so jittered cells reaching
    outside the square need no special casing. A boundary passing too close
    to a zero shows up as an untrustworthy winding and triggers a jittered
    retry, up to 8 times.
    """
    spec = section.spec
    if spec.model is not Model.TORUS:
        raise ValueError("section is not a torus section")
    n = spec.n
    b = section.coeffs
    bmax = float(np.abs(b).max())
    if bmax == 0.0:
        raise ValueError("zero section")
    out = _torus_grid_attempt(b, n, bmax)
    if out is not None:
        coord, resid, iters = out
        return ZeroSet(spec, np.zeros(n, np.uint8), coord, resid, iters)
    for ox, oy in _JITTERS:
        out = _torus_attempt(b, n, bmax, ox, oy)
        if out is not None:
            coord, resid, iters = out
            return ZeroSet(spec, np.zeros(n, np.uint8), coord, resid, iters)
    raise ZeroCountError(
        f"torus zero search failed to localize all {n} zeros "
        f"after {len(_JITTERS)} jittered attempts")


def compute_zeros(section: RandomSection) -> ZeroSet:
    """Zero set of a sampled section, dispatched on its model."""
    model = section.spec.model
    if model is Model.SU2:
        return zeros_su2(section)
    if model is Model.TORUS:
        return zeros_torus(section)
    return zeros_gef(section)


def _rel_residual_poly(c: np.ndarray, pts: np.ndarray) -> np.ndarray:
    if pts.size == 0:
        return np.zeros(0)
    p = np.abs(npoly.polyval(pts, c))
    s = npoly.polyval(np.abs(pts), np.abs(c))
    return p / np.where(s == 0.0, 1.0, s)


def verify_zeroset(section: RandomSection, zs: ZeroSet) -> dict:
    """Independent validation of a zero set.

    Recomputes every residual from the coefficients (not from solver state),
    checks the exact count where one is known, and for the torus recounts the
    total winding over the fundamental square. Returns a report dict with an
    overall `ok` flag and the worst offender.
    """
    spec = section.spec
    model = spec.model
    if model is Model.SU2:
        c = section.scaled
        z0 = zs.coord[zs.chart == 0]
        z1 = zs.coord[zs.chart == 1]
        resid = np.concatenate([
            _rel_residual_poly(c, z0), _rel_residual_poly(c[::-1], z1)])
        count_ok = len(zs) == spec.n
        expected = spec.n
    elif model is Model.GEF:
        zeta = zs.coord / spec.radius
        resid = _rel_residual_poly(section.scaled, zeta)
        count_ok = bool(np.all(np.abs(zs.coord) <= spec.radius)
                        and np.all(zs.chart == 0))
        expected = len(zs)
    else:
        b = section.coeffs
        bmax = float(np.abs(b).max())
        resid = np.array([
            abs(_theta.value_scaled(b, spec.n, float(z.real), float(z.imag)))
            for z in zs.coord]) / bmax
        wind = None
        for ox, oy in _JITTERS:
            wind = _winding(b, spec.n, ox, oy, 1.0, 1.0)
            if wind is not None:
                break
        count_ok = len(zs) == spec.n and wind == spec.n
        expected = spec.n
    worst = float(resid.max()) if resid.size else 0.0
    residual_ok = worst <= 1e-10
    return {
        "count": len(zs),
        "expected": expected,
        "count_ok": count_ok,
        "max_residual": worst,
        "residual_ok": residual_ok,
        "ok": bool(count_ok and residual_ok),
    }
