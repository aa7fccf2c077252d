"""Compiled evaluation kernels for random theta sections on the square torus.

A section with coefficients b_0..b_{n-1} is
    f(z) = sum_j b_j theta_j(z),
    theta_j(z) = sum_k exp(-pi n (j/n+k)^2 + 2 pi i n (j/n+k) z).
Substituting m = j + k n turns the double sum into a single lattice sum
    f(z) = sum_m b_{m mod n} exp(-pi m^2 / n + 2 pi i m z),
and multiplying by the weight exp(-pi n y^2) (which has the same zeros and
the same phase) makes every term exp(-pi n (m/n+y)^2) exp(2 pi i m x): a
real Gaussian envelope in m times a unit phase. All routines here work with
that weighted form, so no intermediate ever leaves double range. Terms are
kept on the window pi n (m/n+y)^2 <= peak + 61, which bounds the dropped
tail below e^-60 of the largest term.
"""

from __future__ import annotations

import numpy as np
from numba import njit

PI = np.pi
_WINDOW = 61.0


@njit(cache=True)
def _window_bounds(n, y):
    w = np.sqrt(_WINDOW / (PI * n))
    mlo = int(np.ceil(n * (-y - w)))
    mhi = int(np.floor(n * (-y + w)))
    return mlo, mhi


@njit(cache=True)
def value_scaled(b, n, x, y):
    """exp(-pi n y^2) * f(x+iy)."""
    mlo, mhi = _window_bounds(n, y)
    acc = 0.0 + 0.0j
    for m in range(mlo, mhi + 1):
        t = m / n + y
        wgt = np.exp(-PI * n * t * t)
        ph = 2.0 * PI * m * x
        acc += b[m % n] * (wgt * complex(np.cos(ph), np.sin(ph)))
    return acc


@njit(cache=True)
def value_deriv_scaled(b, n, x, y):
    """(exp(-pi n y^2) f, exp(-pi n y^2) f') at x+iy; f' is d/dz."""
    mlo, mhi = _window_bounds(n, y)
    acc = 0.0 + 0.0j
    dacc = 0.0 + 0.0j
    for m in range(mlo, mhi + 1):
        t = m / n + y
        wgt = np.exp(-PI * n * t * t)
        ph = 2.0 * PI * m * x
        term = b[m % n] * (wgt * complex(np.cos(ph), np.sin(ph)))
        acc += term
        dacc += complex(0.0, 2.0 * PI * m) * term
    return acc, dacc


@njit(cache=True)
def kernel_sums(n, xz, yz, xw, yw):
    """Moment sums of the weighted theta kernel between z and w.

    Returns (a00, a10, a01, a11) where apq = sum over lattice pairs
    m' = m (mod n) of m^p m'^q Etil(z;m) conj(Etil(w;m')), with
    Etil(z;m) = exp(-pi n (m/n+y)^2) exp(2 pi i m x). Every kernel jet
    entry, weighted or not, is a linear combination of these four sums.
    """
    mlo_z, mhi_z = _window_bounds(n, yz)
    mlo_w, mhi_w = _window_bounds(n, yw)
    a00 = 0.0 + 0.0j
    a10 = 0.0 + 0.0j
    a01 = 0.0 + 0.0j
    a11 = 0.0 + 0.0j
    for m in range(mlo_z, mhi_z + 1):
        t = m / n + yz
        wz = np.exp(-PI * n * t * t)
        ph = 2.0 * PI * m * xz
        ez = wz * complex(np.cos(ph), np.sin(ph))
        lmin = int(np.ceil((mlo_w - m) / n))
        lmax = int(np.floor((mhi_w - m) / n))
        for l in range(lmin, lmax + 1):
            mp = m + l * n
            tw = mp / n + yw
            ww = np.exp(-PI * n * tw * tw)
            phw = 2.0 * PI * mp * xw
            ew = ww * complex(np.cos(phw), np.sin(phw))
            prod = ez * np.conj(ew)
            a00 += prod
            a10 += m * prod
            a01 += mp * prod
            a11 += (m * mp) * prod
    return a00, a10, a01, a11


@njit(cache=True)
def x_edge_values(b, n, x0, y, dx, count, mref):
    """Carrier-removed weighted values along a horizontal segment.

    Returns G(x0 + t dx + iy) for t = 0..count-1 where
    G(z) = exp(-2 pi i mref x) exp(-pi n y^2) f(z). The carrier factor is
    x-periodic and nonvanishing, so it changes no winding number around any
    closed cell, but removing it keeps the sampled phase slowly varying.
    """
    mlo, mhi = _window_bounds(n, y)
    nm = mhi - mlo + 1
    gam = np.empty(nm, np.complex128)
    pha = np.empty(nm, np.complex128)
    rot = np.empty(nm, np.complex128)
    for i in range(nm):
        m = mlo + i
        t = m / n + y
        wgt = np.exp(-PI * n * t * t)
        gam[i] = b[m % n] * wgt
        a0 = 2.0 * PI * (m - mref) * x0
        ar = 2.0 * PI * (m - mref) * dx
        pha[i] = complex(np.cos(a0), np.sin(a0))
        rot[i] = complex(np.cos(ar), np.sin(ar))
    out = np.empty(count, np.complex128)
    for tstep in range(count):
        acc = 0.0 + 0.0j
        for i in range(nm):
            acc += gam[i] * pha[i]
            pha[i] = pha[i] * rot[i]
        out[tstep] = acc
    return out


@njit(cache=True)
def y_edge_values(b, n, x, y0, dy, count, mref):
    """Carrier-removed weighted values along a vertical segment (x fixed)."""
    ylo = min(y0, y0 + (count - 1) * dy)
    yhi = max(y0, y0 + (count - 1) * dy)
    w = np.sqrt(_WINDOW / (PI * n))
    mlo = int(np.ceil(n * (-yhi - w)))
    mhi = int(np.floor(n * (-ylo + w)))
    nm = mhi - mlo + 1
    coef = np.empty(nm, np.complex128)
    for i in range(nm):
        m = mlo + i
        ph = 2.0 * PI * (m - mref) * x
        coef[i] = b[m % n] * complex(np.cos(ph), np.sin(ph))
    out = np.empty(count, np.complex128)
    for tstep in range(count):
        yt = y0 + tstep * dy
        alo = max(mlo, int(np.ceil(n * (-yt - w))))
        ahi = min(mhi, int(np.floor(n * (-yt + w))))
        acc = 0.0 + 0.0j
        for m in range(alo, ahi + 1):
            t = m / n + yt
            acc += coef[m - mlo] * np.exp(-PI * n * t * t)
        out[tstep] = acc
    return out


@njit(cache=True)
def point_value(b, n, x, y, mref):
    """Single carrier-removed weighted value exp(-2 pi i mref x) F(x+iy)."""
    v = value_scaled(b, n, x, y)
    ph = -2.0 * PI * mref * x
    return v * complex(np.cos(ph), np.sin(ph))


@njit(cache=True)
def _arg(v):
    return np.arctan2(v.imag, v.real)


@njit(cache=True)
def _edge_phase(b, n, mref, horizontal, ex, ey, step, nseg, crit, depth_cap):
    """Accumulated phase change of the carrier-removed value along one edge.

    The edge runs from (ex, ey), advancing x (horizontal) or y by `step` for
    `nseg` intervals. Intervals whose wrapped phase jump reaches `crit` are
    bisected recursively with single-point evaluations, so the sampling is
    dense exactly where the phase turns fast (near zeros). Returns
    (phase_sum, first_value, last_value, status) with status 0 ok, 1 a sample
    hit an exact zero, 2 refinement exhausted.
    """
    count = nseg + 1
    if horizontal:
        vals = x_edge_values(b, n, ex, ey, step, count, mref)
    else:
        vals = y_edge_values(b, n, ex, ey, step, count, mref)
    zero = 0.0 + 0.0j
    for i in range(count):
        if vals[i] == zero:
            return 0.0, zero, zero, 1
    total = 0.0
    nstk = depth_cap + 8
    sta = np.empty(nstk, np.float64)
    stb = np.empty(nstk, np.float64)
    sva = np.empty(nstk, np.complex128)
    svb = np.empty(nstk, np.complex128)
    std = np.empty(nstk, np.int64)
    for i in range(nseg):
        d = _arg(vals[i + 1] / vals[i])
        if abs(d) < crit:
            total += d
            continue
        sta[0] = i
        stb[0] = i + 1.0
        sva[0] = vals[i]
        svb[0] = vals[i + 1]
        std[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            ta = sta[sp]
            tb = stb[sp]
            va = sva[sp]
            vb = svb[sp]
            dep = std[sp]
            d2 = _arg(vb / va)
            if abs(d2) < crit:
                total += d2
                continue
            if dep >= depth_cap or sp >= nstk - 2:
                return 0.0, zero, zero, 2
            tm = 0.5 * (ta + tb)
            if horizontal:
                vm = point_value(b, n, ex + tm * step, ey, mref)
            else:
                vm = point_value(b, n, ex, ey + tm * step, mref)
            if vm == zero:
                return 0.0, zero, zero, 1
            sta[sp] = ta
            stb[sp] = tm
            sva[sp] = va
            svb[sp] = vm
            std[sp] = dep + 1
            sp += 1
            sta[sp] = tm
            stb[sp] = tb
            sva[sp] = vm
            svb[sp] = vb
            std[sp] = dep + 1
            sp += 1
    return total, vals[0], vals[count - 1], 0


@njit(cache=True)
def cell_winding(b, n, x0, y0, sx, sy, crit, depth_cap):
    """Winding number of f around the rectangle [x0,x0+sx] x [y0,y0+sy].

    Each edge is sampled with its own carrier reference (the dominant lattice
    frequency at that height), which keeps the sampled phase slowly varying.
    The carriers are exactly unwound afterwards: a carrier exp(-2 pi i m x)
    contributes -m * dx turns along an edge and the four corner junctions are
    rotated back into a common gauge, so the total is the true winding of f.
    Returns (winding, status); the winding is meaningful only for status 0.
    """
    mb = int(np.round(-n * y0))
    mt = int(np.round(-n * (y0 + sy)))
    ms = int(np.round(-n * (y0 + 0.5 * sy)))
    rtn = np.sqrt(float(n))
    segx = int(max(8.0, max(64.0 * sx, 4.5 * rtn * sx))) + 1
    segy = int(max(8.0, max(64.0 * sy, 4.5 * rtn * sy))) + 1
    p1, a1, b1, s1 = _edge_phase(b, n, mb, True, x0, y0, sx / segx, segx, crit, depth_cap)
    if s1 != 0:
        return 0.0, s1
    p2, a2, b2, s2 = _edge_phase(b, n, ms, False, x0 + sx, y0, sy / segy, segy, crit, depth_cap)
    if s2 != 0:
        return 0.0, s2
    p3, a3, b3, s3 = _edge_phase(b, n, mt, True, x0 + sx, y0 + sy, -sx / segx, segx, crit, depth_cap)
    if s3 != 0:
        return 0.0, s3
    p4, a4, b4, s4 = _edge_phase(b, n, ms, False, x0, y0 + sy, -sy / segy, segy, crit, depth_cap)
    if s4 != 0:
        return 0.0, s4
    # corner junctions, each rotated into the gauge of the outgoing edge
    xr = x0 + sx
    ph = 2.0 * PI * (ms - mb) * xr
    j1 = _arg((a2 / b1) * complex(np.cos(ph), np.sin(ph)))
    ph = 2.0 * PI * (mt - ms) * xr
    j2 = _arg((a3 / b2) * complex(np.cos(ph), np.sin(ph)))
    ph = 2.0 * PI * (ms - mt) * x0
    j3 = _arg((a4 / b3) * complex(np.cos(ph), np.sin(ph)))
    ph = 2.0 * PI * (mb - ms) * x0
    j4 = _arg((a1 / b4) * complex(np.cos(ph), np.sin(ph)))
    w = (p1 + p2 + p3 + p4 + j1 + j2 + j3 + j4) / (2.0 * PI) + (mb - mt) * sx
    return w, 0


@njit(cache=True)
def newton_zero(b, n, x0, y0, escape, max_steps, step_tol, bmax):
    """Newton iteration for a zero of f from x0+iy0, all in weighted form.

    The iteration actually runs on g = f * exp(-2 pi i mref z) with mref the
    dominant lattice frequency at the starting height: g has the same zeros,
    but its logarithmic derivative is O(sqrt(n)) instead of O(n), so the
    steps are basin-sized rather than carrier-limited. Weighted numerator
    and denominator carry the same real weight, so the step is the exact
    holomorphic Newton step for g. Returns (x, y, rel_residual, steps,
    converged); fails if the iterate leaves the escape disk.
    """
    mref = np.round(-n * y0)
    x = x0
    y = y0
    converged = False
    steps = 0
    for it in range(max_steps):
        steps = it + 1
        f, df = value_deriv_scaled(b, n, x, y)
        dg = df - complex(0.0, 2.0 * PI * mref) * f
        if dg == 0.0 + 0.0j or not (np.isfinite(f.real) and np.isfinite(dg.real)):
            break
        step = f / dg
        x -= step.real
        y -= step.imag
        if (x - x0) * (x - x0) + (y - y0) * (y - y0) > escape * escape:
            break
        if abs(step) <= step_tol * (1.0 + np.hypot(x, y)):
            converged = True
            break
    fv = value_scaled(b, n, x, y)
    rel = abs(fv) / bmax
    return x, y, rel, steps, converged
