"""Compiled simultaneous root finding for complex polynomials.

Aberth-Ehrlich iteration with a Newton-polygon initialization. Polynomials
are held in ascending coefficient order. Evaluation is dual-form: for
|x| <= 1 plain Horner, for |x| > 1 Horner of the coefficient-reversed
polynomial at 1/x. The relative residual |p(x)| / sum_j |c_j| |x|^j is
identical in both forms, so roots far outside the unit circle are located
with the same relative accuracy as roots inside it and no intermediate
overflows.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EPS = float(np.finfo(np.float64).eps)


@njit(cache=True)
def _dual_eval(c, crev, x):
    """Newton step w = p/p' and relative residual at x, in the stable form.

    Returns (w, rel, ok); ok=False means the derivative vanished there.
    """
    d = len(c) - 1
    if abs(x) <= 1.0:
        p = c[d]
        dp = 0.0 + 0.0j
        sa = abs(c[d])
        ax = abs(x)
        for j in range(d - 1, -1, -1):
            dp = dp * x + p
            p = p * x + c[j]
            sa = sa * ax + abs(c[j])
        if sa == 0.0:
            sa = 1e-300
        if dp == 0.0 + 0.0j:
            return 0.0 + 0.0j, abs(p) / sa, False
        return p / dp, abs(p) / sa, True
    u = 1.0 / x
    au = abs(u)
    q = crev[d]
    dq = 0.0 + 0.0j
    sa = abs(crev[d])
    for j in range(d - 1, -1, -1):
        dq = dq * u + q
        q = q * u + crev[j]
        sa = sa * au + abs(crev[j])
    if sa == 0.0:
        sa = 1e-300
    denom = d * q - u * dq  # p'/p = (d - u q'/q)/x
    if denom == 0.0 + 0.0j:
        return 0.0 + 0.0j, abs(q) / sa, False
    return x * q / denom, abs(q) / sa, True


@njit(cache=True)
def _initial_guesses(c):
    """Newton-polygon start points: per-block radii from the upper convex
    hull of (j, log|c_j|), angles spread deterministically."""
    d = len(c) - 1
    logs = np.full(d + 1, -np.inf)
    for j in range(d + 1):
        a = abs(c[j])
        if a > 0.0:
            logs[j] = np.log(a)
    hull = np.empty(d + 1, np.int64)
    hn = 0
    for j in range(d + 1):
        if logs[j] == -np.inf:
            continue
        while hn >= 2:
            j1 = hull[hn - 2]
            j2 = hull[hn - 1]
            cross = (j2 - j1) * (logs[j] - logs[j1]) - (j - j1) * (logs[j2] - logs[j1])
            if cross >= 0.0:
                hn -= 1
            else:
                break
        hull[hn] = j
        hn += 1
    x = np.empty(d, np.complex128)
    pos = 0
    for seg in range(hn - 1):
        j1 = hull[seg]
        j2 = hull[seg + 1]
        cnt = j2 - j1
        r = np.exp((logs[j1] - logs[j2]) / cnt)
        for t in range(cnt):
            ang = 2.0 * np.pi * (t + 0.41) / cnt + 0.73 * seg + 1.47 * j1 / (d + 1.0)
            x[pos] = r * complex(np.cos(ang), np.sin(ang))
            pos += 1
    return x


@njit(cache=True)
def aberth(c, max_iter):
    """All d roots of sum c_j z^j (c[0] != 0, c[-1] != 0, d >= 1).

    Returns (roots, relative residuals, iterations). A root freezes once its
    residual reaches the machine floor 4 eps (no better is attainable);
    frozen roots keep repelling the others. Two guarded Newton polish steps
    finish each root.
    """
    d = len(c) - 1
    crev = c[::-1].copy()
    x = _initial_guesses(c)
    frozen = np.zeros(d, np.bool_)
    resid = np.full(d, np.inf)
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        maxstep = 0.0
        nfrozen = 0
        for i in range(d):
            if frozen[i]:
                nfrozen += 1
                continue
            w, rel, ok = _dual_eval(c, crev, x[i])
            resid[i] = rel
            if rel <= 4.0 * _EPS:
                frozen[i] = True
                nfrozen += 1
                continue
            if not ok:
                x[i] = x[i] * (1.0 + 1e-6) + 1e-8  # off a critical point
                maxstep = 1.0
                continue
            xi = x[i]
            ssum = 0.0 + 0.0j
            for k in range(d):
                if k != i:
                    dz = xi - x[k]
                    if dz == 0.0 + 0.0j:
                        dz = complex(1e-14, 1e-14)
                    ssum += 1.0 / dz
            denom = 1.0 - w * ssum
            if denom == 0.0 + 0.0j:
                denom = complex(_EPS, 0.0)
            delta = w / denom
            x[i] = xi - delta
            st = abs(delta) / (1.0 + abs(x[i]))
            if st > maxstep:
                maxstep = st
        if nfrozen == d or maxstep < 1e-15:
            break
    for i in range(d):
        for _ in range(2):
            w, rel, ok = _dual_eval(c, crev, x[i])
            if rel < resid[i]:
                resid[i] = rel
            if not ok or rel == 0.0:
                break
            xn = x[i] - w
            wn, reln, okn = _dual_eval(c, crev, xn)
            if reln < resid[i]:
                x[i] = xn
                resid[i] = reln
            else:
                break
    return x, resid, iters
