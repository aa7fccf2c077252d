"""Near-pair point process extracted from zero sets.

For one sampled zero set, the objects of interest are the pairs of zeros
closer than a threshold on the nearest-neighbor scale: each pair carries its
rescaled distance and, as location mark, one of its endpoints chosen
uniformly. On top of those events sit the k smallest pairwise distances,
counts of events in regions, and the isolation filter that drops events with
another near pair close by.

Distances are geodesic; the dimensionless event size is
x = rescale_factor * raw_distance, so a threshold a means raw distance below
a / rescale_factor. The limit-law variable adds the constant (1/8)^(1/4) on
top (EIGHTH_ROOT below); counts and thresholds never include it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .ensembles import Model
from .geometry import (Chart, SurfacePoint, diameter, dist_pairs,
                       rescale_factor, sphere_embed_arrays)
from .rootfind import ZeroSet

EIGHTH_ROOT = 0.125 ** 0.25


@dataclass(frozen=True)
class PairEvent:
    """One near pair: zero indices i < j, rescaled and raw distance, mark."""

    i: int
    j: int
    x: float
    mark: SurfacePoint
    raw_distance: float


def _in_all(p: SurfacePoint) -> bool:
    return True


def _in_hemisphere(p: SurfacePoint) -> bool:
    # the half of the sphere covered by the base chart's unit disk
    if p.chart is Chart.SPHERE_0:
        return abs(p.coord) <= 1.0
    return abs(p.coord) >= 1.0


def _in_half_square(p: SurfacePoint) -> bool:
    return (p.coord.real % 1.0) < 0.5


def _in_half_disk(p: SurfacePoint) -> bool:
    return p.coord.real > 0.0


@dataclass(frozen=True)
class Region:
    """Named measurable region with its normalized-volume fraction."""

    name: str
    models: tuple[Model, ...]
    fraction: float
    contains: Callable[[SurfacePoint], bool]


REGIONS: dict[str, Region] = {
    "all": Region("all", (Model.SU2, Model.TORUS, Model.GEF), 1.0, _in_all),
    "hemisphere": Region("hemisphere", (Model.SU2,), 0.5, _in_hemisphere),
    "half_square": Region("half_square", (Model.TORUS,), 0.5, _in_half_square),
    "half_disk": Region("half_disk", (Model.GEF,), 0.5, _in_half_disk),
}


def region(name: str) -> Region:
    try:
        return REGIONS[name]
    except KeyError:
        raise KeyError(f"unknown region {name!r}; have {sorted(REGIONS)}") from None


def _all_pairs(m: int):
    return np.triu_indices(m, 1)


def _grid_pairs(P: np.ndarray, h: float, periods=None):
    """Candidate index pairs (i < j) possibly within distance h.

    Buckets the rows of P into cells of side >= h and pairs same-cell and
    neighbor-cell points; with `periods` the grid wraps. Guaranteed to be a
    superset of all pairs at coordinate distance < h. Falls back to all
    pairs when the point count or the grid is too small to help.
    """
    m, d = P.shape
    if m <= 64 or h <= 0.0 or not np.isfinite(h):
        return _all_pairs(m)
    if periods is not None:
        nc = np.maximum(1, np.floor(np.asarray(periods) / h)).astype(np.int64)
        if (nc < 3).any():
            return _all_pairs(m)
        keys = np.floor(P / (np.asarray(periods) / nc)).astype(np.int64)
        keys = np.minimum(keys, nc - 1)
    else:
        nc = None
        keys = np.floor(P / h).astype(np.int64)
    cells: dict[tuple, list] = {}
    for idx in range(m):
        cells.setdefault(tuple(keys[idx]), []).append(idx)
    half = [o for o in product((-1, 0, 1), repeat=d) if o > (0,) * d]
    ii: list[int] = []
    jj: list[int] = []
    for key, members in cells.items():
        for a in range(len(members)):
            for bb in range(a + 1, len(members)):
                ii.append(members[a])
                jj.append(members[bb])
        for off in half:
            nb = tuple(key[t] + off[t] for t in range(d))
            if nc is not None:
                nb = tuple(nb[t] % nc[t] for t in range(d))
            other = cells.get(nb)
            if other:
                for a in members:
                    for bb in other:
                        ii.append(min(a, bb))
                        jj.append(max(a, bb))
    return np.array(ii, np.int64), np.array(jj, np.int64)


def _candidate_pairs(zs: ZeroSet, radius: float):
    """Superset of all index pairs with geodesic distance < radius."""
    spec = zs.spec
    if spec.model is Model.SU2:
        P = sphere_embed_arrays(zs.chart, zs.coord)
        h = 2.0 * np.sin(min(radius, 0.5 * np.pi))
        return _grid_pairs(P, h)
    if spec.model is Model.TORUS:
        P = np.column_stack([zs.coord.real % 1.0, zs.coord.imag % 1.0])
        return _grid_pairs(P, radius / np.sqrt(np.pi), periods=(1.0, 1.0))
    P = np.column_stack([zs.coord.real, zs.coord.imag])
    return _grid_pairs(P, radius)


def _pairs_within(zs: ZeroSet, radius: float):
    """Exact (i, j, raw distance) for every pair closer than radius."""
    ii, jj = _candidate_pairs(zs, radius)
    if ii.size == 0:
        return ii, jj, np.zeros(0)
    d = dist_pairs(zs.spec, zs.chart[ii], zs.coord[ii], zs.chart[jj], zs.coord[jj])
    sel = d < radius
    ii, jj, d = ii[sel], jj[sel], d[sel]
    order = np.lexsort((jj, ii))
    return ii[order], jj[order], d[order]


def _k_smallest_pairs(zs: ZeroSet, k: int):
    """Indices and distances of the k smallest pairs, ascending."""
    m = len(zs)
    limit = m * (m - 1) // 2
    if not 1 <= k <= limit:
        raise ValueError(f"k must be in [1, {limit}], got {k}")
    spec = zs.spec
    r = 4.0 / rescale_factor(spec)
    dia = diameter(spec)
    while True:
        if r >= dia:
            ii, jj = _all_pairs(m)
            d = dist_pairs(spec, zs.chart[ii], zs.coord[ii],
                           zs.chart[jj], zs.coord[jj])
            break
        ii, jj, d = _pairs_within(zs, r)
        if d.size >= k:
            break
        r *= 2.0
    order = np.argsort(d, kind="stable")[:k]
    return ii[order], jj[order], d[order]


def k_smallest(zeroset: ZeroSet, k: int) -> np.ndarray:
    """The k smallest pairwise geodesic distances, ascending.

    The search radius starts at 4 / rescale_factor and doubles until enough
    pairs are inside; the result is radius-independent. Exact ties (never
    seen in floating point from continuous ensembles) would keep index
    order.
    """
    return _k_smallest_pairs(zeroset, k)[2]


def _draw_marks(zs: ZeroSet, ii, jj, stream) -> list[SurfacePoint]:
    """One uniform endpoint choice per pair, in the given (sorted) order."""
    pick_j = stream.random(ii.size) < 0.5
    return [zs.point(int(jj[t]) if pick_j[t] else int(ii[t]))
            for t in range(ii.size)]


def pair_events(zeroset: ZeroSet, a: float, stream) -> list[PairEvent]:
    """All near pairs with rescaled distance below a, marks drawn.

    Pairs are found by a cell list sized to the threshold (embedded angular
    cells on the sphere, wrapped cells on the torus), then filtered by exact
    geodesic distance, so the output matches brute-force enumeration. Events
    come sorted by index pair, and the mark of each is chosen uniformly from
    its two endpoints using `stream` in that fixed order.
    """
    if a <= 0:
        raise ValueError("threshold must be positive")
    resc = rescale_factor(zeroset.spec)
    ii, jj, d = _pairs_within(zeroset, a / resc)
    marks = _draw_marks(zeroset, ii, jj, stream)
    return [PairEvent(int(ii[t]), int(jj[t]), resc * float(d[t]), marks[t],
                      float(d[t]))
            for t in range(ii.size)]


def filter_isolated(events: list[PairEvent], zeroset: ZeroSet,
                    n: int) -> list[PairEvent]:
    """Keep only events with no other event within 4 log^2(n)/sqrt(n).

    The distance between two events is the minimum geodesic distance over
    their endpoint pairs; sharing a zero gives distance zero, so both such
    events are always dropped.
    """
    m = len(events)
    if m <= 1:
        return list(events)
    thr = 4.0 * np.log(n) ** 2 / np.sqrt(n)
    spec = zeroset.spec
    ends = np.array([[ev.i, ev.j] for ev in events], np.int64)
    ee, ff = np.triu_indices(m, 1)
    close = np.full(ee.size, np.inf)
    for s in (0, 1):
        for t in (0, 1):
            p = ends[ee, s]
            q = ends[ff, t]
            d = dist_pairs(spec, zeroset.chart[p], zeroset.coord[p],
                           zeroset.chart[q], zeroset.coord[q])
            close = np.minimum(close, d)
    bad = np.zeros(m, bool)
    hit = close <= thr
    bad[ee[hit]] = True
    bad[ff[hit]] = True
    return [ev for t, ev in enumerate(events) if not bad[t]]


@dataclass(frozen=True)
class TrialConfig:
    """What to record per trial: thresholds a, smallest-k depth, regions."""

    thresholds: tuple[float, ...] = (1.0,)
    kmax: int = 3
    regions: tuple[str, ...] = ("all",)

    def __post_init__(self):
        if not self.thresholds or any(a <= 0 for a in self.thresholds):
            raise ValueError("thresholds must be positive")
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        for name in self.regions:
            region(name)


@dataclass(frozen=True)
class TrialRecord:
    """Per-trial observables, deterministic given the zero set and stream.

    sigma holds the law-rescaled smallest distances (with the (1/8)^(1/4)
    constant), strictly increasing. counts[(a, region)] is the number of
    events below threshold a whose mark lies in the region; isolated[a] is
    the event count surviving the isolation filter (compact models only).
    """

    seed: tuple[int, int] | None
    sigma: np.ndarray
    counts: dict[tuple[float, str], int]
    isolated: dict[float, int]
    marks: tuple[SurfacePoint, ...]


def collect_trial(zeroset: ZeroSet, config: TrialConfig, stream,
                  seed: tuple[int, int] | None = None) -> TrialRecord:
    """Assemble one trial's record from a validated zero set.

    All mark randomness is drawn in one pass over the union of needed pairs
    in sorted index order, so a record depends only on the zero set, the
    stream state, and the configuration, never on scheduling or on how
    trials are batched around it.
    """
    spec = zeroset.spec
    resc = rescale_factor(spec)
    m = len(zeroset)
    amax = max(config.thresholds)
    ii_e, jj_e, d_e = _pairs_within(zeroset, amax / resc)
    kk = min(config.kmax, m * (m - 1) // 2)
    ii_k, jj_k, d_k = _k_smallest_pairs(zeroset, kk)
    union: dict[tuple[int, int], float] = {}
    for t in range(ii_e.size):
        union[(int(ii_e[t]), int(jj_e[t]))] = float(d_e[t])
    for t in range(ii_k.size):
        union[(int(ii_k[t]), int(jj_k[t]))] = float(d_k[t])
    keys = sorted(union)
    ui = np.array([k[0] for k in keys], np.int64)
    uj = np.array([k[1] for k in keys], np.int64)
    marks = _draw_marks(zeroset, ui, uj, stream)
    events = {keys[t]: PairEvent(keys[t][0], keys[t][1],
                                 resc * union[keys[t]], marks[t],
                                 union[keys[t]])
              for t in range(len(keys))}
    counts: dict[tuple[float, str], int] = {}
    for a in config.thresholds:
        for rname in config.regions:
            reg = region(rname)
            counts[(a, rname)] = sum(
                1 for ev in events.values()
                if ev.x < a and reg.contains(ev.mark))
    isolated: dict[float, int] = {}
    if spec.n is not None:
        for a in config.thresholds:
            evs = [ev for ev in events.values() if ev.x < a]
            isolated[a] = len(filter_isolated(evs, zeroset, spec.n))
    sigma = tuple(float(v) for v in EIGHTH_ROOT * resc * d_k)
    kmarks = tuple(events[(int(ii_k[t]), int(jj_k[t]))].mark
                   for t in range(kk))
    return TrialRecord(seed=seed, sigma=sigma, counts=counts,
                       isolated=isolated, marks=kmarks)
