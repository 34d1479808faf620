"""Greedy r-nets: maximal r-separated subsets that also r-cover."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import BadRadius
from .space import as_subset, pairwise_kernel, set_distances, SubsetRef


@dataclass(frozen=True)
class NetResult:
    radius: float
    centers: np.ndarray
    separation_ok: bool
    coverage_ok: bool
    max_coverage_gap: float


@dataclass(frozen=True)
class PackingCoverReport:
    separation_ok: bool
    coverage_ok: bool
    disjoint_ok: bool
    min_separation: float
    max_coverage_gap: float
    # min over centre pairs of d(c_i, c_j) - r; positive means the closed
    # balls B(c, r/2) are pairwise disjoint
    disjoint_margin: float

    @property
    def ok(self):
        return self.separation_ok and self.coverage_ok and self.disjoint_ok


def greedy_net(space, index, ids, r):
    """Scan ``ids`` in ascending order and keep an id as a centre iff it lies
    farther than ``r`` from every centre kept so far.

    The result is ``r``-separated and every input id is within ``r`` of a
    centre, so ``B(c, r/2)`` are disjoint while ``B(c, r)`` cover the input.
    """
    if not r > 0:
        raise BadRadius(f"net radius must be positive, got {r!r}")
    ids = as_subset(ids).validate(space).ids
    inside = np.zeros(space.n, dtype=bool)
    inside[ids] = True
    covered = np.zeros(space.n, dtype=bool)
    centers = []
    for i in ids:
        if covered[i]:
            continue
        centers.append(i)
        ball = index.query_coord(space.points[i], r)
        covered[ball[inside[ball]]] = True
    centers = np.asarray(centers, dtype=np.int64)
    report = verify_packing_cover(space, centers, ids, r)
    return NetResult(float(r), centers, report.separation_ok, report.coverage_ok,
                     report.max_coverage_gap)


def _min_pair_distance(space, centers):
    if len(centers) < 2:
        return np.inf
    P = space.points[np.asarray(centers, dtype=np.int64)]
    k = min(9, len(P))
    _, nn = cKDTree(P).query(P, k=k, p=2 if space.metric == "euclidean" else np.inf)
    d = pairwise_kernel(P[nn], P[:, None, :], space.metric)
    d[nn == np.arange(len(P))[:, None]] = np.inf
    return float(d.min())


def verify_packing_cover(space, net, ids, r=None):
    """Recompute separation, coverage and half-radius disjointness of a net.

    ``net`` may be a :class:`NetResult` or a plain array of centre ids (then
    ``r`` is required).
    """
    if isinstance(net, NetResult):
        centers, r = net.centers, net.radius
    else:
        centers = np.asarray(net, dtype=np.int64)
    ids = as_subset(ids).validate(space)
    if len(centers) == 0:
        return PackingCoverReport(True, False, True, np.inf, np.inf, np.inf)
    min_sep = _min_pair_distance(space, centers)
    gap = float(set_distances(space, SubsetRef(centers), ids.ids).max())
    return PackingCoverReport(
        separation_ok=bool(min_sep > r),
        coverage_ok=bool(gap <= r),
        disjoint_ok=bool(min_sep > 2 * (r / 2)),
        min_separation=float(min_sep),
        max_coverage_gap=gap,
        disjoint_margin=float(min_sep - r),
    )
