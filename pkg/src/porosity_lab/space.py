"""Finite metric measure spaces: sample points of the unit cube, weights on
them, closed-ball queries and distances to subsets."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptySubset, IdOutOfRange

METRICS = ("euclidean", "chebyshev")

# absolute tolerance for boundary comparisons, used only where documented
TAU = 1e-12
# resolvability floor: radii below KAPPA * epsilon are discretisation noise
KAPPA = 4.0


def pairwise_kernel(P, x, metric):
    """Distances between the rows of ``P`` and ``x`` (broadcasting on the last
    axis).

    This is the single distance kernel of the package. The arithmetic is
    elementwise in a fixed axis order, so the distance of a pair does not
    depend on which batch it was computed in.
    """
    P = np.asarray(P, dtype=float)
    x = np.asarray(x, dtype=float)
    d = P.shape[-1]
    if metric == "euclidean":
        acc = (P[..., 0] - x[..., 0]) ** 2
        for k in range(1, d):
            acc = acc + (P[..., k] - x[..., k]) ** 2
        return np.sqrt(acc)
    if metric == "chebyshev":
        acc = np.abs(P[..., 0] - x[..., 0])
        for k in range(1, d):
            acc = np.maximum(acc, np.abs(P[..., k] - x[..., k]))
        return acc
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def lexsort_rows(pts):
    """Row order sorting by the first coordinate, then the second, ..."""
    return np.lexsort(pts.T[::-1])


def _has_duplicates(pts):
    if len(pts) < 2:
        return False
    srt = pts[lexsort_rows(pts)]
    return bool(np.any(np.all(srt[1:] == srt[:-1], axis=1)))


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite sample of ``[0, 1]^d`` with a metric.

    Parameters
    ----------
    points : array of shape (n, d)
        Distinct coordinates in the unit cube. Point ids are row numbers.
    epsilon : float
        Covering radius of the sample within its region.
    metric : {'euclidean', 'chebyshev'}
    region : str
        Descriptor of the region the sample covers, ``'unit_cube'`` for
        ambient grids.
    """

    points: np.ndarray
    epsilon: float
    metric: str = "euclidean"
    region: str = "unit_cube"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError("points must be a non-empty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise ValueError("coordinates must lie in [0, 1]")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive real")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if _has_duplicates(pts):
            raise ValueError("duplicate coordinates are not allowed")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n

    def check_ids(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.n):
            raise IdOutOfRange(f"point id outside 0..{self.n - 1}")
        return ids

    def distances_from(self, x, ids=None):
        """Distances from point id ``x`` to ``ids`` (all points by default)."""
        x = int(self.check_ids([x])[0])
        P = self.points if ids is None else self.points[self.check_ids(ids)]
        return pairwise_kernel(P, self.points[x], self.metric)


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """Nonnegative weights aligned with the point ids of a space."""

    weights: np.ndarray
    total: float = field(init=False)
    allow_null: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if not np.all(np.isfinite(w)) or (w.size and w.min() < 0):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(w)
        if total <= 0 and not self.allow_null:
            raise ValueError("measure has zero total mass")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total", total)

    def __len__(self):
        return self.weights.size

    def mass(self, ids):
        return math.fsum(self.weights[np.asarray(ids, dtype=np.int64)])

    def support(self):
        return SubsetRef(np.flatnonzero(self.weights > 0))


@dataclass(frozen=True, eq=False)
class SubsetRef:
    """Sorted, deduplicated point ids."""

    ids: np.ndarray

    def __post_init__(self):
        ids = np.unique(np.asarray(self.ids, dtype=np.int64).ravel())
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return self.ids.size

    def __iter__(self):
        return iter(self.ids.tolist())

    def __contains__(self, i):
        j = np.searchsorted(self.ids, i)
        return bool(j < self.ids.size and self.ids[j] == i)

    def validate(self, space, allow_empty=False):
        space.check_ids(self.ids)
        if not allow_empty and self.ids.size == 0:
            raise EmptySubset("subset is empty")
        return self

    def mask(self, n):
        m = np.zeros(n, dtype=bool)
        m[self.ids] = True
        return m


def as_subset(A):
    return A if isinstance(A, SubsetRef) else SubsetRef(A)


class BallIndex:
    """Bucket grid over the points of a space for closed-ball range queries.

    Points are binned into cubic cells of side ``cell_size`` and stored in
    cell order. A query visits the cells overlapping the bounding box of the
    ball as contiguous runs along the last axis, then filters candidates with
    the exact distance kernel. When a query would visit more than
    ``max_runs`` runs it degrades to a linear scan; both paths return the
    same ids.
    """

    def __init__(self, space, cell_size=None, max_runs=4096):
        self.space = space
        n, d = space.points.shape
        if cell_size is None:
            cell_size = max(space.epsilon, 2.0 * n ** (-1.0 / d))
        self.cell_size = float(min(cell_size, 1.0))
        self.max_runs = max_runs
        self.ncell = int(math.ceil(1.0 / self.cell_size))
        cells = np.minimum((space.points / self.cell_size).astype(np.int64), self.ncell - 1)
        keys = np.zeros(n, dtype=np.int64)
        for k in range(d):
            keys = keys * self.ncell + cells[:, k]
        self._order = np.argsort(keys, kind="stable")
        self._keys = keys[self._order]

    def _cell_range(self, c, r):
        # one cell of slack absorbs rounding in the bounding-box arithmetic
        lo = np.floor((c - r) / self.cell_size) - 1
        hi = np.floor((c + r) / self.cell_size) + 1
        lo = np.clip(lo, 0, self.ncell - 1).astype(np.int64)
        hi = np.clip(hi, 0, self.ncell - 1).astype(np.int64)
        return lo, hi

    def candidates(self, c, r):
        """Ids whose cells meet the bounding box of ``B(c, r)``, unsorted, or
        ``None`` when a linear scan is cheaper."""
        d = self.space.dim
        if not math.isfinite(r):
            return None
        lo, hi = self._cell_range(c, r)
        runs = int(np.prod(hi[:-1] - lo[:-1] + 1)) if d > 1 else 1
        if runs > self.max_runs:
            return None
        lead = np.stack(
            np.meshgrid(*[np.arange(lo[k], hi[k] + 1) for k in range(d - 1)], indexing="ij"),
            axis=-1,
        ).reshape(-1, d - 1) if d > 1 else np.zeros((1, 0), dtype=np.int64)
        base = np.zeros(len(lead), dtype=np.int64)
        for k in range(d - 1):
            base = (base + lead[:, k]) * self.ncell
        starts = np.searchsorted(self._keys, base + lo[-1], side="left")
        ends = np.searchsorted(self._keys, base + hi[-1], side="right")
        if len(starts) == 1:
            return self._order[starts[0]:ends[0]]
        return np.concatenate([self._order[s:e] for s, e in zip(starts, ends)])

    def query_coord(self, c, r):
        """Sorted ids ``p`` with ``d(c, p) <= r``."""
        c = np.asarray(c, dtype=float)
        cand = self.candidates(c, r)
        if cand is None:
            dist = pairwise_kernel(self.space.points, c, self.space.metric)
            return np.flatnonzero(dist <= r)
        dist = pairwise_kernel(self.space.points[cand], c, self.space.metric)
        return np.sort(cand[dist <= r])

    def query_with_distances(self, x, r):
        """Sorted ball ids around point id ``x`` and their distances to it."""
        c = self.space.points[x]
        cand = self.candidates(c, r)
        if cand is None:
            cand = np.arange(self.space.n)
        else:
            cand = np.sort(cand)
        dist = pairwise_kernel(self.space.points[cand], c, self.space.metric)
        keep = dist <= r
        return cand[keep], dist[keep]


def linear_ball_points(space, x, r):
    """Brute-force closed ball; the oracle for :class:`BallIndex`."""
    return np.flatnonzero(space.distances_from(x) <= r)


def distance(space, p, q):
    p, q = space.check_ids([p, q])
    return float(pairwise_kernel(space.points[p], space.points[q], space.metric))


def ball_points(space, index, x, r):
    """Ids of the closed ball ``B(x, r)``, sorted ascending."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    x = int(space.check_ids([x])[0])
    return index.query_coord(space.points[x], r)


def ball_mass(measure, space, index, x, r):
    return measure.mass(ball_points(space, index, x, r))


def dist_to_set(space, index, x, A):
    """``min_{a in A} d(x, a)``."""
    A = as_subset(A).validate(space)
    x = int(space.check_ids([x])[0])
    return float(pairwise_kernel(space.points[A.ids], space.points[x], space.metric).min())


def set_distances(space, A, query=None, chunk=1 << 18):
    """Distances to the subset ``A`` for every point (or every id in ``query``).

    A k-d tree proposes the few nearest members of ``A``; the reported value is
    recomputed with the package kernel so that it agrees bit-for-bit with
    :func:`dist_to_set`.
    """
    A = as_subset(A).validate(space)
    qids = np.arange(space.n) if query is None else space.check_ids(query)
    Apts = space.points[A.ids]
    k = min(8, len(A))
    tree = cKDTree(Apts)
    p = 2 if space.metric == "euclidean" else np.inf
    out = np.empty(qids.size)
    for s in range(0, qids.size, chunk):
        Q = space.points[qids[s:s + chunk]]
        _, nn = tree.query(Q, k=k, p=p)
        nn = np.asarray(nn).reshape(len(Q), k)
        dist = pairwise_kernel(Apts[nn], Q[:, None, :], space.metric)
        out[s:s + chunk] = dist.min(axis=1)
    return out


def stride_sample(ids, size, seed=0):
    """Deterministic stride subsample of ``ids``; the stride offset is drawn
    from a PCG64 generator seeded with ``seed``."""
    ids = np.asarray(ids, dtype=np.int64)
    if size is None or ids.size <= size:
        return ids.copy()
    stride = ids.size // size
    offset = int(np.random.Generator(np.random.PCG64(seed)).integers(stride))
    return ids[offset::stride][:size]
