"""Regular envelopes of porous sets.

Given a uniformly porous set ``A`` and a target exponent ``t``, build
``F = A ∪ ⋃ F_ji`` by planting a ``t``-regular Cantor dust in a hole next to
every net point at every scale ``(rho/2)**j``, and the measure ``nu`` that is
the sum of the planted measures. Also holds the counting checks on ``nu`` and
the explicit porosity bound for the converse direction.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .covering import greedy_net
from .errors import (InsufficientScales, NoGap, NotInBaseSet, PorosityDeficit,
                     ResolutionError, UnreachableExponent)
from .porosity import porosity_entries
from .space import (KAPPA, TAU, BallIndex, MetricSpace, SubsetRef, WeightedMeasure,
                    as_subset, lexsort_rows, pairwise_kernel, set_distances)


@dataclass(frozen=True)
class EnvelopeParams:
    rho: float
    t: float
    J: int
    plant_depth: int
    # optional ambient exponent s and decay exponent delta, used only to warn
    # when t falls outside (s - delta, s)
    s: float = None
    delta: float = None

    def __post_init__(self):
        if not (0 < self.rho <= 1 / 3):
            raise ValueError("rho must lie in (0, 1/3]")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.J < 0 or self.plant_depth < 0:
            raise ValueError("J and plant_depth must be >= 0")

    @property
    def base(self):
        return 0.5 * self.rho

    def scale(self, j):
        return self.base**j


@dataclass(frozen=True)
class PlantedPatch:
    j: int
    i: int
    center: int
    radius: float
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class Envelope:
    params: EnvelopeParams
    patches: tuple
    space: MetricSpace
    index: BallIndex
    A: SubsetRef
    nu: WeightedMeasure
    net_sizes: dict
    # patch centres z_ji as coordinates, per scale
    hole_coords: dict
    skipped: tuple = ()
    # (j, r, rho_star, number of sampled points below rho) per deficient scale
    porosity_deficits: tuple = ()


def plant_regular_set(center, radius, t, depth, d=None, metric="euclidean"):
    """Product Cantor dust of similarity dimension ``t`` inside ``B(center, radius)``.

    The dust lives in the cube inscribed in the ball (side ``2 radius /
    sqrt(d)`` for the euclidean metric, ``2 radius`` for chebyshev). Each level
    keeps the two end sub-intervals of every axis with contraction
    ``2**(-d/t)``. The ``2**(d*depth)`` cell centres get uniform weights of
    total ``radius**t``.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = d or center.size
    if not (0 < t <= d):
        raise UnreachableExponent(f"t={t!r} needs contraction 2^(-d/t) <= 1/2, i.e. t <= d={d}")
    ratio = 2.0 ** (-d / t)
    side = 2 * radius / math.sqrt(d) if metric == "euclidean" else 2 * radius
    # 1-D pattern: cell offsets in units of the cube side
    offs = np.zeros(1)
    for _ in range(depth):
        offs = np.concatenate([ratio * offs, (1 - ratio) + ratio * offs])
    centres_1d = offs + 0.5 * ratio**depth
    mesh = np.meshgrid(*([centres_1d] * d), indexing="ij")
    unit = np.stack([m.ravel() for m in mesh], axis=1)
    pts = center - 0.5 * side + side * unit
    w = np.full(len(pts), radius**t / len(pts))
    return pts, w


def construct_envelope(space, index, A, params, mu=None, sample_size=64, dist_A=None,
                       on_deficit="raise"):
    """Plant ``t``-regular dust in porosity holes of ``A`` at scales
    ``(rho/2)**j``, ``j = 1..J``.

    For every centre ``x`` of the greedy ``(rho/2)**j``-net of ``A`` the hole
    centre is the ambient point of ``B(x, (rho/2)**j)`` farthest from ``A``
    (lowest id on ties). Holes closer than ``rho (rho/2)**j - epsilon`` to
    ``A`` are skipped and recorded, as are patches that would leave the unit
    cube. ``mu`` is accepted for interface symmetry and is not used.

    Before planting, the porosity of ``A`` is measured at every ladder scale.
    With ``on_deficit='raise'`` a value below ``rho`` raises
    :class:`PorosityDeficit`; with ``'record'`` the deficient scales are
    stored in ``Envelope.porosity_deficits`` and construction proceeds.
    """
    if on_deficit not in ("raise", "record"):
        raise ValueError("on_deficit must be 'raise' or 'record'")
    A = as_subset(A).validate(space)
    p = params
    if p.J > 0 and p.scale(p.J + 1) < KAPPA * space.epsilon * (1 - 1e-12):
        raise ResolutionError(
            f"patch radius (rho/2)^(J+1)={p.scale(p.J + 1)!r} is below {KAPPA}*epsilon"
        )
    if p.s is not None and p.delta is not None and not (p.s - p.delta < p.t < p.s):
        warnings.warn(f"t={p.t} lies outside the window (s - delta, s) = "
                      f"({p.s - p.delta}, {p.s})", stacklevel=2)
    if dist_A is None:
        dist_A = set_distances(space, A)
    deficits = []
    for j in range(1, p.J + 1):
        r = p.scale(j)
        vals = [e[2] for e in porosity_entries(space, index, A, [r], sample_size,
                                               dist_A=dist_A)]
        rho_star = min(vals)
        if rho_star < p.rho:
            if on_deficit == "raise":
                raise PorosityDeficit(
                    f"porosity {rho_star!r} < rho={p.rho!r} at scale j={j} (r={r!r})",
                    j=j, r=r, rho_star=rho_star)
            deficits.append((j, r, rho_star, sum(v < p.rho for v in vals)))

    patches, skipped, net_sizes, holes = [], [], {}, {}
    for j in range(1, p.J + 1):
        r = p.scale(j)
        net = greedy_net(space, index, A, r)
        net_sizes[j] = len(net.centers)
        holes[j] = []
        for i, x in enumerate(net.centers):
            ids, _ = index.query_with_distances(int(x), r)
            z = int(ids[int(np.argmax(dist_A[ids]))])
            if dist_A[z] < p.rho * r - space.epsilon:
                skipped.append((j, i, int(x), "porosity"))
                continue
            radius = p.scale(j + 1)
            pts, w = plant_regular_set(space.points[z], radius, p.t, p.plant_depth,
                                       space.dim, space.metric)
            if pts.min() < 0 or pts.max() > 1:
                skipped.append((j, i, int(x), "outside_unit_cube"))
                continue
            patches.append(PlantedPatch(j, i, z, radius, pts, w))
            holes[j].append(space.points[z].copy())

    base_pts = space.points[A.ids]
    if patches:
        planted = np.concatenate([pt.points for pt in patches])
        pw = np.concatenate([pt.weights for pt in patches])
    else:
        planted = np.zeros((0, space.dim))
        pw = np.zeros(0)
    allpts = np.concatenate([base_pts, planted])
    allw = np.concatenate([np.zeros(len(base_pts)), pw])
    order = lexsort_rows(allpts)
    srt = allpts[order]
    # coincident planted points are merged, their weights added
    new = np.ones(len(srt), dtype=bool)
    new[1:] = np.any(srt[1:] != srt[:-1], axis=1)
    group = np.cumsum(new) - 1
    fpts = srt[new]
    fw = np.bincount(group, weights=allw[order], minlength=len(fpts))
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = group
    F = MetricSpace(fpts, epsilon=space.epsilon, metric=space.metric, region="envelope")
    A_F = SubsetRef(rank[: len(base_pts)])
    nu = WeightedMeasure(fw, allow_null=True)
    hole_coords = {j: np.asarray(v).reshape(-1, space.dim) for j, v in holes.items()}
    return Envelope(p, tuple(patches), F, BallIndex(F), A_F, nu, net_sizes, hole_coords,
                    tuple(skipped), tuple(deficits))


def count_intersections(envelope, x, k, tol=TAU):
    """Counts ``N_j = #{i : B_ji meets B(x, (rho/2)**k)}`` for ``j = 1..J``.

    Returns ``(counts, violations)`` where ``violations`` lists the scales
    ``j <= k - 1`` with ``N_j > 0`` beyond the boundary tolerance ``tol``.
    """
    env = envelope
    p = env.params
    if x not in env.A:
        raise NotInBaseSet(f"point {x} is not in the base set A")
    if not (1 <= k <= max(p.J, 1)):
        raise ValueError("k must lie in 1..J")
    c = env.space.points[x]
    rk = p.scale(k)
    counts, violations = {}, []
    for j in range(1, p.J + 1):
        Z = env.hole_coords.get(j)
        if Z is None or len(Z) == 0:
            counts[j] = 0
            continue
        d = pairwise_kernel(Z, c, env.space.metric)
        reach = rk + p.scale(j + 1)
        counts[j] = int(np.count_nonzero(d <= reach))
        if j <= k - 1 and np.count_nonzero(d <= reach - tol):
            violations.append(j)
    return counts, violations


@dataclass(frozen=True)
class NuBoundStats:
    max_ratio: float
    median_ratio: float
    # rows of (x id, r, nu mass, ratio)
    table: tuple


def verify_nu_bound(envelope, sample, grid):
    """Ratios ``nu(B(x, r)) / r**t`` over ``sample x grid``."""
    env = envelope
    t = env.params.t
    rows = []
    for x in as_subset(sample).validate(env.space):
        for r in grid.radii:
            m = env.nu.mass(env.index.query_coord(env.space.points[x], r))
            rows.append((int(x), float(r), m, m / r**t))
    ratios = np.array([row[3] for row in rows])
    return NuBoundStats(float(ratios.max()), float(np.median(ratios)), tuple(rows))


@dataclass(frozen=True)
class CountingFit:
    c_star: float
    sequence: dict
    slope: float
    bounded: bool


def check_counting_bound(envelope, x, k, s, delta, tol=0.1):
    """Normalised counts ``N_j rho**((j - k)(s - delta))`` for ``j = k..J``.

    The bound ``#N_j <= c rho**(k(s - delta) - j(s - delta))`` says this
    sequence stays bounded; ``slope`` is the least-squares slope of its
    logarithm against ``j`` and ``bounded`` is ``slope <= tol``.
    """
    p = envelope.params
    counts, _ = count_intersections(envelope, x, k)
    seq = {j: counts[j] * p.rho ** ((j - k) * (s - delta)) for j in range(k, p.J + 1)}
    if all(v == 0 for v in seq.values()):
        return CountingFit(0.0, seq, 0.0, True)
    pos = {j: v for j, v in seq.items() if v > 0}
    if len(pos) < 2:
        raise InsufficientScales(f"only {len(pos)} scale(s) with N_j > 0")
    js = np.array(sorted(pos), dtype=float)
    lv = np.log([pos[j] for j in sorted(pos)])
    dj = js - js.mean()
    slope = float(np.dot(dj, lv - lv.mean()) / np.dot(dj, dj))
    return CountingFit(float(max(seq.values())), seq, slope, slope <= tol)


def porosity_bound_from_regularity(s, t, aX=1.0, bX=1.0, aA=1.0, bA=1.0, k_limit=100000):
    """Explicit porosity lower bound for a ``t``-regular subset of an
    ``s``-regular space, ``t < s``.

    At level ``k`` a ball ``B(x, r)`` needs at least
    ``(aX/bX) 10**-s 2**(k s)`` disjoint balls of radius ``2**-k r / 5``
    (volume comparison with ``bX r^s`` against ``aX (2**-k r/5)^s`` after
    halving the radius), while at most ``(bA/aA) 10**s 2**(k t)`` of them can
    meet ``A``. At the first ``k`` where the first count wins, one ball of
    radius ``2**-k r / 5`` misses ``A``; the bound reported is
    ``2**-(k + 1)``.
    """
    if not t < s:
        raise NoGap(f"need t < s, got t={t!r}, s={s!r}")
    if not (0 < aX <= bX and 0 < aA <= bA and t > 0):
        raise ValueError("need 0 < aX <= bX, 0 < aA <= bA and t > 0")
    lhs0 = math.log(aX / bX) - s * math.log(10)
    rhs0 = math.log(bA / aA) + s * math.log(10)
    ln2 = math.log(2)
    for k in range(1, k_limit + 1):
        if lhs0 + k * s * ln2 > rhs0 + k * t * ln2:
            return 2.0 ** -(k + 1)
    raise NoGap(f"no separating level below k={k_limit}")


@dataclass(frozen=True)
class EnvelopeCheck:
    nu_fit: object
    nu_bound: NuBoundStats
    # rows of (x id, k, j, N_j, violation flag)
    counts: tuple
    counting: tuple
    base_contained: object
    nu_null_on_A: bool

    @property
    def count_violations(self):
        return sum(row[4] for row in self.counts)

    def to_dict(self):
        return {
            "base_contained": self.base_contained,
            "nu_null_on_A": self.nu_null_on_A,
            "nu_s_hat": self.nu_fit.s_hat,
            "nu_a_hat": self.nu_fit.a_hat,
            "nu_b_hat": self.nu_fit.b_hat,
            "nu_bound_max_ratio": self.nu_bound.max_ratio,
            "nu_bound_median_ratio": self.nu_bound.median_ratio,
            "count_violations": self.count_violations,
            "counting_max_slope": max((c[2] for c in self.counting), default=0.0),
        }


def verify_envelope(envelope, s=None, delta=0.0, fit_sample=50, bound_sample=16,
                    count_sample=10, seed=0, base_points=None):
    """Run the standard battery of checks on an envelope.

    * ``nu`` is fitted on its support over ``(rho/2)**(J+1) .. rho/2`` with
      ``4 J`` radii, the range spanned by the planted patches.
    * ``nu(B(x, r)) / r**t`` is tabulated for ``bound_sample`` points of ``A``
      over ``(rho/2)**J .. rho/2``.
    * ``count_sample`` pairs ``(x, k)`` (``x`` from ``A``, ``k`` cycling
      through ``2..J``) feed :func:`count_intersections` and
      :func:`check_counting_bound` with exponent ``s - delta`` (``s``
      defaults to the ambient dimension).

    ``base_points`` (coordinates of the original ``A``) enables the check
    ``F ⊇ A``; without it ``base_contained`` is None.
    """
    from .regularity import ScaleGrid, fit_regularity
    from .space import stride_sample

    env = envelope
    p = env.params
    if p.J < 2:
        raise InsufficientScales("envelope checks need J >= 2")
    s = env.space.dim if s is None else s
    fit = fit_regularity(env.space, env.index, env.nu, env.nu.support(),
                         ScaleGrid(p.scale(p.J + 1), p.scale(1), 4 * p.J), fit_sample, seed)
    bound = verify_nu_bound(env, stride_sample(env.A.ids, bound_sample, seed),
                            ScaleGrid(p.scale(p.J), p.scale(1), 12))
    counts, counting = [], []
    xs = stride_sample(env.A.ids, count_sample, seed)
    for n, x in enumerate(xs):
        k = 2 + n % (p.J - 1)
        c, bad = count_intersections(env, int(x), k)
        counts.extend((int(x), k, j, c[j], j in bad) for j in sorted(c))
        try:
            cf = check_counting_bound(env, int(x), k, s, delta)
            counting.append((int(x), k, cf.slope, cf.bounded))
        except InsufficientScales:
            pass
    return EnvelopeCheck(
        nu_fit=fit,
        nu_bound=bound,
        counts=tuple(counts),
        counting=tuple(counting),
        base_contained=None if base_points is None else contains_points(env.space, base_points),
        nu_null_on_A=bool(np.all(env.nu.weights[env.A.ids] == 0)),
    )


def contains_points(space, pts):
    """True iff every row of ``pts`` is exactly a point of ``space``."""
    pts = np.unique(np.atleast_2d(np.asarray(pts, dtype=float)), axis=0)
    both = np.concatenate([space.points, pts])
    order = lexsort_rows(both)
    srt = both[order]
    same = np.zeros(len(srt), dtype=bool)
    same[1:] = np.all(srt[1:] == srt[:-1], axis=1)
    # a query row is found iff it sits right after an equal row
    found = np.zeros(len(both), dtype=bool)
    found[order[same]] = True
    found[order[np.flatnonzero(same) - 1]] = True
    return bool(found[space.n:].all())
