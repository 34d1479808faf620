"""Doubling constants and Ahlfors-regularity exponents from ball masses."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadAlpha, DegenerateFit, EmptyBall, EmptySubset, ResolutionError
from .space import KAPPA, TAU, as_subset, ball_points, stride_sample


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric grid of radii ``r_min .. r_max`` with ``count`` points."""

    r_min: float
    r_max: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("a scale grid needs at least two radii")
        if not (0 < self.r_min < self.r_max <= 1):
            raise ValueError("need 0 < r_min < r_max <= 1")

    @property
    def radii(self):
        return np.geomspace(self.r_min, self.r_max, self.count)

    def check(self, space, floor=KAPPA):
        if self.r_min < floor * space.epsilon * (1 - 1e-12):
            raise ResolutionError(
                f"r_min={self.r_min!r} is below the resolvability floor "
                f"{floor}*epsilon={floor * space.epsilon!r}"
            )
        return self

    @classmethod
    def auto(cls, space, r_max, count, factor=2 * KAPPA):
        return cls(factor * space.epsilon, r_max, count)

    def to_dict(self):
        return {"r_min": self.r_min, "r_max": self.r_max, "count": self.count}


@dataclass(frozen=True)
class RegularityFit:
    s_hat: float
    a_hat: float
    b_hat: float
    rms_residual: float
    grid: ScaleGrid
    sample_size: int
    # (x id, r, mass) rows the fit was computed from
    table: tuple = ()

    def envelope_holds(self):
        return all(self.a_hat * r**self.s_hat <= m <= self.b_hat * r**self.s_hat
                   for _, r, m in self.table)


@dataclass(frozen=True)
class DoublingEstimate:
    c_hat: float
    grid: ScaleGrid
    witness: tuple


def floor_log2(a):
    """Exact ``floor(log2(a))`` for ``a > 0``."""
    m, e = math.frexp(a)
    return e - 1


def _masses(space, index, measure, x, radii):
    return [measure.mass(ball_points(space, index, x, r)) for r in radii]


def estimate_doubling(space, index, mu, sample, grid, chain_depth=0):
    """Largest observed ratio ``mu(B(x, 2r)) / mu(B(x, r))``.

    The ratio is taken over the sample and the radii ``r / 2**i`` for every
    grid radius ``r`` and ``i = 0 .. chain_depth``; the default uses the grid
    radii only. Chaining the doubling inequality through the halved radii
    gives ``mu(B(x, alpha r)) >= c**floor(log2 alpha) mu(B(x, r))`` exactly
    for every grid radius and every ``alpha >= 2**-chain_depth``, so pass
    ``chain_depth=k`` before feeding ``c_hat`` to
    :func:`check_doubling_power` with such alphas.
    """
    sample = as_subset(sample).validate(space)
    grid.check(space)
    best, witness = 1.0, None
    for x in sample:
        for R in grid.radii:
            for i in range(chain_depth + 1):
                r = R / 2**i
                small = mu.mass(ball_points(space, index, x, r))
                if small <= 0:
                    raise EmptyBall(f"mu(B(x={x}, r={r!r})) = 0", x=int(x), r=float(r))
                ratio = mu.mass(ball_points(space, index, x, 2 * r)) / small
                if witness is None or ratio > best:
                    best, witness = max(ratio, 1.0), (int(x), float(r))
    return DoublingEstimate(best, grid, witness)


def border_ids(space, ids, r):
    """Ids whose closed ``r``-ball lies inside the unit cube."""
    ids = as_subset(ids).ids
    P = space.points[ids]
    return ids[np.all((P >= r) & (P <= 1 - r), axis=1)]


def fit_regularity(space, index, mu, A, grid, sample_size=50, seed=0, border=False):
    """Pooled log-log fit of ball masses around sample points of ``A``.

    ``s_hat`` is the least-squares slope of ``log mu(B(x, r))`` on ``log r``
    over all sampled pairs. ``a_hat`` and ``b_hat`` are the exact lower and
    upper envelopes ``a_hat r^s_hat <= mu(B(x, r)) <= b_hat r^s_hat`` on the
    fitted data.

    With ``border=True`` only centres whose ``r_max``-ball stays inside the
    unit cube are sampled (minus-sampling). This removes the downward bias
    that truncated balls put on the slope when the measure has positive
    density up to the cube boundary.
    """
    A = as_subset(A).validate(space)
    grid.check(space)
    pool = border_ids(space, A, grid.r_max) if border else A.ids
    if len(pool) == 0:
        raise EmptySubset(f"no centre keeps its r_max={grid.r_max!r} ball inside the cube")
    xs = stride_sample(pool, sample_size, seed)
    radii = grid.radii
    if len(np.unique(radii)) < 2:
        raise DegenerateFit("need at least two distinct radii")
    rows = []
    for x in xs:
        for r, m in zip(radii, _masses(space, index, mu, x, radii)):
            if m <= 0:
                raise EmptyBall(f"mu(B(x={x}, r={r!r})) = 0", x=int(x), r=float(r))
            rows.append((int(x), float(r), m))
    lr = np.log([r for _, r, _ in rows])
    lm = np.log([m for _, _, m in rows])
    dx = lr - lr.mean()
    s_hat = float(np.dot(dx, lm - lm.mean()) / np.dot(dx, dx))
    intercepts = lm - s_hat * lr
    resid = intercepts - intercepts.mean()
    a_hat = math.exp(intercepts.min())
    b_hat = math.exp(intercepts.max())
    # exp/log rounding can leave the envelope off by an ulp; widen until exact
    powers = [r**s_hat for _, r, _ in rows]
    masses = [m for _, _, m in rows]
    while any(a_hat * p > m for p, m in zip(powers, masses)):
        a_hat = math.nextafter(a_hat, 0.0)
    while any(b_hat * p < m for p, m in zip(powers, masses)):
        b_hat = math.nextafter(b_hat, math.inf)
    return RegularityFit(
        s_hat=s_hat,
        a_hat=a_hat,
        b_hat=b_hat,
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        grid=grid,
        sample_size=len(xs),
        table=tuple(rows),
    )


def check_doubling_power(space, index, mu, c, sample, grid, alphas, tol=TAU):
    """Triples ``(x, r, alpha)`` violating
    ``mu(B(x, alpha r)) >= c**floor(log2 alpha) * mu(B(x, r))`` (up to ``tol``)."""
    if c < 1:
        raise ValueError("doubling constant must be >= 1")
    for a in alphas:
        if not (0 < a < 1):
            raise BadAlpha(f"alpha must lie in (0, 1), got {a!r}")
    sample = as_subset(sample).validate(space)
    grid.check(space)
    violations = []
    for x in sample:
        for r in grid.radii:
            big = mu.mass(ball_points(space, index, x, r))
            for a in alphas:
                small = mu.mass(ball_points(space, index, x, a * r))
                if small < c ** floor_log2(a) * big - tol:
                    violations.append((x, float(r), float(a)))
    return violations
