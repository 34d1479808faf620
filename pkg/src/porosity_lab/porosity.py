"""Porosity estimation and the neighbourhood-mass decay of porous sets.

Porosity is estimated by a largest-empty-ball search over ambient sample
points. The decay machinery measures ``mu(A(r))`` for the open neighbourhoods
``A(r) = {x : dist(x, A) < r}``, splits it into annulus masses at the scales
``r0 * rho**(3k)`` and checks the two inequalities that drive the decay
exponent: the annulus recursion

    alpha_k >= gamma * sum_{i > k} alpha_i

and the growth bound derived from it,

    alpha_k <= gamma**-1 * (gamma + 1)**(2 - k) * alpha_1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .errors import BadPorosityParam, DegenerateFit, EmptySubset, NotPorous, ResolutionError
from .regularity import ScaleGrid, fit_regularity, floor_log2
from .space import KAPPA, TAU, as_subset, ball_points, set_distances, stride_sample, SubsetRef


@dataclass(frozen=True)
class PorosityProfile:
    # rows of (x id, r, rho_hat, witness id)
    entries: tuple
    rho_star: float
    r_range: ScaleGrid

    def by_scale(self):
        out = {}
        for _, r, rho, _ in self.entries:
            out[r] = min(out.get(r, math.inf), rho)
        return out


@dataclass(frozen=True)
class AnnulusSeries:
    x0: int
    r0: float
    rho: float
    alpha: np.ndarray
    k_max: int
    restricted: SubsetRef
    # mu(A(r0 rho^(3 k_max))) and mu(A(r0)) for the partition check
    inner_mass: float = 0.0
    outer_mass: float = 0.0


@dataclass(frozen=True)
class RecursionCheck:
    recursion_pass: bool
    growth_pass: bool
    recursion_margin: float
    growth_margin: float


@dataclass(frozen=True)
class DecayReport:
    gamma: float
    delta_theory: float
    delta_empirical: float
    C_empirical: float
    recursion_pass: bool
    growth_pass: bool
    rho: float
    k_max: int
    base_mass: float
    radii: np.ndarray = field(repr=False)
    masses: np.ndarray = field(repr=False)
    series: AnnulusSeries = field(repr=False, default=None)

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "delta_theory": self.delta_theory,
            "delta_empirical": self.delta_empirical,
            "C_empirical": self.C_empirical,
            "recursion_pass": self.recursion_pass,
            "growth_pass": self.growth_pass,
            "rho": self.rho,
            "k_max": self.k_max,
            "base_mass": self.base_mass,
            "radii": [float(r) for r in self.radii],
            "masses": [float(m) for m in self.masses],
            "alpha": [float(a) for a in self.series.alpha] if self.series is not None else [],
        }


def porosity_at(space, index, A, x, r, dist_A=None):
    """Largest ``rho`` such that an ambient point ``y`` in ``B(x, r)`` has
    ``B(y, rho r)`` inside ``B(x, r)`` and at least ``epsilon`` clear of ``A``.

    ``rho_hat = max_y min((r - d(x, y)) / r, (dist(y, A) - epsilon) / r)``,
    clamped at 0. Ties go to the lowest id. ``dist_A`` may carry precomputed
    :func:`set_distances` for the whole space.

    Returns
    -------
    (rho_hat, witness_id)
    """
    if r < KAPPA * space.epsilon * (1 - 1e-12):
        raise ResolutionError(f"r={r!r} is below {KAPPA}*epsilon")
    A = as_subset(A).validate(space)
    if dist_A is None:
        dist_A = set_distances(space, A)
    ids, d = index.query_with_distances(int(x), r)
    vals = np.minimum((r - d) / r, (dist_A[ids] - space.epsilon) / r)
    j = int(np.argmax(vals))
    return max(float(vals[j]), 0.0), int(ids[j])


def uniform_porosity(space, index, A, grid, sample_size=64, seed=0, dist_A=None):
    """Evaluate :func:`porosity_at` over a stride sample of ``A`` and the grid
    radii; ``rho_star`` is the smallest value seen."""
    grid.check(space)
    entries = porosity_entries(space, index, A, grid.radii, sample_size, seed, dist_A)
    return PorosityProfile(entries, min(e[2] for e in entries), grid)


def porosity_entries(space, index, A, radii, sample_size=64, seed=0, dist_A=None):
    """Rows ``(x, r, rho_hat, witness)`` for a stride sample of ``A`` and the
    given radii."""
    A = as_subset(A).validate(space)
    if dist_A is None:
        dist_A = set_distances(space, A)
    xs = stride_sample(A.ids, sample_size, seed)

    def row(x):
        return [(int(x), float(r)) + porosity_at(space, index, A, x, r, dist_A) for r in radii]

    return tuple(e for rows in ordered_map(row, xs) for e in rows)


def neighborhood_mass(space, index, mu, A, r, dist_A=None):
    """``mu(A(r))`` for the open neighbourhood ``{p : dist(p, A) < r}``.

    Distances within ``TAU`` of ``r`` count as on the boundary and are
    excluded.
    """
    if not r > 0:
        raise ValueError("neighbourhood radius must be positive")
    if dist_A is None:
        dist_A = set_distances(space, as_subset(A))
    return math.fsum(mu.weights[dist_A < r - TAU])


def _annulus_mass(mu, dist, t1, t2):
    # {t1 < dist <= t2}, boundary band of width TAU resolved per closedness
    return math.fsum(mu.weights[(dist > t1 + TAU) & (dist <= t2 + TAU)])


def restrict_to_ball(space, index, A, x0, r0):
    A = as_subset(A).validate(space)
    inside = ball_points(space, index, x0, r0)
    sub = SubsetRef(np.intersect1d(inside, A.ids, assume_unique=True))
    if len(sub) == 0:
        raise EmptySubset(f"A has no points in B(x0={x0}, r0={r0!r})")
    return sub


def annulus_series(space, index, mu, A, x0, r0, rho, dist=None):
    """Annulus masses ``alpha_k = mu({r0 rho^(3k) < dist(., A') <= r0 rho^(3(k-1))})``
    of ``A' = A ∩ B(x0, r0)`` for ``k = 1 .. k_max``, where ``k_max`` is the
    last ``k`` with ``r0 rho^(3k) >= KAPPA * epsilon``."""
    if not (0 < rho <= 1 / 3):
        raise BadPorosityParam(f"rho must lie in (0, 1/3], got {rho!r}")
    sub = restrict_to_ball(space, index, A, x0, r0)
    if dist is None:
        dist = set_distances(space, sub)
    floor = KAPPA * space.epsilon
    alpha = []
    k = 1
    while r0 * rho ** (3 * k) >= floor:
        alpha.append(_annulus_mass(mu, dist, r0 * rho ** (3 * k), r0 * rho ** (3 * (k - 1))))
        k += 1
    k_max = len(alpha)
    inner = math.fsum(mu.weights[dist < r0 * rho ** (3 * k_max) - TAU])
    outer = math.fsum(mu.weights[dist < r0 - TAU])
    return AnnulusSeries(int(x0), float(r0), float(rho), np.asarray(alpha, dtype=float),
                         k_max, sub, inner, outer)


def gamma_value(mode, params, rho):
    """Recursion constant.

    ``mode='doubling'``: ``params = c`` and ``gamma = c**floor(log2(rho/6))``.
    ``mode='regular'``: ``params = (a, b, s)`` and ``gamma = (a/b) (rho/6)**s``.
    """
    if not (0 < rho <= 1 / 3):
        raise BadPorosityParam(f"rho must lie in (0, 1/3], got {rho!r}")
    if mode == "doubling":
        c = float(params)
        if c < 1:
            raise ValueError("doubling constant must be >= 1")
        return c ** floor_log2(rho / 6)
    if mode == "regular":
        a, b, s = params
        if not (0 < a <= b) or s <= 0:
            raise ValueError("need 0 < a <= b and s > 0")
        return (a / b) * (rho / 6) ** s
    raise ValueError(f"unknown mode {mode!r}")


def delta_theory(gamma, rho):
    """Decay exponent ``gamma / (6 ln(1/rho))``."""
    if not (0 < gamma <= 1):
        raise ValueError("gamma must lie in (0, 1]")
    if not (0 < rho <= 1 / 3):
        raise BadPorosityParam(f"rho must lie in (0, 1/3], got {rho!r}")
    return gamma / (6 * math.log(1 / rho))


def verify_recursion(series, gamma, tol=TAU):
    """Check the annulus recursion (with the tail truncated at ``k_max``) and
    the growth bound. ``series`` is an :class:`AnnulusSeries` or a plain
    sequence ``alpha_1, alpha_2, ...``."""
    if not (0 < gamma <= 1):
        raise ValueError("gamma must lie in (0, 1]")
    alpha = np.asarray(getattr(series, "alpha", series), dtype=float)
    n = alpha.size
    rec_margin = math.inf
    for k in range(n - 1):
        rec_margin = min(rec_margin, alpha[k] - gamma * math.fsum(alpha[k + 1:]))
    grow_margin = math.inf
    for k in range(1, n + 1):
        bound = (gamma + 1) ** (2 - k) / gamma * alpha[0]
        grow_margin = min(grow_margin, bound - alpha[k - 1])
    return RecursionCheck(rec_margin >= -tol, grow_margin >= -tol, rec_margin, grow_margin)


def loglog_slope(x, y):
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    return float(np.dot(dx, ly - ly.mean()) / np.dot(dx, dx))


def decay_profile(space, index, mu, A, x0, r0, grid, rho=None, regularity=None,
                  porosity_grid=None, porosity_sample=32, regularity_sample=20, seed=0):
    """Measure how ``mu((A ∩ B(x0, r0))(r))`` decays as ``r -> 0``.

    Parameters
    ----------
    grid : ScaleGrid
        Radii for the neighbourhood masses, within ``[KAPPA*epsilon, r0]``.
    rho : float, optional
        Porosity constant. Estimated with :func:`uniform_porosity` on the
        points of ``A`` inside ``B(x0, r0)`` (over ``porosity_grid``, default
        ``grid``) when omitted.
    regularity : RegularityFit, optional
        Fit of ``mu`` supplying ``(a, b, s)`` for the recursion constant.
        Fitted on the support of ``mu`` over ``grid`` when omitted.
    """
    grid.check(space)
    if grid.r_max > r0 * (1 + 1e-12):
        raise ValueError("decay grid must stay below r0")
    sub = restrict_to_ball(space, index, A, x0, r0)
    A = as_subset(A)
    if rho is None:
        pgrid = porosity_grid or grid
        prof = uniform_porosity(space, index, A, pgrid, porosity_sample, seed)
        # porosity is evaluated at points of A near x0 only
        pts = [e for e in prof.entries if e[0] in sub]
        rho = min(e[2] for e in pts) if pts else prof.rho_star
    if not rho > 0:
        raise NotPorous(f"measured porosity {rho!r} is not positive")
    rho_used = min(float(rho), 1 / 3)
    if regularity is None:
        regularity = fit_regularity(space, index, mu, mu.support(), grid, regularity_sample, seed)
    gamma = gamma_value("regular", (regularity.a_hat, regularity.b_hat, regularity.s_hat),
                        rho_used)
    dtheory = delta_theory(gamma, rho_used)

    dist = set_distances(space, sub)
    radii = grid.radii
    masses = np.array([math.fsum(mu.weights[dist < r - TAU]) for r in radii])
    if np.any(masses <= 0):
        raise DegenerateFit("a neighbourhood mass vanished; raise r_min")
    demp = loglog_slope(radii, masses)
    ball = mu.mass(ball_points(space, index, x0, r0))
    C = float(np.max(masses / (ball * (radii / r0) ** dtheory)))
    series = annulus_series(space, index, mu, A, x0, r0, rho_used, dist=dist)
    rec = verify_recursion(series, gamma)
    return DecayReport(
        gamma=gamma,
        delta_theory=dtheory,
        delta_empirical=demp,
        C_empirical=C,
        recursion_pass=rec.recursion_pass,
        growth_pass=rec.growth_pass,
        rho=float(rho),
        k_max=series.k_max,
        base_mass=mu.mass(sub.ids),
        radii=radii,
        masses=masses,
        series=series,
    )
