"""Deterministic self-similar test sets with known dimension.

Each generator produces the depth-``n`` cell centres of a self-similar set in
``[0, 1]^d`` together with its natural (uniform) measure, merged into a
uniform ambient grid of the unit cube.
"""

import itertools
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DegenerateSpec, ResolutionError
from .space import TAU, MetricSpace, SubsetRef, WeightedMeasure, lexsort_rows

KINDS = (
    "middle_lambda_cantor_1d",
    "product_cantor",
    "four_corner",
    "sierpinski_carpet",
    "full_grid",
)

ALIASES = {
    "cantor1d": "middle_lambda_cantor_1d",
    "cantor": "middle_lambda_cantor_1d",
    "middle_thirds": "middle_lambda_cantor_1d",
    "product": "product_cantor",
    "fourcorner": "four_corner",
    "four-corner": "four_corner",
    "carpet": "sierpinski_carpet",
    "grid": "full_grid",
    "full-grid": "full_grid",
}


@dataclass(frozen=True)
class FractalSpec:
    kind: str
    dim: int
    contraction: float
    pieces: int
    depth: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown fractal kind {self.kind!r}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class GroundTruth:
    similarity_dimension: float
    cell_size: float
    expected_porosity_range: tuple = None

    def to_dict(self):
        d = asdict(self)
        if d["expected_porosity_range"] is not None:
            d["expected_porosity_range"] = list(d["expected_porosity_range"])
        return d


def fractal_spec(kind, depth, dim=None, lam=None, contraction=None, seed=0):
    """Build a :class:`FractalSpec` from user-level parameters.

    ``lam`` is the removed middle fraction of the Cantor kinds (contraction
    ``(1 - lam) / 2``); ``contraction`` overrides it directly.
    """
    kind = ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown fractal kind {kind!r}")
    if kind == "middle_lambda_cantor_1d":
        dim = 1
        c = contraction if contraction is not None else (1.0 - (1 / 3 if lam is None else lam)) / 2
        return FractalSpec(kind, 1, c, 2, depth, seed)
    if kind == "product_cantor":
        dim = dim or 2
        c = contraction if contraction is not None else (1.0 - (1 / 3 if lam is None else lam)) / 2
        return FractalSpec(kind, dim, c, 2**dim, depth, seed)
    if kind == "four_corner":
        c = contraction if contraction is not None else 0.25
        return FractalSpec(kind, 2, c, 4, depth, seed)
    if kind == "sierpinski_carpet":
        return FractalSpec(kind, 2, 1 / 3, 8, depth, seed)
    dim = dim or 1
    return FractalSpec(kind, dim, 0.5, 2**dim, depth, seed)


def similarity_dimension(spec):
    """Exponent ``s`` solving ``pieces * contraction**s = 1``."""
    m, c = spec.pieces, spec.contraction
    if m < 1 or not (0 < c <= 1):
        raise DegenerateSpec("need pieces >= 1 and contraction in (0, 1)")
    if c == 1:
        if m > 1:
            raise DegenerateSpec("contraction 1 with several pieces has no finite dimension")
        return 0.0
    return math.log(m) / math.log(1 / c)


def _offsets(spec):
    c, d = spec.contraction, spec.dim
    if spec.kind == "sierpinski_carpet":
        return np.array([(i / 3, j / 3) for i in range(3) for j in range(3) if (i, j) != (1, 1)])
    ends = (0.0, 1.0 - c)
    return np.array(list(itertools.product(ends, repeat=d)), dtype=float)


def cell_corners(spec):
    """Lower corners of the ``pieces**depth`` depth-level cells."""
    if spec.kind != "sierpinski_carpet" and spec.contraction > 0.5:
        raise DegenerateSpec("contraction above 1/2 makes the two end cells overlap")
    offs = _offsets(spec)
    corners = np.zeros((1, spec.dim))
    for _ in range(spec.depth):
        corners = (offs[:, None, :] + spec.contraction * corners[None, :, :]).reshape(-1, spec.dim)
    return corners


def cell_centers(spec):
    return cell_corners(spec) + 0.5 * spec.contraction**spec.depth


def ambient_grid(dim, spacing):
    """Uniform grid of ``[0, 1]^dim`` with step ``1/N <= spacing``."""
    N = int(math.ceil(1.0 / spacing - 1e-9))
    axis = np.arange(N + 1) / N
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1), N


def embed(points, spacing, metric="euclidean"):
    """Merge ``points`` into the ambient grid of spacing ``spacing``.

    Points within ``TAU`` (per coordinate) of a grid node are identified with
    it. Returns the space, sorted lexicographically, and the ids of ``points``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dim = points.shape[1]
    grid, N = ambient_grid(dim, spacing)
    idx = np.rint(points * N)
    on_grid = np.all(np.abs(points - idx / N) <= TAU, axis=1)
    gid = np.zeros(len(points), dtype=np.int64)
    for k in range(dim):
        gid = gid * (N + 1) + idx[:, k].astype(np.int64)
    off = points[~on_grid]
    allpts = np.concatenate([grid, off])
    order = lexsort_rows(allpts)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    ids = np.empty(len(points), dtype=np.int64)
    ids[on_grid] = rank[gid[on_grid]]
    ids[~on_grid] = rank[len(grid) + np.arange(len(off))]
    space = MetricSpace(allpts[order], epsilon=spacing, metric=metric)
    return space, SubsetRef(ids)


def generate(spec, ambient_spacing="auto", metric="euclidean"):
    """Sample a fractal corpus.

    Parameters
    ----------
    spec : FractalSpec
    ambient_spacing : float, 'auto' or None
        Step of the ambient grid of the unit cube. ``'auto'`` uses the cell
        size ``contraction**depth``. ``None`` skips the ambient grid: the
        space then consists of the cell centres alone, with epsilon equal to
        the cell size.

    Returns
    -------
    space, A, mu_A, truth
    """
    cell = spec.contraction**spec.depth
    s = similarity_dimension(spec)
    porosity_range = (0.0, 0.0) if spec.kind == "full_grid" else None
    truth = GroundTruth(s, cell, porosity_range)
    if spec.kind == "full_grid":
        pts, _ = ambient_grid(spec.dim, cell)
    else:
        pts = cell_centers(spec)

    if ambient_spacing is None:
        order = lexsort_rows(pts)
        space = MetricSpace(pts[order], epsilon=cell, metric=metric, region="cells")
        A = SubsetRef(np.arange(len(pts)))
    else:
        if ambient_spacing == "auto":
            ambient_spacing = cell
        if ambient_spacing > cell * (1 + 1e-12):
            raise ResolutionError(
                f"ambient spacing {ambient_spacing!r} is coarser than the cell size {cell!r}"
            )
        space, A = embed(pts, ambient_spacing, metric)

    w = np.zeros(space.n)
    w[A.ids] = 1.0 / len(A)
    return space, A, WeightedMeasure(w), truth


def ambient_measure(space, exclude=None):
    """Uniform (Lebesgue-like) weights of total mass one on the ambient sample,
    with zero weight on the ids in ``exclude``."""
    w = np.ones(space.n)
    if exclude is not None:
        w[np.asarray(getattr(exclude, "ids", exclude), dtype=np.int64)] = 0.0
    return WeightedMeasure(w / w.sum())
