"""scikit-learn style wrappers around the analysis routines.

Inputs are ``(n, d)`` arrays of points in the unit cube. Where a subset is
needed (porosity, envelopes) it is passed as a boolean mask ``y``.
"""

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .covering import greedy_net
from .envelope import EnvelopeParams, construct_envelope
from .porosity import uniform_porosity
from .regularity import ScaleGrid, estimate_doubling, fit_regularity
from .space import (KAPPA, BallIndex, MetricSpace, SubsetRef, WeightedMeasure,
                    pairwise_kernel, stride_sample)


def nn_spacing(X, metric="euclidean"):
    """Largest nearest-neighbour distance of ``X``, a stand-in for the sample
    resolution when none is given."""
    if len(X) < 2:
        return 1.0
    d, _ = cKDTree(X).query(X, k=2, p=2 if metric == "euclidean" else np.inf)
    return float(d[:, 1].max())


def check_points(X):
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.min() < 0 or X.max() > 1:
        raise ValueError("points must lie in the unit cube [0, 1]^d")
    return X


def check_mask(y, n):
    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError(f"mask must have shape ({n},), got {y.shape}")
    ids = np.flatnonzero(y.astype(bool))
    if ids.size == 0:
        raise ValueError("mask selects no points")
    return SubsetRef(ids)


class _SpaceMixin:

    def _space(self, X):
        X = check_points(X)
        eps = self.epsilon if self.epsilon is not None else nn_spacing(X, self.metric)
        space = MetricSpace(X, eps, self.metric)
        return space, BallIndex(space)

    def _grid(self, space):
        r_min = self.r_min if self.r_min is not None else 2 * KAPPA * space.epsilon
        return ScaleGrid(r_min, self.r_max, self.n_scales)


class GreedyNet(BaseEstimator, TransformerMixin):
    """Greedy ``radius``-net of the training points.

    Attributes
    ----------
    centers_ : ndarray of shape (m, d)
    center_indices_ : ndarray of int
        Row numbers of the centres in the training array.
    """

    def __init__(self, radius=0.1, metric="euclidean"):
        self.radius = radius
        self.metric = metric

    def fit(self, X, y=None):
        X = check_points(X)
        space = MetricSpace(X, nn_spacing(X, self.metric), self.metric)
        net = greedy_net(space, BallIndex(space), np.arange(space.n), self.radius)
        self.center_indices_ = net.centers
        self.centers_ = X[net.centers]
        self.coverage_ok_ = net.coverage_ok
        self.separation_ok_ = net.separation_ok
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Distances from each row of ``X`` to every centre."""
        check_is_fitted(self, "centers_")
        X = check_array(X, dtype=np.float64)
        return pairwise_kernel(self.centers_[None, :, :], X[:, None, :], self.metric)

    def predict(self, X):
        """Index of the nearest centre (lowest index on ties)."""
        return np.argmin(self.transform(X), axis=1)


class RegularityEstimator(_SpaceMixin, BaseEstimator):
    """Power-law fit ``mu(B(x, r)) ~ r**s`` of a weighted point sample.

    ``sample_weight`` defines the measure (uniform when omitted); the fit is
    centred on the support of the measure. ``border=True`` keeps only centres
    whose largest ball stays inside the unit cube.
    """

    def __init__(self, r_max=0.25, r_min=None, n_scales=12, sample_size=50, seed=0,
                 epsilon=None, metric="euclidean", border=False):
        self.border = border
        self.r_max = r_max
        self.r_min = r_min
        self.n_scales = n_scales
        self.sample_size = sample_size
        self.seed = seed
        self.epsilon = epsilon
        self.metric = metric

    def fit(self, X, y=None, sample_weight=None):
        space, index = self._space(X)
        w = np.full(space.n, 1.0 / space.n) if sample_weight is None else sample_weight
        mu = WeightedMeasure(np.asarray(w, dtype=float))
        self.fit_ = fit_regularity(space, index, mu, mu.support(), self._grid(space),
                                   self.sample_size, self.seed, border=self.border)
        self.s_hat_ = self.fit_.s_hat
        self.a_hat_ = self.fit_.a_hat
        self.b_hat_ = self.fit_.b_hat
        self.n_features_in_ = space.dim
        return self


class DoublingEstimator(_SpaceMixin, BaseEstimator):
    """Largest observed doubling ratio ``mu(B(x, 2r)) / mu(B(x, r))``.

    ``chain_depth`` also scans the halved radii ``r / 2**i``, see
    :func:`porosity_lab.regularity.estimate_doubling`.
    """

    def __init__(self, r_max=0.25, r_min=None, n_scales=12, sample_size=50, seed=0,
                 epsilon=None, metric="euclidean", chain_depth=0):
        self.chain_depth = chain_depth
        self.r_max = r_max
        self.r_min = r_min
        self.n_scales = n_scales
        self.sample_size = sample_size
        self.seed = seed
        self.epsilon = epsilon
        self.metric = metric

    def fit(self, X, y=None, sample_weight=None):
        space, index = self._space(X)
        w = np.full(space.n, 1.0 / space.n) if sample_weight is None else sample_weight
        mu = WeightedMeasure(np.asarray(w, dtype=float))
        sample = stride_sample(mu.support().ids, self.sample_size, self.seed)
        est = estimate_doubling(space, index, mu, sample, self._grid(space), self.chain_depth)
        self.c_hat_ = est.c_hat
        self.witness_ = est.witness
        self.n_features_in_ = space.dim
        return self


class PorosityEstimator(_SpaceMixin, BaseEstimator):
    """Uniform porosity of the subset ``y`` (boolean mask) of the sample ``X``."""

    def __init__(self, r_max=0.3, r_min=None, n_scales=12, sample_size=64, seed=0,
                 epsilon=None, metric="euclidean"):
        self.r_max = r_max
        self.r_min = r_min
        self.n_scales = n_scales
        self.sample_size = sample_size
        self.seed = seed
        self.epsilon = epsilon
        self.metric = metric

    def fit(self, X, y):
        space, index = self._space(X)
        A = check_mask(y, space.n)
        self.profile_ = uniform_porosity(space, index, A, self._grid(space), self.sample_size,
                                         self.seed)
        self.rho_star_ = self.profile_.rho_star
        self.n_features_in_ = space.dim
        return self


class RegularEnvelope(_SpaceMixin, BaseEstimator):
    """Envelope ``F ⊇ A`` of the masked subset carrying a ``t``-regular measure.

    Attributes
    ----------
    envelope_ : Envelope
    points_ : ndarray
        Points of ``F``.
    weights_ : ndarray
        Weights of the planted measure on ``points_``.
    """

    def __init__(self, rho=0.15, t=0.5, J=3, plant_depth=5, sample_size=64, epsilon=None,
                 metric="euclidean", on_deficit="raise"):
        self.rho = rho
        self.t = t
        self.J = J
        self.plant_depth = plant_depth
        self.sample_size = sample_size
        self.epsilon = epsilon
        self.metric = metric
        self.on_deficit = on_deficit

    def fit(self, X, y):
        space, index = self._space(X)
        A = check_mask(y, space.n)
        params = EnvelopeParams(self.rho, self.t, self.J, self.plant_depth)
        self.envelope_ = construct_envelope(space, index, A, params,
                                            sample_size=self.sample_size,
                                            on_deficit=self.on_deficit)
        self.points_ = np.asarray(self.envelope_.space.points)
        self.weights_ = self.envelope_.nu.weights
        self.n_features_in_ = space.dim
        return self

    def transform(self, X=None):
        """Points of the envelope ``F`` (the input is ignored)."""
        check_is_fitted(self, "points_")
        return self.points_.copy()
