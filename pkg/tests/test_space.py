import math

import numpy as np
import pytest

from porosity_lab.errors import EmptySubset, IdOutOfRange
from porosity_lab.space import (BallIndex, MetricSpace, SubsetRef, WeightedMeasure, ball_mass,
                                ball_points, dist_to_set, distance, linear_ball_points,
                                set_distances, stride_sample)

import oracles

SQUARE = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])


@pytest.fixture
def square():
    space = MetricSpace(SQUARE, epsilon=1.0)
    return space, BallIndex(space)


def test_distance_examples():
    sp = MetricSpace([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], 1.0)
    assert distance(sp, 0, 1) == 1.0
    cheb = MetricSpace(sp.points, 1.0, metric="chebyshev")
    assert distance(cheb, 0, 2) == 1.0
    assert distance(sp, 2, 2) == 0.0
    assert distance(sp, 0, 2) == math.sqrt(2)


def test_distance_bad_id():
    sp = MetricSpace([[0.0], [1.0]], 1.0)
    with pytest.raises(IdOutOfRange):
        distance(sp, 0, 2)
    with pytest.raises(IndexError):
        distance(sp, -1, 0)


def test_ball_points_square(square):
    space, index = square
    ids = ball_points(space, index, 0, 1.0)
    assert {tuple(space.points[i]) for i in ids} == {(0, 0), (0, 1), (1, 0)}
    assert list(ball_points(space, index, 0, 0.0)) == [0]
    assert list(ball_points(space, index, 0, 2.0)) == [0, 1, 2, 3]


def test_ball_points_negative_radius(square):
    space, index = square
    with pytest.raises(ValueError):
        ball_points(space, index, 0, -0.1)


def test_ball_mass_square(square):
    space, index = square
    mu = WeightedMeasure(np.full(4, 0.25))
    assert ball_mass(mu, space, index, 0, 1.0) == 0.75
    assert ball_mass(mu, space, index, 0, 5.0) == mu.total
    assert ball_mass(mu, space, index, 3, 0.0) == 0.25


def test_dist_to_set_examples():
    sp = MetricSpace([[0.0], [1.0]], 1.0)
    idx = BallIndex(sp)
    assert dist_to_set(sp, idx, 1, SubsetRef([0])) == 1.0
    assert dist_to_set(sp, idx, 0, SubsetRef([0])) == 0.0
    assert all(dist_to_set(sp, idx, x, SubsetRef([0, 1])) == 0.0 for x in (0, 1))
    with pytest.raises(EmptySubset):
        dist_to_set(sp, idx, 0, SubsetRef([]))


def test_space_validation():
    with pytest.raises(ValueError, match="duplicate"):
        MetricSpace([[0.1, 0.2], [0.1, 0.2]], 0.1)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        MetricSpace([[1.5]], 0.1)
    with pytest.raises(ValueError):
        MetricSpace([[0.5]], 0.0)
    with pytest.raises(ValueError):
        MetricSpace([[0.5]], 0.1, metric="manhattan")
    sp = MetricSpace([[0.5]], 0.1)
    with pytest.raises(ValueError):
        sp.points[0, 0] = 0.2


def test_measure_validation():
    with pytest.raises(ValueError):
        WeightedMeasure([0.5, -0.1])
    with pytest.raises(ValueError):
        WeightedMeasure([0.0, 0.0])
    assert WeightedMeasure([0.0, 0.0], allow_null=True).total == 0.0
    mu = WeightedMeasure([0.0, 1.0, 2.0])
    assert list(mu.support().ids) == [1, 2]
    assert mu.mass([1, 2]) == 3.0


def test_set_distances_matches_scan():
    rng = np.random.default_rng(3)
    pts = rng.random((400, 2))
    for metric in ("euclidean", "chebyshev"):
        sp = MetricSpace(pts, 0.05, metric)
        A = SubsetRef(rng.choice(400, 30, replace=False))
        d = set_distances(sp, A)
        ref = [min(oracles.dist(sp.points[i], sp.points[a], metric) for a in A.ids)
               for i in range(sp.n)]
        assert np.allclose(d, ref, rtol=0, atol=1e-15)
        idx = BallIndex(sp)
        for x in range(0, 400, 37):
            assert dist_to_set(sp, idx, x, A) == d[x]


def test_index_matches_linear_scan_chebyshev():
    rng = np.random.default_rng(7)
    sp = MetricSpace(rng.random((500, 3)), 0.05, "chebyshev")
    idx = BallIndex(sp)
    for x in range(0, 500, 17):
        for r in (0.0, 0.03, 0.2, 0.9):
            got = ball_points(sp, idx, x, r)
            assert np.array_equal(got, linear_ball_points(sp, x, r))
            assert list(got) == oracles.ball(sp.points, x, r, "chebyshev")


def test_stride_sample_deterministic():
    ids = np.arange(1000)
    a = stride_sample(ids, 50, seed=4)
    assert np.array_equal(a, stride_sample(ids, 50, seed=4))
    assert len(a) == 50 and np.all(np.diff(a) == 20)
    assert np.array_equal(stride_sample(ids[:10], 50), ids[:10])
    assert np.array_equal(stride_sample(ids, None), ids)
