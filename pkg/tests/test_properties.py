import itertools

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from porosity_lab.covering import greedy_net
from porosity_lab.envelope import porosity_bound_from_regularity
from porosity_lab.manifest import Manifest
from porosity_lab.porosity import porosity_at, verify_recursion
from porosity_lab.regularity import ScaleGrid, fit_regularity
from porosity_lab.space import (BallIndex, MetricSpace, SubsetRef, WeightedMeasure,
                                ball_mass, ball_points, linear_ball_points)

import oracles

metrics = st.sampled_from(["euclidean", "chebyshev"])


@st.composite
def spaces(draw, min_n=2, max_n=60):
    d = draw(st.integers(1, 3))
    n = draw(st.integers(min_n, max_n))
    # points on a lattice so duplicates are easy to drop and ties are exact
    raw = draw(arrays(np.int64, (n, d), elements=st.integers(0, 64)))
    pts = np.unique(raw, axis=0) / 64
    if len(pts) < min_n:
        pts = np.unique(np.vstack([pts, np.full((1, d), 0.5)]), axis=0)
    return MetricSpace(pts, 1 / 64, draw(metrics))


@settings(max_examples=60, deadline=None)
@given(spaces(), st.floats(0, 1.5), st.data())
def test_index_matches_linear_scan(sp, r, data):
    idx = BallIndex(sp, cell_size=data.draw(st.sampled_from([None, 0.05, 0.3])))
    x = data.draw(st.integers(0, sp.n - 1))
    assert np.array_equal(ball_points(sp, idx, x, r), linear_ball_points(sp, x, r))


@settings(max_examples=60, deadline=None)
@given(spaces(min_n=3), st.data())
def test_triangle_inequality(sp, data):
    i, j, k = (data.draw(st.integers(0, sp.n - 1)) for _ in range(3))
    d = lambda a, b: oracles.dist(sp.points[a], sp.points[b], sp.metric)
    assert d(i, j) <= d(i, k) + d(k, j) + 1e-15
    assert sp.distances_from(i)[j] <= sp.distances_from(i)[k] + sp.distances_from(k)[j] + 1e-15
    assert abs(sp.distances_from(i)[j] - d(i, j)) < 1e-15


@settings(max_examples=40, deadline=None)
@given(spaces(), st.lists(st.floats(0, 1.5), min_size=2, max_size=6), st.data())
def test_ball_mass_monotone(sp, radii, data):
    w = data.draw(arrays(float, sp.n, elements=st.floats(0, 5)))
    mu = WeightedMeasure(w, allow_null=True)
    idx = BallIndex(sp)
    x = data.draw(st.integers(0, sp.n - 1))
    masses = [ball_mass(mu, sp, idx, x, r) for r in sorted(radii)]
    assert all(a <= b for a, b in zip(masses, masses[1:]))


@settings(max_examples=60, deadline=None)
@given(spaces(), st.floats(0.01, 1.0))
def test_greedy_net_is_valid(sp, r):
    net = greedy_net(sp, BallIndex(sp), np.arange(sp.n), r)
    assert net.separation_ok and net.coverage_ok
    assert oracles.net_ok(sp.points, net.centers, range(sp.n), r, sp.metric) == (True, True)


def _separated(sp, ids, r):
    return all(sp.distances_from(a)[b] > r for a, b in itertools.combinations(ids, 2))


def _covers(sp, ids, r):
    return all(min(sp.distances_from(c)[i] for c in ids) <= r for i in range(sp.n))


@settings(max_examples=40, deadline=None)
@given(spaces(max_n=10), st.floats(0.02, 0.8))
def test_packing_cover_duality(sp, r):
    n = sp.n
    subsets = [c for k in range(1, n + 1) for c in itertools.combinations(range(n), k)]
    packing = max(len(c) for c in subsets if _separated(sp, c, r))
    packing2 = max(len(c) for c in subsets if _separated(sp, c, 2 * r))
    cover = min(len(c) for c in subsets if _covers(sp, c, r))
    net = greedy_net(sp, BallIndex(sp), np.arange(n), r)
    assert cover <= len(net.centers) <= packing
    assert packing2 <= cover


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 1.0),
       st.lists(st.floats(0, 10), min_size=1, max_size=12),
       st.lists(st.floats(0, 3), min_size=12, max_size=12))
def test_recursion_implies_growth(gamma, tail, slack):
    # build alpha backwards so that alpha_k >= gamma * sum of its tail
    alpha = [tail[-1]]
    for extra in slack[:len(tail) - 1]:
        alpha.insert(0, gamma * sum(alpha) + extra)
    chk = verify_recursion(alpha, gamma)
    assert chk.recursion_pass
    assert chk.growth_pass


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.05, 0.95), st.floats(0.0, 0.9))
def test_converse_bound_monotone_in_t(s, frac, shift):
    t1 = s * frac
    t2 = t1 + (s - t1) * shift
    b1, b2 = (porosity_bound_from_regularity(s, t) for t in (t1, t2))
    assert 0 < b2 <= b1 <= 0.25


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2), st.data())
def test_porosity_at_most_half_on_A(d, data):
    m = 16
    grid = np.stack(np.meshgrid(*[np.arange(m + 1) / m] * d, indexing="ij"), -1).reshape(-1, d)
    sp = MetricSpace(grid, 1 / m, data.draw(metrics))
    idx = BallIndex(sp)
    A = SubsetRef(np.unique(data.draw(st.lists(st.integers(0, sp.n - 1), min_size=1, max_size=8))))
    x = int(data.draw(st.sampled_from(list(A.ids))))
    r = data.draw(st.floats(4 / m, 1.0))
    rho, w = porosity_at(sp, idx, A, x, r)
    assert 0 <= rho <= 0.5
    assert sp.distances_from(x)[w] <= r


@settings(max_examples=30, deadline=None)
@given(spaces(min_n=20), st.integers(0, 5))
def test_regularity_envelope_exact(sp, seed):
    mu = WeightedMeasure(np.ones(sp.n))
    grid = ScaleGrid(4 * sp.epsilon, 0.5, 5)
    fit = fit_regularity(sp, BallIndex(sp), mu, SubsetRef(np.arange(sp.n)), grid,
                         sample_size=10, seed=seed)
    assert fit.envelope_holds()
    assert fit.a_hat <= fit.b_hat
    # the envelope is tight: some row touches each side
    ratios = [m / r**fit.s_hat for _, r, m in fit.table]
    assert np.isclose(min(ratios), fit.a_hat) and np.isclose(max(ratios), fit.b_hat)


@settings(max_examples=30, deadline=None)
@given(spaces(), st.data())
def test_manifest_round_trip(sp, data):
    w = data.draw(arrays(float, sp.n, elements=st.floats(0, 1e6, allow_subnormal=False)))
    A = np.unique(data.draw(st.lists(st.integers(0, sp.n - 1), min_size=1)))
    m = Manifest.from_space(sp, {"A": SubsetRef(A)},
                            {"w": WeightedMeasure(w, allow_null=True)}, {"seed": 1})
    text = m.dumps()
    again = Manifest.loads(text)
    assert again.dumps() == text
    assert np.array_equal(again.measures["w"], w)
    assert np.array_equal(again.points, sp.points)
