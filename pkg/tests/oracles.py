"""Independent reference implementations used to check the package.

Nothing here goes through BallIndex, the k-d tree or the shared distance
kernel: everything is a plain scan.
"""

import itertools
import math

import numpy as np


def dist(p, q, metric="euclidean"):
    diffs = [abs(a - b) for a, b in zip(p, q)]
    if metric == "chebyshev":
        return max(diffs)
    if len(diffs) == 1:
        return diffs[0]
    return math.sqrt(sum(d * d for d in diffs))


def ball(points, x, r, metric="euclidean"):
    c = points[x]
    return [i for i, p in enumerate(points) if dist(p, c, metric) <= r]


def dist_to_set_1d(points, A):
    """Distances of every 1-D point to the set ``A`` (ids), by full scan."""
    P = np.asarray(points, dtype=float).ravel()
    out = np.full(P.size, np.inf)
    for a in np.asarray(A):
        np.minimum(out, np.abs(P - P[a]), out=out)
    return out


def porosity_1d(points, A, eps, x, r, dA=None):
    """Largest-empty-ball porosity of ``A`` at ``(x, r)``, scanning every
    ambient point as a candidate hole centre."""
    P = np.asarray(points, dtype=float).ravel()
    if dA is None:
        dA = dist_to_set_1d(P, A)
    best, arg = -math.inf, None
    for y in range(P.size):
        d = abs(P[y] - P[x])
        if d > r:
            continue
        v = min((r - d) / r, (dA[y] - eps) / r)
        if v > best:
            best, arg = v, y
    return max(best, 0.0), arg


def cantor_gap_oracle(centres, radii, lo=0.0, hi=1.0):
    """Lebesgue measure of ``{p in [lo, hi] : dist(p, centres) < r}`` by
    merging the intervals ``(c - r, c + r)``."""
    cs = np.sort(np.asarray(centres, dtype=float).ravel())
    out = []
    for r in radii:
        total, cur_a, cur_b = 0.0, None, None
        for c in cs:
            a, b = max(c - r, lo), min(c + r, hi)
            if cur_b is None or a > cur_b:
                if cur_b is not None:
                    total += cur_b - cur_a
                cur_a, cur_b = a, b
            else:
                cur_b = max(cur_b, b)
        total += cur_b - cur_a
        out.append(total)
    return np.array(out)


def loglog_slope(x, y):
    lx, ly = np.log(x), np.log(y)
    return float(np.polyfit(lx, ly, 1)[0])


def converse_level(s, t, aX=1.0, bX=1.0, aA=1.0, bA=1.0, k_max=1000):
    """First level ``k`` with ``(aX/bX) 10^-s 2^(ks) > (bA/aA) 10^s 2^(kt)``,
    iterating in plain floating point."""
    for k in range(1, k_max + 1):
        if (aX / bX) * 10.0**-s * 2.0 ** (k * s) > (bA / aA) * 10.0**s * 2.0 ** (k * t):
            return k
    return None


def net_ok(points, centres, ids, r, metric="euclidean"):
    """(separated, covering) by exhaustive pairwise scan."""
    sep = all(dist(points[a], points[b], metric) > r
              for a, b in itertools.combinations(centres, 2))
    cov = all(any(dist(points[i], points[c], metric) <= r for c in centres) for i in ids)
    return sep, cov
