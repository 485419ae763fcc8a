"""Shared fixtures and independent oracles used across the test suite.

The oracles deliberately avoid the library's algorithms: covering/packing by
exhaustive subset search, generalized variation by brute-force subsequence
enumeration, and Burgers Riemann problems by their closed-form solutions.
"""

import itertools

import numpy as np
import pytest

from bventropy.gauge_variation import Gauge, StepFunction
from bventropy.metric_core import FiniteMetricSpace, from_points, validate_metric


# ---------------------------------------------------------------------------
# metric-space generators


def random_metric_space(rng, n: int, dim: int = 2) -> FiniteMetricSpace:
    """Random Euclidean point cloud (always a valid metric)."""
    return from_points(rng.uniform(0.0, 1.0, size=(n, dim)))


def random_metric_matrix(rng, n: int) -> FiniteMetricSpace:
    """Random non-Euclidean metric via shortest paths on a random graph."""
    w = rng.uniform(0.2, 1.0, size=(n, n))
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    d = w.copy()
    for k in range(n):
        d = np.minimum(d, d[:, k][:, None] + d[k, :][None, :])
    return validate_metric(d)


# ---------------------------------------------------------------------------
# covering / packing oracles (exhaustive)


def oracle_cover(space: FiniteMetricSpace, subset, alpha: float) -> int:
    """Minimal closed-ball covering count by brute force over center sets."""
    k = list(subset) if subset is not None else list(range(space.n))
    for r in range(1, len(k) + 1):
        for centers in itertools.combinations(range(space.n), r):
            if all(min(space.dist[c, p] for c in centers) <= alpha for p in k):
                return r
    raise AssertionError("unreachable: singletons always cover")


def oracle_pack(space: FiniteMetricSpace, subset, alpha: float) -> int:
    """Maximal strictly separated subset size by brute force."""
    k = list(subset) if subset is not None else list(range(space.n))
    best = 1
    for r in range(len(k), 1, -1):
        if r <= best:
            break
        for pts in itertools.combinations(k, r):
            if all(space.dist[a, b] > alpha
                   for a, b in itertools.combinations(pts, 2)):
                best = r
                break
    return best


# ---------------------------------------------------------------------------
# generalized-variation oracle


def oracle_tv_psi(f: StepFunction, gauge: Gauge) -> float:
    """Max over all value subsequences containing both endpoints."""
    k = f.k
    if k < 2:
        return 0.0
    best = 0.0
    middle = range(1, k - 1)
    for r in range(0, k - 1):
        for mids in itertools.combinations(middle, r):
            chain = (0,) + mids + (k - 1,)
            total = sum(
                float(gauge(f.rho(f.values[a], f.values[b])))
                for a, b in zip(chain, chain[1:])
            )
            best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# Burgers Riemann exact solutions


def burgers_exact_shock(x: np.ndarray, t: float, ul: float, ur: float) -> np.ndarray:
    """Entropy solution for ul > ur: a shock at speed (ul + ur) / 2."""
    s = 0.5 * (ul + ur)
    return np.where(x < s * t, ul, ur)


def burgers_exact_rarefaction(x, t, ul, ur):
    """Entropy solution for ul < ur: a centered fan u = x/t inside the cone."""
    u = np.where(x <= ul * t, ul, np.where(x >= ur * t, ur, x / max(t, 1e-300)))
    return u


# ---------------------------------------------------------------------------
# random step functions


def random_step_function(rng, L=1.0, max_pieces=12, lo=0.0, hi=1.0,
                         space=None) -> StepFunction:
    k = int(rng.integers(1, max_pieces + 1))
    cuts = np.unique(rng.uniform(0.0, L, size=k - 1))
    bp = np.concatenate([[0.0], cuts, [L]])
    if space is None:
        vals = rng.uniform(lo, hi, size=bp.size - 1)
    else:
        vals = rng.integers(0, space.n, size=bp.size - 1)
    return StepFunction(bp, vals, space)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
