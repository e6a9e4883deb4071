"""Shared oracles for the test suite: finite differences and a brute-force
transportation-polytope vertex enumerator."""

import itertools

import numpy as np
import pytest


def finite_difference_gradient(potential, q, h=1e-6):
    """Central-difference gradient of a scalar potential."""
    q = np.asarray(q, dtype=float)
    g = np.empty(q.size)
    for i in range(q.size):
        step = h * max(1.0, abs(q[i]))
        qp = q.copy()
        qm = q.copy()
        qp[i] += step
        qm[i] -= step
        g[i] = (potential(qp) - potential(qm)) / (2.0 * step)
    return g


def assert_gradient_matches(target, points, rtol=1e-5):
    """Analytic gradient vs finite differences at every probe point."""
    for q in points:
        analytic = target.gradient(np.asarray(q, dtype=float))
        numeric = finite_difference_gradient(target.potential, q)
        scale = max(1.0, float(np.linalg.norm(analytic)))
        err = float(np.linalg.norm(analytic - numeric)) / scale
        assert err <= rtol, f"gradient mismatch {err:.3g} at {np.asarray(q)[:4]}"


def transport_vertices(mu, nu):
    """All basic feasible solutions of the KxK transportation polytope.

    Enumerates every cell subset of size 2K-1, solves the marginal equations
    restricted to it and keeps the nonnegative consistent solutions. Only
    meant as an oracle for K <= 4.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    K = mu.size
    cells = list(itertools.product(range(K), range(K)))
    b = np.concatenate([mu, nu])
    vertices = []
    for subset in itertools.combinations(cells, 2 * K - 1):
        A = np.zeros((2 * K, len(subset)))
        for col, (i, j) in enumerate(subset):
            A[i, col] = 1.0
            A[K + j, col] = 1.0
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        if np.linalg.norm(A @ x - b) > 1e-9 or np.any(x < -1e-9):
            continue
        plan = np.zeros((K, K))
        for col, (i, j) in enumerate(subset):
            plan[i, j] += x[col]
        vertices.append(np.maximum(plan, 0.0))
    return vertices


def oracle_transport_cost(mu, nu, D):
    """Minimum transport cost by dense vertex enumeration (K <= 4)."""
    return min(float(np.sum(v * D)) for v in transport_vertices(mu, nu))


def random_prob_vector(rng, K, allow_zeros=False):
    w = rng.random(K) + 1e-3
    if allow_zeros and K > 1:
        w[rng.integers(0, K)] = 0.0
    return w / w.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
