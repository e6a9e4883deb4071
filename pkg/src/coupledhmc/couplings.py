"""Couplings of categorical distributions over trajectory indices.

Probability vectors are plain numpy arrays summing to one; joints are KxK
matrices carried inside CouplingMatrix together with their declared marginals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .transport import transport_plan

__all__ = [
    "CouplingMatrix",
    "validate_prob_vector",
    "tv_distance",
    "maximal_coupling_joint",
    "sample_maximal",
    "solve_transport",
    "sample_joint",
    "debiased_joint",
    "debiased_sample",
    "pairwise_sq_distances",
]

SUM_TOL = 1e-10


def validate_prob_vector(w, name="weights"):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if np.any(w < 0):
        raise ValueError(f"{name} has negative entries")
    total = w.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"{name} sums to {total}, not 1")
    return w / total


@dataclass(frozen=True)
class CouplingMatrix:
    """A joint over index pairs with declared marginals mu (rows), nu (cols)."""

    entries: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    marginal_tol: float = 1e-12

    def __post_init__(self):
        J = self.entries
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("joint must be a square matrix")
        if np.any(J < -SUM_TOL):
            raise ValueError("joint has negative entries")
        if abs(J.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"joint sums to {J.sum()}, not 1")
        row_err = np.max(np.abs(J.sum(axis=1) - self.mu))
        col_err = np.max(np.abs(J.sum(axis=0) - self.nu))
        if max(row_err, col_err) > self.marginal_tol:
            raise ValueError(
                f"marginal violation {max(row_err, col_err):.3g} "
                f"exceeds tolerance {self.marginal_tol:.3g}"
            )

    @property
    def size(self):
        return self.entries.shape[0]


def tv_distance(mu, nu) -> float:
    """Total variation distance between two probability vectors."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise ValueError("probability vectors must have equal length")
    return 0.5 * float(np.sum(np.abs(mu - nu)))


def maximal_coupling_joint(mu, nu) -> CouplingMatrix:
    """The analytic maximal coupling: overlap on the diagonal, independent
    residuals off it. Its trace is 1 - TV(mu, nu)."""
    mu = validate_prob_vector(mu, "mu")
    nu = validate_prob_vector(nu, "nu")
    if mu.shape != nu.shape:
        raise ValueError("probability vectors must have equal length")
    overlap = np.minimum(mu, nu)
    z = overlap.sum()
    joint = np.diag(overlap)
    if z < 1.0:
        res_mu = mu - overlap
        res_nu = nu - overlap
        joint = joint + np.outer(res_mu, res_nu) / (1.0 - z)
    return CouplingMatrix(entries=joint, mu=mu, nu=nu, marginal_tol=1e-12)


def _sample_categorical(w, rng):
    return int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right"))


def sample_maximal(mu, nu, rng):
    """Draw (i, j) from the maximal coupling without forming the joint."""
    mu = validate_prob_vector(mu, "mu")
    nu = validate_prob_vector(nu, "nu")
    overlap = np.minimum(mu, nu)
    z = overlap.sum()
    if rng.random() < z:
        i = _sample_categorical(overlap, rng)
        return i, i
    res_mu = mu - overlap
    res_nu = nu - overlap
    return _sample_categorical(res_mu, rng), _sample_categorical(res_nu, rng)


def pairwise_sq_distances(t1, t2) -> np.ndarray:
    """Squared Euclidean position distances between two equal-length trajectories."""
    if len(t1) != len(t2):
        raise ValueError("trajectories must have equal length")
    a = t1.positions
    b = t2.positions
    diff = a[:, None, :] - b[None, :, :]
    return np.sum(diff**2, axis=2)


def _solve_transport_linprog(mu, nu, cost):
    """LP fallback route (HiGHS dual simplex with tight tolerances)."""
    K = mu.size
    rows = sparse.kron(sparse.eye(K), np.ones((1, K)), format="csr")
    cols = sparse.kron(np.ones((1, K)), sparse.eye(K), format="csr")
    A_eq = sparse.vstack([rows, cols], format="csr")
    b_eq = np.concatenate([mu, nu])
    res = linprog(
        cost.ravel(),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = np.maximum(res.x.reshape(K, K), 0.0)
    return plan / plan.sum()


def solve_transport(mu, nu, D) -> CouplingMatrix:
    """Exact Kantorovich plan minimizing sum gamma_ij D_ij over Gamma(mu, nu).

    Solved with a transportation network simplex (exact; intended for K up to
    ~128), falling back to an LP solve if the simplex reports trouble. Among
    cost-0 optima with a zero diagonal the diagonal plan is preferred so
    identical trajectories stay paired after meeting.
    """
    mu = validate_prob_vector(mu, "mu")
    nu = validate_prob_vector(nu, "nu")
    D = np.asarray(D, dtype=float)
    K = mu.size
    if D.shape != (K, K) or not np.all(np.isfinite(D)):
        raise ValueError("distance matrix must be finite and KxK")
    diag = np.diagonal(D)
    if np.all(diag == 0.0) and np.allclose(mu, nu, atol=1e-12, rtol=0.0):
        # Cost 0 is attainable; break the tie in favor of the diagonal plan.
        return CouplingMatrix(entries=np.diag(mu), mu=mu, nu=nu, marginal_tol=1e-12)
    cost = D - 1e-13 * (1.0 + D.max()) * np.eye(K)  # infinitesimal diagonal preference
    try:
        plan = transport_plan(mu, nu, cost)
    except RuntimeError:
        plan = _solve_transport_linprog(mu, nu, cost)
    return CouplingMatrix(entries=plan, mu=mu, nu=nu, marginal_tol=1e-9)


def sample_joint(J: CouplingMatrix, rng):
    """Draw (i, j) with probability J_ij via flattened categorical sampling."""
    flat = J.entries.ravel()
    k = _sample_categorical(flat, rng)
    K = J.size
    return k // K, k % K


def debiased_joint(J0, mu, nu):
    """Mixture weight and residual marginals restoring exact marginals.

    Given a joint J0 whose marginals may disagree with (mu, nu), returns
    (alpha, mu_d, nu_d) such that alpha * J0 + (1 - alpha) * outer(mu_d, nu_d)
    lies in Gamma(mu, nu), with alpha maximal.
    """
    J0 = np.asarray(J0, dtype=float)
    mu = validate_prob_vector(mu, "mu")
    nu = validate_prob_vector(nu, "nu")
    if np.any(J0 < 0) or abs(J0.sum() - 1.0) > SUM_TOL:
        raise ValueError("J0 must be a nonnegative matrix summing to 1")
    mu0 = J0.sum(axis=1)
    nu0 = J0.sum(axis=0)
    ratios = []
    for tgt, got in ((mu, mu0), (nu, nu0)):
        pos = got > 0
        ratios.append(np.min(tgt[pos] / got[pos]) if np.any(pos) else np.inf)
    alpha = min(1.0, *ratios)
    if not np.isfinite(alpha) or np.isnan(alpha):
        raise ValueError("cannot debias a joint with all-zero marginals")
    if alpha >= 1.0 - 1e-12:
        # Roundoff in the marginal sums can land a hair under 1 for joints
        # already in Gamma(mu, nu); snap to the exact-coupling branch.
        return 1.0, None, None
    mu_d = np.maximum(mu - alpha * mu0, 0.0) / (1.0 - alpha)
    nu_d = np.maximum(nu - alpha * nu0, 0.0) / (1.0 - alpha)
    return alpha, mu_d, nu_d


def debiased_sample(J0, mu, nu, rng):
    """Sample (i, j) with exact marginals (mu, nu), maximally using J0."""
    alpha, mu_d, nu_d = debiased_joint(J0, mu, nu)
    J0 = np.asarray(J0, dtype=float)
    if rng.random() < alpha:
        K = J0.shape[0]
        k = _sample_categorical(J0.ravel(), rng)
        return k // K, k % K
    return _sample_categorical(mu_d, rng), _sample_categorical(nu_d, rng)
