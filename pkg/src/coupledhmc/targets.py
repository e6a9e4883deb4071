"""Target distributions: built-in toys and the two real-data posteriors.

A target is a potential U(q) with pi(q) proportional to exp(-U(q)) together
with its analytic gradient. Everything here is immutable after construction
and safe to share across workers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_solve, cholesky

__all__ = [
    "TargetModel",
    "LogisticRegressionData",
    "LGCPConfig",
    "make_builtin_target",
    "load_german_credit",
    "build_logistic_target",
    "build_lgcp_target",
    "load_point_pattern",
    "synthetic_logistic_data",
    "synthetic_lgcp_counts",
]

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class TargetModel:
    """A target distribution defined by its potential and gradient."""

    dim: int
    name: str
    potential: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")


def _gaussian(dim):
    def potential(q):
        return 0.5 * float(q @ q)

    def gradient(q):
        return np.array(q, dtype=float, copy=True)

    return TargetModel(dim=dim, name="gaussian", potential=potential, gradient=gradient)


# Three well-separated modes with a common isotropic scale of 0.25.
_GMM_MEANS = np.array([[-1.0, -1.0], [0.0, 0.0], [1.0, 1.0]])
_GMM_WEIGHTS = np.array([0.25, 0.4, 0.35])
_GMM_SIGMA = 0.25


def _gmm():
    means = _GMM_MEANS
    log_w = np.log(_GMM_WEIGHTS)
    inv_var = 1.0 / _GMM_SIGMA**2

    def _component_logps(q):
        diffs = q[None, :] - means
        sq = np.sum(diffs**2, axis=1)
        # Component normalizers are equal; keep them so exp(-U) is the true
        # mixture density.
        return log_w - 0.5 * inv_var * sq - LOG_2PI - 2.0 * np.log(_GMM_SIGMA), diffs

    def potential(q):
        logps, _ = _component_logps(q)
        mx = np.max(logps)
        return -(mx + np.log(np.sum(np.exp(logps - mx))))

    def gradient(q):
        logps, diffs = _component_logps(q)
        mx = np.max(logps)
        resp = np.exp(logps - mx)
        resp /= resp.sum()
        return inv_var * (resp @ diffs)

    return TargetModel(dim=2, name="gmm", potential=potential, gradient=gradient)


def _banana():
    def potential(q):
        x1, x2 = q
        return (1.0 - x1) ** 2 + 10.0 * (x2 - x1**2) ** 2

    def gradient(q):
        x1, x2 = q
        g1 = -2.0 * (1.0 - x1) - 40.0 * x1 * (x2 - x1**2)
        g2 = 20.0 * (x2 - x1**2)
        return np.array([g1, g2])

    return TargetModel(dim=2, name="banana", potential=potential, gradient=gradient)


def make_builtin_target(name, dim=None, params=None):
    """Construct one of the built-in targets: gaussian, gmm, banana."""
    if name == "gaussian":
        if dim is None:
            dim = 2
        if dim < 1:
            raise ValueError("gaussian target needs dim >= 1")
        return _gaussian(dim)
    if name == "gmm":
        if dim is not None and dim != 2:
            raise ValueError("gmm target is fixed at dim 2")
        return _gmm()
    if name == "banana":
        if dim is not None and dim != 2:
            raise ValueError("banana target is fixed at dim 2")
        return _banana()
    raise ValueError(f"unknown builtin target {name!r}")


# ---------------------------------------------------------------------------
# Bayesian logistic regression on the German credit data
# ---------------------------------------------------------------------------

N_RAW_FEATURES = 24
N_OBSERVATIONS = 1000
N_INTERACTIONS = N_RAW_FEATURES * (N_RAW_FEATURES - 1) // 2
DEFAULT_PRIOR_RATE = 0.01


@dataclass(frozen=True)
class LogisticRegressionData:
    """Standardized design matrix (raw features + pairwise interactions)."""

    design: np.ndarray  # (1000, 300)
    labels: np.ndarray  # (1000,) in {0, 1}
    rate: float = DEFAULT_PRIOR_RATE

    def __post_init__(self):
        if self.design.shape != (N_OBSERVATIONS, N_RAW_FEATURES + N_INTERACTIONS):
            raise ValueError(f"design has shape {self.design.shape}")
        if not np.all(np.isin(self.labels, (0, 1))):
            raise ValueError("labels must be in {0, 1}")
        if self.rate <= 0:
            raise ValueError("prior rate must be positive")


def _standardize(columns, context):
    mean = columns.mean(axis=0)
    std = columns.std(axis=0, ddof=1)
    zero = np.flatnonzero(std == 0.0)
    if zero.size:
        raise ValueError(f"constant column {zero[0]} in {context}")
    return (columns - mean) / std


def _assemble_design(raw):
    """Standardize raw features, append standardized pairwise products."""
    z = _standardize(raw, "raw features")
    pairs = [z[:, i] * z[:, j] for i in range(z.shape[1]) for j in range(i + 1, z.shape[1])]
    inter = _standardize(np.column_stack(pairs), "interactions")
    return np.hstack([z, inter])


def load_german_credit(path, rate=DEFAULT_PRIOR_RATE):
    """Load the UCI numeric German-credit file (24 attributes + {1,2} label)."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    table = np.loadtxt(path)
    if table.ndim != 2 or table.shape[1] != N_RAW_FEATURES + 1:
        raise ValueError(
            f"expected {N_RAW_FEATURES + 1} columns, got shape {table.shape}"
        )
    raw, labels = table[:, :-1], table[:, -1]
    if not np.all(np.isin(labels, (1, 2))):
        raise ValueError("class labels must be in {1, 2}")
    return LogisticRegressionData(
        design=_assemble_design(raw), labels=(labels == 2).astype(int), rate=rate
    )


def synthetic_logistic_data(rate=DEFAULT_PRIOR_RATE, seed=2024):
    """A seeded stand-in for the German credit data so experiments run offline."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((N_OBSERVATIONS, N_RAW_FEATURES))
    design = _assemble_design(raw)
    theta = rng.normal(scale=0.5, size=design.shape[1])
    logits = design @ theta
    labels = (rng.random(N_OBSERVATIONS) < 1.0 / (1.0 + np.exp(-logits))).astype(int)
    return LogisticRegressionData(design=design, labels=labels, rate=rate)


def build_logistic_target(data: LogisticRegressionData) -> TargetModel:
    """Posterior over theta = (gamma, a, b) with gamma = log s^2.

    U(theta) = Bernoulli-logit negative log likelihood with logits a + x b
    plus negative log priors a ~ N(0, s^2), b ~ N(0, s^2 I), s^2 ~ Exp(rate),
    minus the log-Jacobian gamma of the s^2 = exp(gamma) reparameterization.
    """
    X = data.design
    y = data.labels.astype(float)
    lam = data.rate
    n_coef = X.shape[1]
    dim = n_coef + 2

    def potential(theta):
        gamma, a, b = theta[0], theta[1], theta[2:]
        s2 = np.exp(gamma)
        logits = a + X @ b
        # log(1 + exp(logits)) - y * logits, stably
        nll = float(np.sum(np.logaddexp(0.0, logits) - y * logits))
        prior_a = 0.5 * (LOG_2PI + gamma) + 0.5 * a**2 / s2
        prior_b = 0.5 * n_coef * (LOG_2PI + gamma) + 0.5 * float(b @ b) / s2
        prior_s2 = lam * s2 - np.log(lam)
        return nll + prior_a + prior_b + prior_s2 - gamma

    def gradient(theta):
        gamma, a, b = theta[0], theta[1], theta[2:]
        s2 = np.exp(gamma)
        logits = a + X @ b
        resid = 1.0 / (1.0 + np.exp(-logits)) - y
        g = np.empty(dim)
        g[0] = (
            -0.5 * (a**2 + float(b @ b)) / s2
            + 0.5 * (n_coef + 1)
            + lam * s2
            - 1.0
        )
        g[1] = float(np.sum(resid)) + a / s2
        g[2:] = X.T @ resid + b / s2
        return g

    return TargetModel(dim=dim, name="logistic", potential=potential, gradient=gradient)


# ---------------------------------------------------------------------------
# Log-Gaussian Cox point process
# ---------------------------------------------------------------------------


def _exponential_covariance(n, s2, b):
    idx = np.indices((n, n)).reshape(2, -1).T.astype(float)
    dists = np.linalg.norm(idx[:, None, :] - idx[None, :, :], axis=2)
    return s2 * np.exp(-dists / (n * b))


@dataclass(frozen=True)
class LGCPConfig:
    """Grid, counts and GP-prior hyperparameters for the Cox process model."""

    n: int
    counts: np.ndarray
    s2: float = 1.91
    b: float = 1.0 / 33.0
    mu: float = field(default=np.log(126.0) - 1.91 / 2.0)
    cell_area: float = field(init=False)
    chol_factor: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n < 1 or self.s2 <= 0 or self.b <= 0:
            raise ValueError("n, s2 and b must be positive")
        counts = np.asarray(self.counts)
        if counts.shape != (self.n, self.n):
            raise ValueError(f"counts must be {self.n}x{self.n}, got {counts.shape}")
        if np.any(counts < 0) or not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("counts must be nonnegative integers")
        cov = _exponential_covariance(self.n, self.s2, self.b)
        try:
            factor = cholesky(cov, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance is not positive definite") from exc
        object.__setattr__(self, "cell_area", self.n ** (-2))
        object.__setattr__(self, "chol_factor", factor)


def load_point_pattern(path, n):
    """Bin "x,y" rows on the unit square into an n x n count grid."""
    counts = np.zeros((n, n), dtype=int)
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"malformed row {lineno}: {line!r}")
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ValueError(f"malformed row {lineno}: {line!r}") from exc
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"coordinate outside [0,1] at row {lineno}")
            i = min(int(np.floor(n * x)), n - 1)
            j = min(int(np.floor(n * y)), n - 1)
            counts[i, j] += 1
    return counts


def synthetic_lgcp_counts(n, s2=1.91, b=1.0 / 33.0, mu=None, seed=2024):
    """Sample a count grid from the generative model itself (fixed seed)."""
    if mu is None:
        mu = np.log(126.0) - s2 / 2.0
    rng = np.random.default_rng(seed)
    cov = _exponential_covariance(n, s2, b)
    factor = cholesky(cov, lower=True)
    x = mu + factor @ rng.standard_normal(n * n)
    lam = n ** (-2) * np.exp(x)
    return rng.poisson(lam).reshape(n, n)


def build_lgcp_target(config: LGCPConfig) -> TargetModel:
    """Posterior over the latent log-intensity field x (length n^2)."""
    n = config.n
    y = np.asarray(config.counts, dtype=float).reshape(-1)
    a = config.cell_area
    mu = config.mu
    factor = (config.chol_factor, True)

    def potential(x):
        lam = a * np.exp(x)
        centered = x - mu
        quad = float(centered @ cho_solve(factor, centered))
        return -float(y @ x - np.sum(lam)) + 0.5 * quad

    def gradient(x):
        lam = a * np.exp(x)
        return -(y - lam) + cho_solve(factor, x - mu)

    return TargetModel(dim=n * n, name="lgcp", potential=potential, gradient=gradient)
