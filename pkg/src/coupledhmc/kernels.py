"""Marginal and coupled Markov kernels.

Every kernel takes an explicit numpy Generator and is pure given it. Coupled
kernels are faithful: chains that are exactly equal stay equal bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import (
    pairwise_sq_distances,
    sample_joint,
    sample_maximal,
    solve_transport,
)
from .integrator import (
    PhasePoint,
    build_coupled_trajectories,
    build_trajectory,
    hamiltonian,
    leapfrog,
    trajectory_weights,
)
from .targets import TargetModel

__all__ = [
    "KernelConfig",
    "metropolis_hmc_step",
    "multinomial_hmc_step",
    "rwmh_step",
    "marginal_step",
    "sample_momentum_pair",
    "coupled_hmc_step",
    "coupled_rwmh_step",
    "mixture_step",
]

KERNEL_KINDS = ("metropolis", "multinomial")
COUPLING_KINDS = ("crn", "maximal", "w2")
MOMENTUM_MODES = ("shared", "contractive")

RWMH_LOOP_CAP = 10**6


@dataclass(frozen=True)
class KernelConfig:
    """Step size, trajectory length and the coupled-kernel selections."""

    eps: float
    L: int
    kernel_kind: str = "multinomial"
    coupling_kind: str = "w2"
    momentum_mode: str = "shared"
    kappa: float = 1.0
    rwmh_sigma: float = 1e-3
    mixture_alpha: float = 1.0 / 20.0

    def __post_init__(self):
        if self.eps <= 0 or self.L < 0:
            raise ValueError("eps must be positive and L nonnegative")
        if self.kernel_kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kernel_kind!r}")
        if self.coupling_kind not in COUPLING_KINDS:
            raise ValueError(f"unknown coupling kind {self.coupling_kind!r}")
        if self.momentum_mode not in MOMENTUM_MODES:
            raise ValueError(f"unknown momentum mode {self.momentum_mode!r}")
        if self.kernel_kind == "metropolis" and self.coupling_kind != "crn":
            raise ValueError("metropolis pairs only with the crn coupling")
        if self.kernel_kind == "multinomial" and self.coupling_kind == "crn":
            raise ValueError("multinomial pairs with maximal or w2 coupling")
        if not 0.0 < self.mixture_alpha < 1.0:
            raise ValueError("mixture_alpha must lie in (0, 1)")
        if self.rwmh_sigma <= 0 or self.kappa <= 0:
            raise ValueError("rwmh_sigma and kappa must be positive")


# ---------------------------------------------------------------------------
# Marginal kernels
# ---------------------------------------------------------------------------


def metropolis_hmc_step(target, q0, cfg, rng):
    """One end-point HMC step with Metropolis correction."""
    q0 = np.asarray(q0, dtype=float)
    p0 = rng.standard_normal(target.dim)
    z0 = PhasePoint(q=q0.copy(), p=p0)
    end = leapfrog(target, z0, cfg.eps, cfg.L)[-1]
    delta = hamiltonian(target, z0) - hamiltonian(target, end)
    if np.log(rng.random()) < delta:
        return end.q.copy()
    return q0.copy()


def multinomial_hmc_step(target, q0, cfg, rng):
    """One multinomial HMC step sampling from the whole trajectory."""
    q0 = np.asarray(q0, dtype=float)
    p0 = rng.standard_normal(target.dim)
    n_forward = int(rng.integers(0, cfg.L + 1))
    traj = build_trajectory(target, q0, p0, cfg.eps, n_forward, cfg.L - n_forward)
    idx = _sample_index(trajectory_weights(traj), rng)
    return traj.points[idx].q.copy()


def _sample_index(weights, rng):
    return int(np.searchsorted(np.cumsum(weights), rng.random() * weights.sum(), side="right"))


def rwmh_step(target, x, sigma, rng):
    """Plain random-walk Metropolis with proposal N(x, sigma^2 I)."""
    x = np.asarray(x, dtype=float)
    prop = x + sigma * rng.standard_normal(x.size)
    if np.log(rng.random()) <= target.potential(x) - target.potential(prop):
        return prop
    return x.copy()


def marginal_step(target, x, cfg, rng):
    """The marginal mixture kernel: RWMH with prob alpha, else HMC."""
    if rng.random() < cfg.mixture_alpha:
        return rwmh_step(target, x, cfg.rwmh_sigma, rng)
    if cfg.kernel_kind == "metropolis":
        return metropolis_hmc_step(target, x, cfg, rng)
    return multinomial_hmc_step(target, x, cfg, rng)


# ---------------------------------------------------------------------------
# Momentum couplings
# ---------------------------------------------------------------------------


def sample_momentum_pair(q1, q2, mode, rng, kappa=1.0):
    """Draw (p1, p2) with standard-normal marginals.

    Shared mode returns the same draw twice. Contractive mode shifts p1 along
    the position difference with an accept/reflect correction, which keeps the
    marginal of p2 standard normal.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    p1 = rng.standard_normal(q1.size)
    if mode == "shared":
        return p1, p1.copy()
    if mode != "contractive":
        raise ValueError(f"unknown momentum mode {mode!r}")
    delta = q1 - q2
    norm = np.linalg.norm(delta)
    if norm == 0.0:
        return p1, p1.copy()
    unit = delta / norm
    proj = float(unit @ p1)
    # Ratio of N(0,1) densities at proj + kappa*norm and proj, clipped at 1.
    log_ratio = -0.5 * (proj + kappa * norm) ** 2 + 0.5 * proj**2
    if np.log(rng.random()) < min(0.0, log_ratio):
        p2 = p1 + kappa * delta
    else:
        p2 = p1 - 2.0 * proj * unit
    return p1, p2


# ---------------------------------------------------------------------------
# Coupled kernels
# ---------------------------------------------------------------------------


def _duplicate(result):
    return result, result.copy()


def coupled_hmc_step(target, q1, q2, cfg, rng):
    """One step of the unified coupled HMC kernel.

    Shared forward/backward split; Metropolis-CRN shares a single uniform in
    both correction steps, multinomial variants couple the two index draws via
    the maximal or W2 coupling of the trajectory weight vectors.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if np.array_equal(q1, q2):
        if cfg.kernel_kind == "metropolis":
            return _duplicate(metropolis_hmc_step(target, q1, cfg, rng))
        return _duplicate(multinomial_hmc_step(target, q1, cfg, rng))

    p1, p2 = sample_momentum_pair(q1, q2, cfg.momentum_mode, rng, cfg.kappa)

    if cfg.kernel_kind == "metropolis":
        # End-point proposals: the forward split has probability one.
        z1 = PhasePoint(q=q1.copy(), p=p1)
        z2 = PhasePoint(q=q2.copy(), p=p2)
        end1 = leapfrog(target, z1, cfg.eps, cfg.L)[-1]
        end2 = leapfrog(target, z2, cfg.eps, cfg.L)[-1]
        log_u = np.log(rng.random())
        out1 = end1.q.copy() if log_u < hamiltonian(target, z1) - hamiltonian(target, end1) else q1.copy()
        out2 = end2.q.copy() if log_u < hamiltonian(target, z2) - hamiltonian(target, end2) else q2.copy()
        return out1, out2

    n_forward = int(rng.integers(0, cfg.L + 1))
    n_backward = cfg.L - n_forward
    if cfg.momentum_mode == "shared":
        t1, t2 = build_coupled_trajectories(target, q1, q2, p1, cfg.eps, cfg.L, n_forward)
    else:
        t1 = build_trajectory(target, q1, p1, cfg.eps, n_forward, n_backward)
        t2 = build_trajectory(target, q2, p2, cfg.eps, n_forward, n_backward)
    mu = trajectory_weights(t1)
    nu = trajectory_weights(t2)
    if cfg.coupling_kind == "maximal":
        i, j = sample_maximal(mu, nu, rng)
    else:
        plan = solve_transport(mu, nu, pairwise_sq_distances(t1, t2))
        i, j = sample_joint(plan, rng)
    return t1.points[i].q.copy(), t2.points[j].q.copy()


def _log_proposal(center, point, sigma):
    diff = point - center
    return -0.5 * float(diff @ diff) / sigma**2


def coupled_rwmh_step(target, x, y, sigma, rng):
    """Coupled RWMH: maximal coupling of the two Gaussian proposals followed
    by Metropolis tests sharing a single uniform."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    prop_x = x + sigma * rng.standard_normal(x.size)
    log_w = _log_proposal(x, prop_x, sigma) + np.log(rng.random())
    if log_w <= _log_proposal(y, prop_x, sigma):
        prop_y = prop_x
    else:
        for _ in range(RWMH_LOOP_CAP):
            prop_y = y + sigma * rng.standard_normal(y.size)
            log_w = _log_proposal(y, prop_y, sigma) + np.log(rng.random())
            if log_w > _log_proposal(x, prop_y, sigma):
                break
        else:
            raise RuntimeError(
                "coupled RWMH rejection loop exceeded cap; check sigma"
            )
    log_u = np.log(rng.random())
    u_x = target.potential(x) - target.potential(prop_x)
    u_y = target.potential(y) - target.potential(prop_y)
    out_x = prop_x.copy() if log_u <= min(0.0, u_x) else x.copy()
    out_y = prop_y.copy() if log_u <= min(0.0, u_y) else y.copy()
    return out_x, out_y


def mixture_step(target, x, y, cfg, rng):
    """The exact-meeting mixture: coupled RWMH with prob alpha, else coupled HMC."""
    if rng.random() < cfg.mixture_alpha:
        return coupled_rwmh_step(target, x, y, cfg.rwmh_sigma, rng)
    return coupled_hmc_step(target, x, y, cfg, rng)
