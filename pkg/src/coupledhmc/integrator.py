"""Leapfrog integration, trajectory construction and multinomial weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .targets import TargetModel

__all__ = [
    "PhasePoint",
    "Trajectory",
    "IntegrationError",
    "hamiltonian",
    "leapfrog",
    "build_trajectory",
    "build_coupled_trajectories",
    "trajectory_weights",
]


class IntegrationError(RuntimeError):
    """Raised when a leapfrog step produces a non-finite gradient."""

    def __init__(self, step, message="non-finite gradient during leapfrog"):
        super().__init__(f"{message} (step {step})")
        self.step = step


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if self.q.shape != self.p.shape:
            raise ValueError("position and momentum must have equal length")


@dataclass(frozen=True)
class Trajectory:
    """An ordered leapfrog trajectory with the origin at index origin_offset.

    points[origin_offset] is the starting state with momentum +p0; indices
    below it come from integrating with -p0 (momenta stored as produced, not
    re-negated), indices above from +p0.
    """

    points: tuple
    energies: np.ndarray
    origin_offset: int
    step_size: float

    def __len__(self):
        return len(self.points)

    @property
    def positions(self):
        return np.array([pt.q for pt in self.points])


def hamiltonian(target: TargetModel, z: PhasePoint) -> float:
    """Total energy U(q) + |p|^2 / 2."""
    return target.potential(z.q) + 0.5 * float(z.p @ z.p)


def leapfrog(target: TargetModel, z0: PhasePoint, eps: float, n: int):
    """Integrate n leapfrog steps from z0; returns the n points after z0.

    One gradient evaluation per distinct position: the closing half-kick of a
    step and the opening half-kick of the next reuse the same gradient value,
    which keeps the result bit-equal to the naive recursion.
    """
    if eps <= 0:
        raise ValueError("step size must be positive")
    if n < 1:
        raise ValueError("need at least one step")
    q = np.array(z0.q, dtype=float, copy=True)
    p = np.array(z0.p, dtype=float, copy=True)
    grad = target.gradient(q)
    if not np.all(np.isfinite(grad)):
        raise IntegrationError(0)
    out = []
    for step in range(1, n + 1):
        p_half = p - 0.5 * eps * grad
        q = q + eps * p_half
        grad = target.gradient(q)
        if not np.all(np.isfinite(grad)):
            raise IntegrationError(step)
        p = p_half - 0.5 * eps * grad
        out.append(PhasePoint(q=q.copy(), p=p.copy()))
    return out


def build_trajectory(target, q, p0, eps, n_forward, n_backward):
    """Trajectory with n_backward steps from (q, -p0) and n_forward from (q, +p0)."""
    q = np.asarray(q, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    origin = PhasePoint(q=q.copy(), p=p0.copy())
    forward = leapfrog(target, origin, eps, n_forward) if n_forward else []
    if n_backward:
        backward = leapfrog(target, PhasePoint(q=q.copy(), p=-p0), eps, n_backward)
    else:
        backward = []
    points = tuple(reversed(backward)) + (origin,) + tuple(forward)
    energies = np.array([hamiltonian(target, z) for z in points])
    return Trajectory(
        points=points, energies=energies, origin_offset=n_backward, step_size=eps
    )


def build_coupled_trajectories(target, q1, q2, p0, eps, L, L_f):
    """Build both chains' trajectories with shared momentum and shared split."""
    if not 0 <= L_f <= L:
        raise ValueError("forward step count must lie in [0, L]")
    L_b = L - L_f
    t1 = build_trajectory(target, q1, p0, eps, L_f, L_b)
    t2 = build_trajectory(target, q2, p0, eps, L_f, L_b)
    return t1, t2


def trajectory_weights(traj: Trajectory) -> np.ndarray:
    """Multinomial weights proportional to exp(-energy), max-subtracted.

    Non-finite energies get weight zero (divergent-point convention); it is an
    error for every point to be divergent.
    """
    energies = np.where(np.isfinite(traj.energies), traj.energies, np.inf)
    lowest = np.min(energies)
    if not np.isfinite(lowest):
        raise ValueError("all trajectory energies are non-finite")
    w = np.exp(lowest - energies)
    return w / w.sum()
