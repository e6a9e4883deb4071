"""Coupled-chain driver, unbiased estimators and inefficiency diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .kernels import KernelConfig, marginal_step, mixture_step
from .targets import TargetModel

__all__ = [
    "CoupledRun",
    "EstimateReport",
    "run_coupled_pair",
    "unbiased_estimate",
    "expected_cost",
    "ar_spectral_variance",
    "inefficiency_report",
    "relaxed_meeting_time",
    "default_moments",
    "choose_k_m",
    "spawn_rngs",
]


@dataclass
class CoupledRun:
    """Paired chain histories with the lag-1 offset.

    x_states has one more row than y_states. When the chains met, tau is the
    first n >= 1 with X_n == Y_{n-1}; otherwise tau is None and max_iter
    records the cap. distance_trace[n-1] = ||X_n - Y_{n-1}||.
    """

    x_states: np.ndarray
    y_states: np.ndarray
    tau: Optional[int]
    max_iter: int
    distance_trace: np.ndarray = field(repr=False)

    @property
    def met(self):
        return self.tau is not None


def spawn_rngs(seed, count):
    """Independent child generators derived from (seed, run index)."""
    return [np.random.default_rng(np.random.SeedSequence([int(seed), r])) for r in range(count)]


def run_coupled_pair(
    target: TargetModel,
    cfg: KernelConfig,
    init_sampler: Callable,
    max_iter: int,
    rng: np.random.Generator,
    extend_to: int = 0,
) -> CoupledRun:
    """Run one lag-1 coupled pair until exact meeting or max_iter.

    init_sampler(rng) must return the initial pair (X0, Y0). After meeting,
    the X chain is continued with the marginal kernel until it holds at least
    extend_to + 1 states, so time-averaged estimators up to m = extend_to are
    computable.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x0, y0 = init_sampler(rng)
    xs = [np.asarray(x0, dtype=float)]
    ys = [np.asarray(y0, dtype=float)]
    xs.append(marginal_step(target, xs[0], cfg, rng))
    distances = [float(np.linalg.norm(xs[1] - ys[0]))]
    tau = 1 if np.array_equal(xs[1], ys[0]) else None
    n = 1
    while tau is None and n < max_iter:
        try:
            x_next, y_next = mixture_step(target, xs[n], ys[n - 1], cfg, rng)
        except Exception as exc:
            raise RuntimeError(f"coupled kernel failed at iteration {n + 1}") from exc
        xs.append(x_next)
        ys.append(y_next)
        n += 1
        distances.append(float(np.linalg.norm(xs[n] - ys[n - 1])))
        if np.array_equal(xs[n], ys[n - 1]):
            tau = n
    while len(xs) - 1 < extend_to:
        xs.append(marginal_step(target, xs[-1], cfg, rng))
    return CoupledRun(
        x_states=np.array(xs),
        y_states=np.array(ys),
        tau=tau,
        max_iter=max_iter,
        distance_trace=np.array(distances),
    )


def unbiased_estimate(run: CoupledRun, h, k: int, m: int):
    """Time-averaged unbiased estimator H_{k:m}.

    H_i = h(X_i) + sum_{n=i+1}^{tau-1} (h(X_n) - h(Y_{n-1})); the result is
    the average of H_i for i = k..m. h may return a scalar or a vector.
    """
    if not run.met:
        raise ValueError("estimator undefined: chains did not meet")
    if k < 0 or m < k:
        raise ValueError("need 0 <= k <= m")
    if m >= run.x_states.shape[0]:
        raise ValueError(f"m={m} exceeds recorded horizon {run.x_states.shape[0] - 1}")
    tau = run.tau
    hx = np.atleast_2d(np.array([np.atleast_1d(h(x)) for x in run.x_states[: max(m, tau - 1) + 1]], dtype=float))
    total = np.zeros(hx.shape[1])
    for i in range(k, m + 1):
        H_i = hx[i].copy()
        for n in range(i + 1, tau):
            H_i += hx[n] - np.atleast_1d(h(run.y_states[n - 1]))
        total += H_i
    result = total / (m - k + 1)
    return float(result[0]) if result.size == 1 else result


def expected_cost(taus: Sequence[int], m: int) -> float:
    """Average compute charged to one coupled estimate."""
    taus = np.asarray(list(taus), dtype=float)
    if taus.size == 0:
        raise ValueError("no meeting times supplied")
    if np.any(taus < 1):
        raise ValueError("meeting times must be >= 1")
    return float(np.mean(2.0 * (taus - 1.0) + np.maximum(1.0, m + 1.0 - taus)))


def _levinson_durbin(autocov, order):
    """Yule-Walker coefficients and prediction variance via Levinson-Durbin."""
    phi = np.zeros(order)
    v = autocov[0]
    for k in range(1, order + 1):
        acc = autocov[k] - phi[: k - 1] @ autocov[k - 1 : 0 : -1]
        refl = acc / v
        new = np.zeros(order)
        new[: k - 1] = phi[: k - 1] - refl * phi[: k - 1][::-1]
        new[k - 1] = refl
        phi = new
        v *= 1.0 - refl**2
    return phi[:order], v


def ar_spectral_variance(samples) -> float:
    """Spectral density at frequency zero of a Yule-Walker AR fit.

    Order is selected by AIC up to floor(10 log10 N), mirroring the classic
    AR-based estimator of MCMC asymptotic variance.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 50:
        raise ValueError("need at least 50 samples")
    n = x.size
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        raise ValueError("series is constant")
    max_order = min(int(np.floor(10.0 * np.log10(n))), n - 1)
    lags = np.arange(max_order + 1)
    autocov = np.array([float(x[: n - l] @ x[l:]) / n for l in lags])
    best = (n * np.log(var), 0, np.zeros(0), var)
    for p in range(1, max_order + 1):
        phi, v = _levinson_durbin(autocov, p)
        if v <= 0:
            break
        aic = n * np.log(v) + 2.0 * p
        if aic < best[0]:
            best = (aic, p, phi, v)
    _, _, phi, v = best
    return float(v / (1.0 - phi.sum()) ** 2)


def default_moments(dim):
    """First and second coordinate moments: h(x) = (x_1..x_d, x_1^2..x_d^2)."""

    def h(x):
        return np.concatenate([x, x**2])

    return h


@dataclass
class EstimateReport:
    estimates: np.ndarray  # mean estimate per test function
    variances: np.ndarray  # across-run sample variance per test function
    cost: float
    inefficiency: np.ndarray  # cost * variance per test function
    relative_inefficiency: Optional[float]
    run_count: int
    unmet_count: int
    k: int
    m: int


def inefficiency_report(
    runs: Sequence[CoupledRun],
    h,
    k: int,
    m: int,
    reference_chain: Optional[np.ndarray] = None,
) -> EstimateReport:
    """Across-run estimator statistics and the cost/inefficiency diagnostics.

    Not-met runs are excluded from the statistics and reported via
    unmet_count. With a reference chain (rows = samples), the relative
    inefficiency is total inefficiency over total AR-estimated asymptotic
    variance of the same test functions.
    """
    met = [r for r in runs if r.met]
    if len(met) < 2:
        raise ValueError(
            f"need at least 2 met runs, got {len(met)} of {len(runs)}"
        )
    per_run = np.array([np.atleast_1d(unbiased_estimate(r, h, k, m)) for r in met])
    variances = per_run.var(axis=0, ddof=1)
    cost = expected_cost([r.tau for r in met], m)
    ineff = cost * variances
    relative = None
    if reference_chain is not None:
        ref = np.atleast_2d(np.asarray(reference_chain, dtype=float))
        series = np.array([np.atleast_1d(h(row)) for row in ref])
        asym = np.array([ar_spectral_variance(series[:, j]) for j in range(series.shape[1])])
        relative = float(ineff.sum() / asym.sum())
    return EstimateReport(
        estimates=per_run.mean(axis=0),
        variances=variances,
        cost=cost,
        inefficiency=ineff,
        relative_inefficiency=relative,
        run_count=len(met),
        unmet_count=len(runs) - len(met),
        k=k,
        m=m,
    )


def relaxed_meeting_time(run: CoupledRun, delta: float):
    """First iteration n with ||X_n - Y_{n-1}|| <= delta, or None."""
    hits = np.flatnonzero(run.distance_trace <= delta)
    return int(hits[0]) + 1 if hits.size else None


def choose_k_m(taus, k_rule="median", m_mult=5):
    """Burn-in and horizon heuristics from the empirical meeting times."""
    taus = np.asarray(list(taus), dtype=float)
    if k_rule == "median":
        k = int(np.ceil(np.median(taus)))
    elif k_rule == "q90":
        k = int(np.ceil(np.quantile(taus, 0.9)))
    else:
        raise ValueError(f"unknown k rule {k_rule!r}")
    k = max(k, 1)
    return k, k * int(m_mult)
