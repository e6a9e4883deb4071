"""Batch experiment harness: meeting-time sweeps, unbiased estimation,
the coupling illustration and the toy studies. Emits CSV/JSON for plotting.

Subcommands: meet, estimate, illustrate, toys. Every output file embeds the
seed, the fully resolved configuration and the artifact version, so rerunning
an invocation is byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .couplings import maximal_coupling_joint, pairwise_sq_distances, sample_joint, solve_transport
from .estimation import (
    choose_k_m,
    inefficiency_report,
    default_moments,
    run_coupled_pair,
    unbiased_estimate,
)
from .integrator import build_trajectory, trajectory_weights
from .kernels import KernelConfig, marginal_step
from .targets import (
    LGCPConfig,
    build_lgcp_target,
    build_logistic_target,
    load_german_credit,
    load_point_pattern,
    make_builtin_target,
    synthetic_lgcp_counts,
    synthetic_logistic_data,
)

COUPLING_TO_KERNEL = {"crn": "metropolis", "maximal": "multinomial", "w2": "multinomial"}


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def build_target(name, dim=None, data=None):
    """Resolve a target spec; real-data targets fall back to seeded synthetics."""
    if name in ("gaussian", "gmm", "banana"):
        return make_builtin_target(name, dim=dim)
    if name == "logistic":
        lr = load_german_credit(data) if data else synthetic_logistic_data()
        return build_logistic_target(lr)
    if name == "lgcp":
        n = dim or 16
        counts = load_point_pattern(data, n) if data else synthetic_lgcp_counts(n)
        return build_lgcp_target(LGCPConfig(n=n, counts=counts))
    raise ValueError(f"unknown target {name!r}")


def default_init_sampler(target):
    """Independent initial draws: Unif([0,1]^2) for the 2D toys, N(0,I) otherwise."""
    if target.name in ("gmm", "banana"):

        def sampler(rng):
            return rng.random(2), rng.random(2)

    else:

        def sampler(rng):
            return rng.standard_normal(target.dim), rng.standard_normal(target.dim)

    return sampler


def _metadata(args, command):
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {
        "artifact_version": __version__,
        "command": command,
        "config": resolved,
        "seed": args.seed,
    }


def _write_csv(path, metadata, header, rows):
    buf = io.StringIO()
    buf.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _write_json(path, metadata, payload):
    with open(path, "w") as fh:
        json.dump({"metadata": metadata, **payload}, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _summary_path(path):
    root, ext = os.path.splitext(path)
    return f"{root}.summary{ext or '.csv'}"


def _fmt(x):
    return repr(round(float(x), 10))


# ---------------------------------------------------------------------------
# meet
# ---------------------------------------------------------------------------


def cmd_meet(args):
    target = build_target(args.target, args.dim, args.data)
    init = default_init_sampler(target)
    couplings = args.coupling.split(",")
    rows = []
    summary = []
    cell = 0
    for coupling in couplings:
        kernel = args.kernel or COUPLING_TO_KERNEL[coupling]
        for eps in args.eps:
            for L in args.steps:
                cfg = KernelConfig(
                    eps=eps,
                    L=L,
                    kernel_kind=kernel,
                    coupling_kind=coupling,
                    momentum_mode=args.momentum,
                    kappa=args.kappa,
                    rwmh_sigma=args.sigma,
                    mixture_alpha=args.alpha,
                )
                taus = []
                for r in range(args.runs):
                    rng = np.random.default_rng(
                        np.random.SeedSequence([args.seed, cell, r])
                    )
                    run = run_coupled_pair(target, cfg, init, args.max_iters, rng)
                    tau = run.tau if run.met else args.max_iters
                    taus.append(tau)
                    rows.append(
                        [r, target.name, kernel, coupling, args.momentum,
                         _fmt(eps), L, tau, str(run.met).lower()]
                    )
                taus = np.array(taus, dtype=float)
                summary.append(
                    [target.name, kernel, coupling, args.momentum, _fmt(eps), L,
                     _fmt(taus.mean()), _fmt(taus.std(ddof=1) if len(taus) > 1 else 0.0),
                     int(np.sum(taus < args.max_iters))]
                )
                cell += 1
    meta = _metadata(args, "meet")
    header = ["run", "target", "kernel", "coupling", "momentum", "eps", "L", "tau", "met"]
    sum_header = ["target", "kernel", "coupling", "momentum", "eps", "L",
                  "tau_mean", "tau_std", "met_count"]
    if args.format == "json":
        _write_json(args.out, meta, {
            "rows": [dict(zip(header, r)) for r in rows],
            "summary": [dict(zip(sum_header, r)) for r in summary],
        })
    else:
        _write_csv(args.out, meta, header, rows)
        _write_csv(_summary_path(args.out), meta, sum_header, summary)
    return 0


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def cmd_estimate(args):
    target = build_target(args.target, args.dim, args.data)
    init = default_init_sampler(target)
    kernel = args.kernel or COUPLING_TO_KERNEL[args.coupling]
    cfg = KernelConfig(
        eps=args.eps[0],
        L=args.steps[0],
        kernel_kind=kernel,
        coupling_kind=args.coupling,
        momentum_mode=args.momentum,
        kappa=args.kappa,
        rwmh_sigma=args.sigma,
        mixture_alpha=args.alpha,
    )
    prelim_taus = []
    for r in range(args.prelim_runs):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0, r]))
        run = run_coupled_pair(target, cfg, init, args.max_iters, rng)
        if run.met:
            prelim_taus.append(run.tau)
    if len(prelim_taus) < 2:
        print(
            json.dumps({"error": "too-few-met-runs",
                        "unmet_fraction": 1.0 - len(prelim_taus) / args.prelim_runs}),
            file=sys.stderr,
        )
        return 1
    k, m = choose_k_m(prelim_taus, args.k_rule, args.m_mult)
    runs = []
    for r in range(args.runs):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1, r]))
        runs.append(run_coupled_pair(target, cfg, init, args.max_iters, rng, extend_to=m))
    h = default_moments(target.dim)
    reference = None
    if args.reference_samples > 0:
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 2]))
        x = init(rng)[0]
        chain = []
        for _ in range(args.reference_burnin + args.reference_samples):
            x = marginal_step(target, x, cfg, rng)
            chain.append(x)
        reference = np.array(chain[args.reference_burnin:])
    try:
        report = inefficiency_report(runs, h, k, m, reference_chain=reference)
    except ValueError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    meta = _metadata(args, "estimate")
    meta["k_rule"] = args.k_rule
    meta["m_mult"] = args.m_mult
    payload = {
        "k": k,
        "m": m,
        "estimates": [float(v) for v in report.estimates],
        "variances": [float(v) for v in report.variances],
        "expected_cost": report.cost,
        "inefficiency": [float(v) for v in report.inefficiency],
        "relative_inefficiency": report.relative_inefficiency,
        "run_count": report.run_count,
        "unmet_count": report.unmet_count,
    }
    if args.format == "json":
        _write_json(args.out, meta, payload)
    else:
        header = ["index", "estimate", "variance", "inefficiency"]
        rows = [
            [i, _fmt(e), _fmt(v), _fmt(ineff)]
            for i, (e, v, ineff) in enumerate(
                zip(report.estimates, report.variances, report.inefficiency)
            )
        ]
        _write_csv(args.out, meta, header, rows)
        sum_rows = [[k, m, _fmt(report.cost),
                     "" if report.relative_inefficiency is None else _fmt(report.relative_inefficiency),
                     report.run_count, report.unmet_count]]
        _write_csv(_summary_path(args.out), meta,
                   ["k", "m", "expected_cost", "relative_inefficiency", "runs", "unmet"],
                   sum_rows)
    return 0


# ---------------------------------------------------------------------------
# illustrate
# ---------------------------------------------------------------------------

ILLUSTRATION_REFERENCE = {"w2": 1.37, "maximal": 1.97}


def illustration(eps=0.45, n_steps=7, n_samples=100_000, seed=0):
    """The two-trajectory coupling comparison on the 2D standard Gaussian."""
    target = make_builtin_target("gaussian", dim=2)
    q1 = np.array([0.5, 2.0])
    q2 = np.array([0.5, -1.0])
    p0 = np.array([1.0, 1.0])
    t1 = build_trajectory(target, q1, p0, eps, n_steps, 0)
    t2 = build_trajectory(target, q2, p0, eps, n_steps, 0)
    mu = trajectory_weights(t1)
    nu = trajectory_weights(t2)
    D = pairwise_sq_distances(t1, t2)
    dist = np.sqrt(D)
    maximal = maximal_coupling_joint(mu, nu)
    w2 = solve_transport(mu, nu, D)
    rng = np.random.default_rng(seed)
    K = len(mu)
    emp_max = np.zeros((K, K))
    emp_w2 = np.zeros((K, K))
    for _ in range(n_samples):
        i, j = sample_joint(maximal, rng)
        emp_max[i, j] += 1
        i, j = sample_joint(w2, rng)
        emp_w2[i, j] += 1
    emp_max /= n_samples
    emp_w2 /= n_samples
    return {
        "eps": eps,
        "n_steps": n_steps,
        "weights_chain1": mu.tolist(),
        "weights_chain2": nu.tolist(),
        "maximal_joint": maximal.entries.tolist(),
        "w2_joint": w2.entries.tolist(),
        "empirical_maximal_joint": emp_max.tolist(),
        "empirical_w2_joint": emp_w2.tolist(),
        "expected_distance": {
            "maximal": float(np.sum(maximal.entries * dist)),
            "w2": float(np.sum(w2.entries * dist)),
        },
        "paper_reference_distance": ILLUSTRATION_REFERENCE,
    }


def cmd_illustrate(args):
    result = illustration(eps=args.eps[0], seed=args.seed)
    meta = _metadata(args, "illustrate")
    _write_json(args.out, meta, result)
    exp = result["expected_distance"]
    print(
        f"expected distance: w2={exp['w2']:.4f} (paper 1.37), "
        f"maximal={exp['maximal']:.4f} (paper 1.97)"
    )
    return 0


# ---------------------------------------------------------------------------
# toys
# ---------------------------------------------------------------------------


def gmm_meeting_efficiency(runs=500, max_iters=100, seed=0, methods=("crn", "maximal", "w2")):
    """Meeting efficiency i_tau on the 3-component Gaussian mixture.

    Total trajectory length sweeps from 1 to 3 two ways: growing eps at L=10
    and growing L at eps=0.1.
    """
    target = make_builtin_target("gmm")
    init = default_init_sampler(target)
    sweeps = [("eps_sweep", [(e, 10) for e in (0.1, 0.15, 0.2, 0.25, 0.3)]),
              ("L_sweep", [(0.1, L) for L in (10, 15, 20, 25, 30)])]
    rows = []
    cell = 0
    for method in methods:
        for mode, grid in sweeps:
            for eps, L in grid:
                cfg = KernelConfig(
                    eps=eps, L=L,
                    kernel_kind=COUPLING_TO_KERNEL[method],
                    coupling_kind=method,
                )
                met = 0
                for r in range(runs):
                    rng = np.random.default_rng(np.random.SeedSequence([seed, cell, r]))
                    run = run_coupled_pair(target, cfg, init, max_iters, rng)
                    met += run.met
                rows.append({
                    "method": method, "mode": mode,
                    "total_length": round(eps * L, 10), "i_tau": met / runs,
                })
                cell += 1
    return rows


def banana_meeting_table(runs=500, max_iters=500, seed=0, kappa=1.0,
                         methods=("crn", "maximal", "w2")):
    """Mean and std of tau on the Rosenbrock target for both momentum modes."""
    target = make_builtin_target("banana")
    init = default_init_sampler(target)
    rows = []
    cell = 1000
    for momentum in ("shared", "contractive"):
        for method in methods:
            cfg = KernelConfig(
                eps=1.0 / 50.0, L=50,
                kernel_kind=COUPLING_TO_KERNEL[method],
                coupling_kind=method,
                momentum_mode=momentum,
                kappa=kappa,
            )
            taus = []
            met = 0
            for r in range(runs):
                rng = np.random.default_rng(np.random.SeedSequence([seed, cell, r]))
                run = run_coupled_pair(target, cfg, init, max_iters, rng)
                taus.append(run.tau if run.met else max_iters)
                met += run.met
            taus = np.array(taus, dtype=float)
            rows.append({
                "method": method, "momentum": momentum,
                "tau_mean": float(taus.mean()),
                "tau_std": float(taus.std(ddof=1)),
                "met_count": met,
            })
            cell += 1
    return rows


def cmd_toys(args):
    meta = _metadata(args, "toys")
    if args.which == "gmm":
        rows = gmm_meeting_efficiency(runs=args.runs, max_iters=args.max_iters, seed=args.seed)
        header = ["method", "mode", "total_length", "i_tau"]
    else:
        rows = banana_meeting_table(runs=args.runs, max_iters=args.max_iters,
                                    seed=args.seed, kappa=args.kappa)
        header = ["method", "momentum", "tau_mean", "tau_std", "met_count"]
    if args.format == "json":
        _write_json(args.out, meta, {"rows": rows})
    else:
        _write_csv(args.out, meta, header, [[r[h] for h in header] for r in rows])
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(parser):
    parser.add_argument("--target", default="gaussian",
                        choices=["gaussian", "gmm", "banana", "logistic", "lgcp"])
    parser.add_argument("--dim", type=int, default=None)
    parser.add_argument("--eps", type=_float_list, default=[0.1])
    parser.add_argument("--steps", type=_int_list, default=[10])
    parser.add_argument("--kernel", choices=["metropolis", "multinomial"], default=None)
    parser.add_argument("--coupling", default="w2")
    parser.add_argument("--momentum", choices=["shared", "contractive"], default="shared")
    parser.add_argument("--kappa", type=float, default=1.0)
    parser.add_argument("--sigma", type=float, default=1e-3)
    parser.add_argument("--alpha", type=float, default=1.0 / 20.0)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--max-iters", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--data", default=None)
    parser.add_argument("--out", default="out.csv")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--k-rule", choices=["median", "q90"], default="median")
    parser.add_argument("--m-mult", type=int, choices=[5, 10], default=5)


def make_parser():
    parser = argparse.ArgumentParser(prog="coupledhmc")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("meet", help="meeting-time sweep over (eps, L, coupling)")
    _add_common(p)
    p.set_defaults(func=cmd_meet)

    p = sub.add_parser("estimate", help="unbiased estimation + inefficiency report")
    _add_common(p)
    p.add_argument("--prelim-runs", type=int, default=100)
    p.add_argument("--reference-samples", type=int, default=0)
    p.add_argument("--reference-burnin", type=int, default=1000)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("illustrate", help="two-trajectory coupling illustration")
    _add_common(p)
    p.set_defaults(func=cmd_illustrate, eps_default=0.45)

    p = sub.add_parser("toys", help="gmm / banana toy studies")
    p.add_argument("which", choices=["gmm", "banana"])
    _add_common(p)
    p.set_defaults(func=cmd_toys)

    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command == "illustrate" and args.eps == [0.1]:
        args.eps = [0.45]  # U-turn default for the unit Gaussian figure
    try:
        return args.func(args)
    except Exception as exc:  # pragma: no cover - CLI error path
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
