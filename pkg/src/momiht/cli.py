"""Command-line front end.

Subcommands::

    solve           generate or load an instance, run a solver, write traces
    tau-sweep       classify convergence across a momentum grid
    analyze         evaluate the convergence theory for given constants
    counterexample  canned instance where any positive momentum hurts
    gen             write a generated instance to a directory

Exit codes: 0 ok, 2 validation error, 3 divergence, 4 I/O error.  Every
output file is written atomically (temp file + rename), so failed runs leave
no partial outputs.  A JSON config file may supply any long flag's value;
flags given on the command line win.
"""

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import analysis, linalg, models, objectives, problems, solvers

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4

# 2x3 least-squares instance on which the exact line-search momentum weight
# is negative, so every positive momentum step increases the residual.
COUNTEREXAMPLE = {
    "Phi": np.array([[0.3816, -0.2726, 0.0077], [-0.1598, 1.9364, -0.3908]]),
    "b": np.array([0.3870, -0.1514]),
    "x1": np.array([-1.7338, 0.0, 0.0]),
    "x2": np.array([1.5415, 0.0, 0.0]),
}


def _parse_mu(text):
    if text in ("auto", "line-search", "rip"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"mu must be a positive number, 'auto', 'line-search' or 'rip', got {text!r}"
        )
    if value <= 0:
        raise argparse.ArgumentTypeError("numeric mu must be positive")
    return value


def _add_generator_args(parser, include_sigma=True):
    parser.add_argument("--gen", choices=("iid", "ar1", "completion"),
                        help="synthetic instance family")
    parser.add_argument("--instance", help="directory holding a saved instance")
    parser.add_argument("--n", type=int, default=10, help="signal length / matrix columns")
    parser.add_argument("--m", type=int, default=6, help="number of observations (iid)")
    parser.add_argument("--k", type=int, default=2, help="planted sparsity")
    if include_sigma:
        parser.add_argument("--sigma", type=float, default=0.0, help="noise level (iid)")
    parser.add_argument("--m-total", type=int, default=800, help="rows before the 50-50 split (ar1)")
    parser.add_argument("--rho", type=float, default=0.4, help="AR(1) correlation (ar1)")
    parser.add_argument("--snr", type=float, default=10.0, help="signal-to-noise ratio (ar1)")
    parser.add_argument("--p", type=int, default=50, help="matrix rows (completion)")
    parser.add_argument("--rank", type=int, default=3, help="planted rank (completion)")
    parser.add_argument("--frac", type=float, default=0.35, help="observed fraction (completion)")
    parser.add_argument("--seed", type=int, default=0)


def _add_solver_args(parser):
    parser.add_argument("--solver", choices=("acc", "iht"), default="acc")
    parser.add_argument("--tau", type=float, default=0.25, help="momentum weight")
    parser.add_argument("--mu", type=_parse_mu, default=None,
                        help="step size: number, 'auto', 'line-search' or 'rip' "
                             "(default: auto; line-search for completion)")
    parser.add_argument("--eta", type=float, default=1e-7, help="relative stopping tolerance")
    parser.add_argument("--max-iter", type=int, default=10000)
    parser.add_argument("--debias", action="store_true")
    parser.add_argument("--k-solve", type=int, default=None,
                        help="atom budget for the solver (overrides the model, e.g. overshoot)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="momiht",
        description="Momentum iterative hard thresholding: solvers, theory, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a solver on an instance")
    _add_generator_args(p_solve)
    _add_solver_args(p_solve)
    p_solve.add_argument("--reps", type=int, default=1, help="independent repetitions (seed+i)")
    p_solve.add_argument("--out", default="run", help="output prefix")
    p_solve.add_argument("--config", help="JSON file with default flag values")

    p_sweep = sub.add_parser("tau-sweep", help="classify convergence on a momentum grid")
    _add_generator_args(p_sweep)
    _add_solver_args(p_sweep)
    p_sweep.add_argument("--tau-min", type=float, default=-1.0)
    p_sweep.add_argument("--tau-max", type=float, default=1.0)
    p_sweep.add_argument("--tau-count", type=int, default=41)
    p_sweep.add_argument("--alpha", type=float, default=None, help="user-supplied alpha_3k")
    p_sweep.add_argument("--beta", type=float, default=None, help="user-supplied beta_3k")
    p_sweep.add_argument("--out", default="sweep", help="output prefix")
    p_sweep.add_argument("--config", help="JSON file with default flag values")

    p_an = sub.add_parser("analyze", help="evaluate the convergence theory")
    p_an.add_argument("--xi", type=float, default=None, help="contraction coefficient")
    p_an.add_argument("--kappa", type=float, default=None, help="restricted condition number")
    p_an.add_argument("--phi", default=None, help="design matrix file (text format)")
    p_an.add_argument("--k", type=int, default=None, help="atom budget (with --phi)")
    p_an.add_argument("--surrogate", action="store_true",
                      help="with --phi: use the extreme eigenvalues of the Gram matrix "
                           "instead of subset enumeration (needed when enumeration is "
                           "out of budget; gives no xi when the Gram is singular)")
    p_an.add_argument("--tau", type=float, default=0.25)
    p_an.add_argument("--xstar-norm", type=float, default=1.0)
    p_an.add_argument("--eps-norm", type=float, default=0.0)
    p_an.add_argument("--zeta", type=float, default=1e-6, help="target error for the iteration count")
    p_an.add_argument("--horizon", type=int, default=100, help="error-curve length")
    p_an.add_argument("--out", default=None, help="JSON output path (default: stdout)")
    p_an.add_argument("--config", help="JSON file with default flag values")

    p_ce = sub.add_parser("counterexample",
                          help="show the canned instance where positive momentum hurts")
    p_ce.add_argument("--grid", type=int, default=101, help="momentum grid points on [0, 1]")
    p_ce.add_argument("--out", default=None, help="optional JSON output path")

    p_gen = sub.add_parser("gen", help="write a generated instance to a directory")
    _add_generator_args(p_gen)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--config", help="JSON file with default flag values")

    return parser


def _apply_config_file(args, argv):
    """Fill flags from ``--config`` JSON; explicit command-line flags win."""
    if getattr(args, "config", None) is None:
        return args
    with open(args.config) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError(f"{args.config}: config file must hold a JSON object")
    provided = set()
    for token in argv:
        name = token.split("=", 1)[0]
        if name.startswith("--"):
            provided.add(name[2:].replace("-", "_"))
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"{args.config}: unknown option {key!r}")
        if dest in provided:
            continue
        if dest == "mu" and isinstance(value, str):
            value = _parse_mu(value)
        setattr(args, dest, value)
    return args


def _check_out_prefix(prefix):
    """Fail before any computation if the output directory cannot take files."""
    import os

    directory = os.path.dirname(os.path.abspath(os.fspath(prefix)))
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"output directory does not exist: {directory}")
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"output directory is not writable: {directory}")


def _make_instances(args):
    """Instance (plus held-out test instance for ar1) from the CLI flags."""
    if (args.gen is None) == (args.instance is None):
        raise ValueError("exactly one of --gen or --instance is required")
    if args.instance is not None:
        return problems.load_instance(args.instance), None
    if args.gen == "iid":
        sigma = getattr(args, "sigma", 0.0)
        return problems.gen_iid_gaussian(args.n, args.m, args.k, noise_sigma=sigma, seed=args.seed), None
    if args.gen == "ar1":
        train, test = problems.gen_ar1(
            n=args.n, m_total=args.m_total, k=args.k, rho=args.rho, snr=args.snr, seed=args.seed
        )
        return train, test
    return problems.gen_matrix_completion(args.p, args.n, args.rank, args.frac, seed=args.seed), None


def _resolve_cli_mu(args, instance):
    """Turn the CLI step-size flag into a SolverConfig value."""
    mu = args.mu
    if mu is None:
        mu = "line-search" if isinstance(instance.objective, objectives.MaskedLeastSquares) else "auto"
    if mu == "rip":
        obj = instance.objective
        if not isinstance(obj, objectives.LeastSquares):
            raise ValueError("--mu rip needs a least-squares instance")
        k = args.k_solve if getattr(args, "k_solve", None) else models.budget_of(instance.model)
        alpha = getattr(args, "alpha", None)
        beta = getattr(args, "beta", None)
        if alpha is None or beta is None:
            alpha, beta = analysis.rip_exact(obj.Phi, 3 * k)
        mu, _ = analysis.optimal_mu(alpha, beta)
    return mu


def _metrics_dict(report):
    return dataclasses.asdict(report)


def cmd_solve(args):
    solve_fn = solvers.acc_iht if args.solver == "acc" else solvers.iht
    any_diverged = False
    summaries = []
    for rep in range(args.reps):
        rep_args = args
        if args.reps > 1:
            rep_args = argparse.Namespace(**{**vars(args), "seed": args.seed + rep})
        instance, test = _make_instances(rep_args)
        config = solvers.SolverConfig(
            k=args.k_solve,
            tau=args.tau,
            mu=_resolve_cli_mu(rep_args, instance),
            eta=args.eta,
            max_iter=args.max_iter,
            debias=args.debias,
        )
        trace = solve_fn(instance.objective, instance.model, config, truth=instance.truth)
        prefix = args.out if args.reps == 1 else f"{args.out}_rep{rep:03d}"
        solvers.save_trace_csv(prefix + ".csv", trace)
        solvers.save_trace_json(prefix + ".json", trace)
        summary = {
            "seed": rep_args.seed,
            "termination": trace.termination,
            "iterations": trace.iterations,
            "final_f": trace.records[-1].f_value,
        }
        if instance.truth is not None:
            metrics = problems.evaluate(trace, instance, test=test)
            summary["metrics"] = _metrics_dict(metrics)
        linalg.atomic_write_text(prefix + ".metrics.json", json.dumps(summary, indent=2) + "\n")
        summaries.append(summary)
        any_diverged = any_diverged or trace.diverged
        print(f"{prefix}: {trace.termination} after {trace.iterations} iterations, "
              f"f = {trace.records[-1].f_value:.6g}")
    if args.reps > 1:
        linalg.atomic_write_text(args.out + ".summary.json", json.dumps(summaries, indent=2) + "\n")
    return EXIT_DIVERGENCE if any_diverged else EXIT_OK


def _classify(trace):
    if trace.diverged:
        return "diverged"
    f = trace.f_values
    rippling = bool(np.any(f[1:] > f[:-1] * (1.0 + 1e-12)))
    return "converged-rippling" if rippling else "converged-monotone"


def cmd_tau_sweep(args):
    instance, _ = _make_instances(args)
    obj = instance.objective
    if not isinstance(obj, objectives.LeastSquares):
        raise ValueError("tau-sweep needs a least-squares instance")
    k = args.k_solve if args.k_solve else models.budget_of(instance.model)
    alpha, beta = args.alpha, args.beta
    if alpha is None or beta is None:
        alpha, beta = analysis.rip_exact(obj.Phi, 3 * k)
    xi = analysis.xi_of(beta / alpha) if beta > alpha else None
    guaranteed = analysis.tau_range(xi) if xi is not None else None
    mu = args.mu
    if mu is None or mu == "rip":
        mu = analysis.optimal_mu(alpha, beta)[0]

    taus = np.linspace(args.tau_min, args.tau_max, args.tau_count)
    rows = []
    for tau in taus:
        config = solvers.SolverConfig(
            k=args.k_solve, tau=float(tau), mu=mu, eta=args.eta, max_iter=args.max_iter,
            debias=args.debias,
        )
        trace = solvers.acc_iht(obj, instance.model, config, truth=instance.truth)
        rows.append(
            {
                "tau": float(tau),
                "classification": _classify(trace),
                "iterations": trace.iterations,
                "termination": trace.termination,
                "final_f": trace.records[-1].f_value,
                "final_dist": trace.records[-1].dist_to_truth,
            }
        )
    lines = ["tau,classification,iterations,termination,final_f,final_dist"]
    for r in rows:
        dist = "" if r["final_dist"] is None else repr(r["final_dist"])
        lines.append(f"{r['tau']!r},{r['classification']},{r['iterations']},"
                     f"{r['termination']},{r['final_f']!r},{dist}")
    linalg.atomic_write_text(args.out + ".csv", "\n".join(lines) + "\n")
    payload = {
        "seed": args.seed,
        "mu": mu,
        "alpha": alpha,
        "beta": beta,
        "xi": xi,
        "guaranteed_tau_range": list(guaranteed) if guaranteed else None,
        "grid": rows,
    }
    linalg.atomic_write_text(args.out + ".json", json.dumps(payload, indent=2) + "\n")
    counts = {}
    for r in rows:
        counts[r["classification"]] = counts.get(r["classification"], 0) + 1
    print(f"{args.out}.csv: " + ", ".join(f"{v} {k}" for k, v in sorted(counts.items())))
    return EXIT_OK


def cmd_analyze(args):
    given = [v is not None for v in (args.xi, args.kappa, args.phi)]
    if sum(given) != 1:
        raise ValueError("exactly one of --xi, --kappa or --phi is required")
    report = {"tau": args.tau}
    if args.xi is not None:
        if args.xi <= 0:
            raise ValueError("xi must be positive")
        xi = args.xi
    elif args.kappa is not None:
        xi = analysis.xi_of(args.kappa)
        report["kappa"] = args.kappa
    else:
        if args.k is None:
            raise ValueError("--phi needs --k (atom budget)")
        Phi = linalg.load_matrix(args.phi)
        if args.surrogate:
            b_hat = analysis.rip_surrogate(Phi)
            # the strong-convexity surrogate is the smallest Hessian eigenvalue,
            # which is zero whenever the design is wide
            m, n = Phi.shape
            a_hat = linalg.extreme_eigs_sym(Phi.T @ Phi)[0] if m >= n else 0.0
            report.update(beta_hat=b_hat, mu_surrogate=1.0 / b_hat)
            if a_hat <= 1e-12 * b_hat:
                report.update(
                    xi=None,
                    note="Gram matrix is singular: the eigenvalue surrogate gives "
                         "no strong-convexity constant, so no xi or bounds",
                )
                text = json.dumps(report, indent=2) + "\n"
                if args.out:
                    linalg.atomic_write_text(args.out, text)
                else:
                    sys.stdout.write(text)
                return EXIT_OK
            xi = analysis.xi_of(b_hat / a_hat)
            report["kappa"] = b_hat / a_hat
        else:
            rip = analysis.estimate_rip(Phi, args.k)
            a3, b3 = rip.alpha[3 * args.k], rip.beta[3 * args.k]
            xi = analysis.xi_of(b3 / a3)
            mu_opt, contraction = analysis.optimal_mu(a3, b3)
            report.update(
                kappa=b3 / a3,
                alpha=rip.alpha,
                beta=rip.beta,
                mu_optimal=mu_opt,
                contraction_factor=contraction,
                one_minus_alpha_over_beta=1.0 - a3 / b3,  # reference value only
            )
    sys_ = analysis.contraction_matrix(xi, args.tau)
    rng = analysis.tau_range(xi)
    report.update(
        xi=xi,
        lambda1=sys_.lambda1,
        lambda2=sys_.lambda2,
        delta=sys_.delta,
        tau_range=list(rng) if rng else None,
    )
    rip_for_bound = None
    if args.eps_norm > 0:
        if args.phi is None or args.surrogate:
            raise ValueError(
                "a noise bound needs enumerated constants at levels 2k and 3k: "
                "pass --phi without --surrogate"
            )
        rip_for_bound = rip
    try:
        bound = analysis.error_bound(
            xi, args.tau, rip_for_bound, args.xstar_norm, args.eps_norm, args.horizon
        )
        report["noise_floor"] = bound.noise_floor
        report["error_curve"] = bound.error_curve.tolist()
    except ValueError as exc:
        report["noise_floor"] = None
        report["error_curve"] = None
        report["bound_unavailable"] = str(exc)
    try:
        report["iteration_bound"] = analysis.iteration_bound(
            xi, args.tau, args.xstar_norm, args.zeta
        )
    except ValueError as exc:
        report["iteration_bound"] = "infeasible"
        report["iteration_bound_reason"] = str(exc)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        linalg.atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_counterexample(args):
    Phi, b = COUNTEREXAMPLE["Phi"], COUNTEREXAMPLE["b"]
    x1, x2 = COUNTEREXAMPLE["x1"], COUNTEREXAMPLE["x2"]
    ls = objectives.LeastSquares(Phi, b)
    r1 = float(np.linalg.norm(ls.residual(x1)))
    r2 = float(np.linalg.norm(ls.residual(x2)))
    tau_star = solvers.line_search_tau(ls, x2, x1)
    taus = np.linspace(0.0, 1.0, args.grid)
    direction = x2 - x1
    curve = [ls.value(x2 + t * direction) for t in taus]
    increasing = all(b_ > a_ for a_, b_ in zip(curve, curve[1:]))
    print(f"residual at first iterate:  ||b - Phi x1|| = {r1:.4f}")
    print(f"residual at second iterate: ||b - Phi x2|| = {r2:.4f}")
    print(f"exact line-search momentum: tau* = {tau_star:.6f}")
    print(f"f(x2 + tau (x2 - x1)) on tau in [0, 1]: "
          f"{curve[0]:.6f} -> {curve[-1]:.6f}, strictly increasing: {increasing}")
    if not increasing:
        raise RuntimeError("expected the residual to increase for every tau > 0")
    if args.out:
        payload = {
            "residual_x1": r1,
            "residual_x2": r2,
            "tau_star": tau_star,
            "tau_grid": taus.tolist(),
            "f_curve": curve,
            "strictly_increasing": increasing,
        }
        linalg.atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_gen(args):
    if args.gen is None:
        raise ValueError("gen requires --gen")
    if args.gen == "ar1":
        train, test = problems.gen_ar1(
            n=args.n, m_total=args.m_total, k=args.k, rho=args.rho, snr=args.snr, seed=args.seed
        )
        problems.save_instance(args.out + "/train", train)
        problems.save_instance(args.out + "/test", test)
        print(f"wrote {args.out}/train and {args.out}/test")
        return EXIT_OK
    instance, _ = _make_instances(args)
    problems.save_instance(args.out, instance)
    print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "tau-sweep": cmd_tau_sweep,
    "analyze": cmd_analyze,
    "counterexample": cmd_counterexample,
    "gen": cmd_gen,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(args, argv)
        return _COMMANDS[args.command](args)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
