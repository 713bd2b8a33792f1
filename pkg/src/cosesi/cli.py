"""Command-line front end.

Every subcommand solves one model or application and can emit a
machine-readable CSV (`--out`); identical configuration and seed give
byte-identical output.  `repro` runs the full example-reproduction suite
and prints a pass/fail table.  Flat KEY = VALUE config files are accepted
through `--config`, with command-line flags taking precedence; unknown
config keys are rejected.

Exit codes: 0 success, 1 solver error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from .numerics import NumericsError
from .model import (
    CMB,
    AdditiveBinomial,
    BayesBeta,
    BetaEstimation,
    IID,
    MLE,
    MarkovShock,
    ModelError,
    RhoMixture,
    Sequential,
    action_count_pmf,
    parse_cost,
)
from .equilibrium import (
    BadWeights,
    enumerate_cosesi,
    solve_assortative,
    solve_bayesian_cosesi,
    solve_cosesi,
    solve_heterogeneous,
    solve_ne,
    solve_with_dgp,
    sweep,
)
from .applications import (
    ApplicationError,
    CreditSpec,
    TwoSidedSpec,
    mixed_population_employment,
    monopoly_optimize,
    solve_bank_cosesi,
    solve_two_sided,
    tax_policy_check,
    two_part_supply,
    var_two_borrowers,
)
from .dynamics import DynamicsError, MarkovShockChain, simulate_dynamics, mc_population_equilibrium
from .sampling import SamplingError, SeedableRng, informativeness, pairwise_correlation, sample_correlated
from .repro import format_table, run_repro

_SOLVER_ERRORS = (
    NumericsError,
    ModelError,
    ApplicationError,
    DynamicsError,
    SamplingError,
    BadWeights,
    ValueError,
    ArithmeticError,
)


class ConfigError(Exception):
    pass


def _parse_inference(spec: str):
    head, _, rest = spec.partition(":")
    if head == "mle":
        return MLE()
    if head == "beta":
        return BetaEstimation()
    if head == "bayes":
        args = [float(a) for a in rest.split(",")] if rest else []
        if len(args) not in (3, 4):
            raise ConfigError("bayes inference needs 'bayes:alpha,beta,rho[,zeta]'")
        return BayesBeta(*args)
    raise ConfigError(f"unknown inference '{spec}'")


def _parse_dgp(spec: str):
    head, _, rest = spec.partition(":")
    args = [float(a) for a in rest.split(",")] if rest else []
    if head == "iid":
        return IID()
    if head == "rho":
        return RhoMixture(args[0])
    if head == "cmb":
        return CMB(args[0])
    if head == "addbin":
        return AdditiveBinomial(args[0])
    if head == "seq":
        return Sequential(tuple(args))
    if head == "markov":
        return MarkovShock(args[0], args[1])
    raise ConfigError(f"unknown dgp '{spec}'")


def _parse_rho_fn(spec: str):
    head, _, rest = spec.partition(":")
    if head == "zero":
        return lambda eta: 0.0
    if head == "identity":
        return lambda eta: eta
    if head == "const":
        v = float(rest)
        return lambda eta: v
    if head == "power":
        k = float(rest)
        return lambda eta: eta**k
    raise ConfigError(f"unknown rho function '{spec}'")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _emit(args, header: list[str], rows: list[list], summary: list[tuple[str, object]]) -> None:
    for key, val in summary:
        print(f"{key}={_fmt(val)}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])


def _parse_config_file(path: str) -> dict:
    values: dict[str, object] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line: {raw.strip()!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip().strip("\"'")
            if val.lower() in ("true", "false"):
                values[key] = val.lower() == "true"
                continue
            try:
                values[key] = int(val)
            except ValueError:
                try:
                    values[key] = float(val)
                except ValueError:
                    values[key] = val
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosesi",
        description="Equilibria of binary-action population games under correlation neglect.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subparsers_by_name = {}

    _original_add_parser = sub.add_parser

    def add_parser(name, **kwargs):
        p = _original_add_parser(name, **kwargs)
        parser.subparsers_by_name[name] = p
        return p

    sub.add_parser = add_parser

    def common(p: argparse.ArgumentParser, cost=True, inference=True, n=True, rho=True):
        p.add_argument("--config", help="flat KEY=VALUE config file; flags override")
        p.add_argument("--out", help="write results to this CSV path")
        p.add_argument(
            "--seed",
            type=int,
            default=int(os.environ.get("COSESI_SEED", "0")),
            help="random seed (default: COSESI_SEED or 0)",
        )
        if cost:
            p.add_argument("--cost", default="pow:2", help="cost spec, e.g. pow:4, linear, exp:6, sshape")
        if inference:
            p.add_argument("--inference", default="mle", help="mle, beta, or bayes:alpha,beta,rho[,zeta]")
        if n:
            p.add_argument("--n", type=int, default=2, help="sample size")
        if rho:
            p.add_argument("--rho", type=float, default=0.0, help="signal correlation in [0,1]")
        return p

    common(sub.add_parser("ne", help="Nash equilibrium 1-theta=c(theta)"), inference=False, n=False, rho=False)

    p = common(sub.add_parser("cosesi", help="simple CoSESI (or SESI at rho=0)"))
    p.add_argument("--dgp", help="optional non-mixture count law, e.g. cmb:2, addbin:0.05")

    p = common(sub.add_parser("sweep", help="theta* along a rho or n axis"))
    p.add_argument("--axis", choices=("rho", "n"), default="rho")
    p.add_argument("--values", default="0,0.25,0.5,0.75,1", help="comma-separated axis values")

    p = common(sub.add_parser("enumerate", help="all CoSESIs of an S-shaped benefit game"), inference=False)
    p.set_defaults(cost="sshape")
    p.add_argument("--grid-step", type=float, default=1e-4)

    p = common(sub.add_parser("assortative", help="type-dependent correlation rho(eta)"), rho=False)
    p.add_argument("--rho-fn", default="identity", help="zero, identity, const:x, power:k")

    p = common(sub.add_parser("bayes", help="Bayesian CoSESI with partial neglect"))
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--zeta", type=float, default=1.0, help="degree of correlation neglect")

    p = common(sub.add_parser("hetero", help="heterogeneous inference/sample-size mix"), inference=False, n=False)
    p.add_argument("--groups", default="0.5:mle:2,0.5:mle:5", help="weight:inference:n, comma-separated")

    p = common(sub.add_parser("market", help="two-sided matching market"), cost=False, inference=False, n=False, rho=False)
    p.add_argument("--lam", type=float, default=0.3, help="matching friction")
    p.add_argument("--v", type=float, default=0.5, help="Cobb-Douglas exponent")
    p.add_argument("--k", type=float, default=2, help="worker sample size (inf allowed)")
    p.add_argument("--n", type=float, default=2, help="firm sample size (inf allowed)")
    p.add_argument("--rho-w", type=float, default=0.0)
    p.add_argument("--rho-f", type=float, default=0.0)
    p.add_argument("--rational", action="store_true", help="rational-expectations benchmark")
    p.add_argument("--kappa", type=float, help="mixed-population share with correlated samples")

    p = common(sub.add_parser("monopoly", help="monopoly pricing against naive consumers"), cost=False)
    p.add_argument("--t", type=float, default=6.0, help="encounters parameter of exp(-t theta)")
    p.add_argument("--rational", action="store_true")
    p.add_argument("--grid-step", type=float, default=1e-3)

    p = common(sub.add_parser("bank", help="credit-market equilibrium and default rate"))
    p.set_defaults(rho=0.5)
    p.add_argument("--omega", type=float, default=0.0, help="borrower obligation")
    p.add_argument("--gaussian-omega", action="store_true")

    p = common(sub.add_parser("var", help="two-borrower value at risk"), cost=False, inference=False, n=False, rho=False)
    p.add_argument("--p", type=float, default=0.05, help="default probability")
    p.add_argument("--tau", type=float, default=0.0, help="default correlation")
    p.add_argument("--alpha", type=float, default=0.95, help="confidence level")

    p = common(sub.add_parser("tax", help="tax-policy equilibrium and planner check"))
    p.add_argument("--tax", type=float, default=0.0)

    p = common(sub.add_parser("supply-shock", help="two-part competitive equilibrium"), n=False, rho=False)
    p.add_argument("--eps", type=float, default=-0.05, help="supply shock size")

    p = common(sub.add_parser("dynamics", help="generational dynamic with Markov shocks"))
    p.add_argument("--p-xi", type=float, default=0.2)
    p.add_argument("--q-xi", type=float, default=0.8)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--theta0", type=float, default=0.5)
    p.add_argument("--rho0", type=float, default=0.0)
    p.add_argument("--T", type=int, default=500)

    p = common(sub.add_parser("simulate", help="Monte Carlo signal draws and diagnostics"), cost=False, inference=False)
    p.add_argument("--dgp", default="rho:0.5")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--draws", type=int, default=100000)

    p = common(sub.add_parser("info", help="informativeness of a count law"), cost=False, inference=False)
    p.add_argument("--dgp", default="rho:1")
    p.add_argument("--theta", type=float, default=0.3)

    p = common(sub.add_parser("mc", help="agent-population Monte Carlo equilibrium"))
    p.add_argument("--dgp", default="rho:0")
    p.add_argument("--agents", type=int, default=100000)

    common(sub.add_parser("repro", help="reproduce the full example suite"), cost=False, inference=False, n=False, rho=False)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    config_path = getattr(args, "config", None)
    if not config_path:
        return args
    values = _parse_config_file(config_path)
    allowed = set(vars(args))
    unknown = set(values) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for '{args.command}': {sorted(unknown)}")
    # defaults must land on the subparser: its own defaults would otherwise
    # clobber parser-level ones when the subcommand reparses
    parser.subparsers_by_name[args.command].set_defaults(**values)
    return parser.parse_args(argv)  # reparse so explicit flags still win


def _run(args) -> int:
    cmd = args.command
    if cmd == "ne":
        res = solve_ne(parse_cost(args.cost))
        _emit(args, ["concept", "theta_star", "residual"], [[res.concept, res.theta, res.residual]],
              [("theta_star", res.theta)])
        return 0
    if cmd == "cosesi":
        cost = parse_cost(args.cost)
        G = _parse_inference(args.inference)
        if args.dgp:
            res = solve_with_dgp(cost, G, args.n, _parse_dgp(args.dgp))
            roots = res.roots
        else:
            res = solve_cosesi(cost, G, args.n, args.rho)
            roots = res.roots
        rows = [[res.concept, i, r, res.residual] for i, r in enumerate(roots)]
        _emit(args, ["concept", "root_index", "theta_star", "residual"], rows,
              [("theta_star", roots[0] if len(roots) == 1 else ",".join(_fmt(r) for r in roots))])
        return 0
    if cmd == "sweep":
        values = [float(v) for v in args.values.split(",")]
        table = sweep(args.axis, values, parse_cost(args.cost), _parse_inference(args.inference),
                      n=args.n, rho=args.rho)
        rows = [[args.axis, v, th] for v, th in table.rows]
        _emit(args, ["axis", "value", "theta_star"], rows,
              [("rows", len(rows)), ("last_theta", table.rows[-1][1])])
        return 0
    if cmd == "enumerate":
        res = enumerate_cosesi(parse_cost(args.cost), args.n, args.rho, args.grid_step)
        rows = [[i, r] for i, r in enumerate(res.roots)]
        _emit(args, ["root_index", "theta_star"], rows, [("num_roots", len(res.roots))] + [
            (f"theta_{i}", r) for i, r in enumerate(res.roots)])
        return 0
    if cmd == "assortative":
        res = solve_assortative(parse_cost(args.cost), _parse_inference(args.inference), args.n,
                                _parse_rho_fn(args.rho_fn))
        _emit(args, ["concept", "theta_star", "residual"], [[res.concept, res.theta, res.residual]],
              [("theta_star", res.theta)])
        return 0
    if cmd == "bayes":
        res = solve_bayesian_cosesi(parse_cost(args.cost), (args.alpha, args.beta), args.n, args.rho, args.zeta)
        _emit(args, ["concept", "theta_star", "residual"], [[res.concept, res.theta, res.residual]],
              [("theta_star", res.theta)])
        return 0
    if cmd == "hetero":
        specs = []
        for part in args.groups.split(","):
            w, inf, nn = part.split(":")
            specs.append((float(w), _parse_inference(inf), int(nn)))
        res = solve_heterogeneous(specs, parse_cost(args.cost), args.rho)
        _emit(args, ["concept", "theta_star", "residual"], [[res.concept, res.theta, res.residual]],
              [("theta_star", res.theta)])
        return 0
    if cmd == "market":
        spec = TwoSidedSpec(lam=args.lam, v=args.v, k=args.k, n=args.n,
                            rho_w=args.rho_w, rho_f=args.rho_f)
        out = solve_two_sided(spec, rational=args.rational)
        rows = [[out.concept, out.alpha_star, out.beta_star, out.employment]]
        summary = [("alpha_star", out.alpha_star), ("beta_star", out.beta_star),
                   ("employment", out.employment)]
        if args.kappa is not None:
            mixed = mixed_population_employment(spec, args.kappa)
            summary += [("employment_total", mixed.employment_total),
                        ("inequality_factor", mixed.inequality_factor),
                        ("disadvantage_ratio", mixed.disadvantage_ratio)]
        _emit(args, ["concept", "alpha_star", "beta_star", "employment"], rows, summary)
        return 0
    if cmd == "monopoly":
        out = monopoly_optimize(rho=args.rho, t=args.t, n=args.n,
                                G=_parse_inference(args.inference),
                                price_grid_step=args.grid_step, rational=args.rational)
        rows = [[p, q] for p, q in out.demand_curve]
        _emit(args, ["price", "demand"], rows,
              [("price_star", out.price_star), ("quantity_star", out.quantity_star),
               ("profit_star", out.profit_star)])
        return 0
    if cmd == "bank":
        spec = CreditSpec(omega=args.omega, rho=args.rho, n=args.n, cost=parse_cost(args.cost),
                          G=_parse_inference(args.inference), gaussian_omega=args.gaussian_omega)
        out = solve_bank_cosesi(spec)
        rows = [[i, r] for i, r in enumerate(out.roots)]
        _emit(args, ["root_index", "theta"], rows,
              [("theta_star", out.theta_star), ("p_star", out.p_star)])
        return 0
    if cmd == "var":
        loss = var_two_borrowers(args.p, args.tau, args.alpha)
        _emit(args, ["p", "tau", "alpha", "var"], [[args.p, args.tau, args.alpha, loss]],
              [("var", loss)])
        return 0
    if cmd == "tax":
        out = tax_policy_check(parse_cost(args.cost), _parse_inference(args.inference),
                               args.n, args.rho, args.tax)
        _emit(args, ["theta_tau", "theta_zero", "welfare", "check_value", "recommend_tax"],
              [[out.theta_tau, out.theta_zero, out.welfare, out.check_value, out.recommend_tax]],
              [("theta_tau", out.theta_tau), ("welfare", out.welfare),
               ("recommend_tax", out.recommend_tax)])
        return 0
    if cmd == "supply-shock":
        out = two_part_supply(parse_cost(args.cost), _parse_inference(args.inference), args.eps)
        _emit(args, ["theta1", "theta2", "condition_ok"],
              [[out.theta1, out.theta2, out.condition_ok]],
              [("theta1", out.theta1), ("theta2", out.theta2), ("condition_ok", out.condition_ok)])
        return 0
    if cmd == "dynamics":
        traj = simulate_dynamics(parse_cost(args.cost), _parse_inference(args.inference), args.n,
                                 MarkovShockChain(args.p_xi, args.q_xi), args.gamma,
                                 args.theta0, args.rho0, args.T)
        rows = [[int(t), th, rh] for t, th, rh in zip(traj.t, traj.theta, traj.rho)]
        _emit(args, ["t", "theta", "rho"], rows,
              [("theta_final", traj.final_theta()), ("rho_final", float(traj.rho[-1]))])
        return 0
    if cmd == "simulate":
        dgp = _parse_dgp(args.dgp)
        if not isinstance(dgp, RhoMixture):
            raise ConfigError("simulate currently draws from rho-mixture laws (rho:<value>)")
        bits = sample_correlated(args.n, args.theta, dgp.rho, SeedableRng(args.seed), size=args.draws)
        counts = np.bincount(bits.sum(axis=1), minlength=args.n + 1)
        pmf = action_count_pmf(dgp, args.n, args.theta)
        rows = [[y, int(counts[y]), pmf.probs[y]] for y in range(args.n + 1)]
        corr = pairwise_correlation(bits) if args.n > 1 else 0.0
        _emit(args, ["count", "observed", "exact_prob"], rows,
              [("draws", args.draws), ("pairwise_correlation", corr)])
        return 0
    if cmd == "info":
        pmf = action_count_pmf(_parse_dgp(args.dgp), args.n, args.theta)
        psi = informativeness(args.n, pmf, args.theta)
        _emit(args, ["n", "theta", "informativeness"], [[args.n, args.theta, psi]],
              [("informativeness", psi)])
        return 0
    if cmd == "mc":
        out = mc_population_equilibrium(parse_cost(args.cost), _parse_inference(args.inference),
                                        args.n, _parse_dgp(args.dgp), num_agents=args.agents,
                                        rng=SeedableRng(args.seed))
        _emit(args, ["theta_hat", "stderr", "sweeps"],
              [[out.theta_hat, out.stderr, out.sweeps_used]],
              [("theta_hat", out.theta_hat), ("stderr", out.stderr)])
        return 0
    if cmd == "repro":
        rows = run_repro()
        print(format_table(rows))
        if args.out:
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["name", "expected", "computed", "abs_err", "tol", "status", "note"])
                for r in rows:
                    writer.writerow([r.name, _fmt(r.expected), _fmt(r.computed),
                                     _fmt(r.err), _fmt(r.tol), r.status, r.note])
        return 0 if all(r.status != "FAIL" for r in rows) else 1
    raise ConfigError(f"unhandled command {cmd}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
