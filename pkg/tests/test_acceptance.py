"""Acceptance suite: one test per exit criterion, at the pinned tolerances.

Each test prints a single pass/fail line (visible with pytest -s or in the
captured output summary).  Documented source-number discrepancies are
asserted through the reproduction table's PASS-WITH-NOTE rows rather than
forced onto the narrated values.
"""

import math

import numpy as np

from cosesi.model import (
    BetaEstimation,
    MLE,
    RhoMixture,
    action_count_pmf,
    linear_cost,
    power_cost,
)
from cosesi.equilibrium import (
    solve_assortative,
    solve_cosesi,
    solve_ne,
    sweep,
)
from cosesi.applications import (
    TwoSidedSpec,
    default_stats,
    mixed_population_employment,
    monopoly_optimize,
    monopoly_rational_demand,
    solve_two_sided,
    var_two_borrowers,
    vasicek_cdf,
)
from cosesi.dynamics import MarkovShockChain, mc_population_equilibrium, simulate_dynamics
from cosesi.sampling import (
    SeedableRng,
    bahadur_joint,
    balance_check,
    chi_square_gof,
    informativeness,
    joint_from_conditionals,
    sample_correlated,
)
from cosesi.numerics import norm_cdf
from cosesi.repro import run_repro

from conftest import (
    ASSORT_LIMIT,
    NE_POW3,
    ROOT_POW4_BETA_RHO0,
    ROOT_POW4_BETA_RHO5,
    ROOT_POW4_MLE_RHO0,
    ROOT_POW4_MLE_RHO5,
    SESI3_POW3,
)


def report(criterion: str, ok: bool) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'}")
    assert ok


def test_criterion_1_equilibrium_reproduction():
    mle, beta_est = MLE(), BetaEstimation()
    pow3, pow4 = power_cost(3), power_cost(4)
    ok = True
    # exact-equation targets at 1e-6 against the analytic roots
    ok &= abs(solve_cosesi(pow4, mle, 2, 0.0).theta - ROOT_POW4_MLE_RHO0) <= 1e-6
    ok &= abs(solve_cosesi(pow4, mle, 2, 1.0).theta - 0.5) <= 1e-6
    ok &= abs(solve_ne(pow3).theta - NE_POW3) <= 1e-6
    ok &= abs(solve_cosesi(pow3, mle, 3, 0.0).theta - SESI3_POW3) <= 1e-6
    for n in (1, 2, 5, 20, 100):
        ok &= abs(solve_cosesi(pow3, mle, n, 1.0).theta - 0.5) <= 1e-6
    ok &= abs(solve_cosesi(pow4, beta_est, 2, 0.0).theta - ROOT_POW4_BETA_RHO0) <= 1e-6
    ok &= abs(solve_cosesi(pow4, mle, 2, 0.5).theta - ROOT_POW4_MLE_RHO5) <= 1e-6
    ok &= abs(solve_cosesi(pow4, beta_est, 2, 0.5).theta - ROOT_POW4_BETA_RHO5) <= 1e-6
    ok &= abs(solve_cosesi(pow4, beta_est, 2, 1.0).theta - 0.5) <= 1e-6
    # source-rounded values at 5e-3 where the source's own rounding permits
    ok &= abs(solve_cosesi(pow4, mle, 2, 0.0).theta - 0.6) <= 5e-3
    ok &= abs(solve_cosesi(pow3, mle, 3, 0.0).theta - 0.621) <= 5e-3
    ok &= abs(solve_cosesi(pow4, beta_est, 2, 0.0).theta - 0.57) <= 5e-3
    ok &= abs(solve_cosesi(pow4, mle, 2, 0.5).theta - 0.55) <= 5e-3
    ok &= abs(solve_ne(pow3).theta - 0.68) <= 5e-3
    # the 0.53 cell is off its own quadratic by 7.3e-3: carried as a noted row
    rows = {r.name: r for r in run_repro()}
    note_row = rows["  same, source-rounded 0.53"]
    ok &= note_row.status == "PASS-WITH-NOTE"
    report("criterion 1 (equilibrium reproduction)", bool(ok))


def test_criterion_2_assortative_closed_form():
    mle = MLE()
    rho_fn = lambda eta: eta
    ok = True
    for n in range(2, 101):
        target = (5 - 1 / n - math.sqrt(1 / n**2 - 2 / n + 17)) / (2 * (1 - 1 / n))
        ok &= abs(solve_assortative(linear_cost(), mle, n, rho_fn).theta - target) <= 1e-9
    ok &= abs(solve_assortative(linear_cost(), mle, 1, rho_fn).theta - 0.5) <= 1e-9
    ok &= abs(solve_assortative(linear_cost(), mle, 10**6, rho_fn).theta - ASSORT_LIMIT) <= 1e-3
    report("criterion 2 (assortative closed form)", bool(ok))


def test_criterion_3_two_sided_market():
    ok = True
    for lam in (0.1, 0.3, 0.5):
        ne = solve_two_sided(TwoSidedSpec(lam=lam), rational=True)
        ok &= abs(ne.alpha_star - lam) <= 1e-8
        ok &= abs(ne.beta_star - lam) <= 1e-8
        ok &= abs(ne.employment - lam**2) <= 1e-8
        co = solve_two_sided(TwoSidedSpec(lam=lam, rho_w=1.0, rho_f=1.0))
        ok &= abs(co.alpha_star - lam**2) <= 1e-8
        ok &= abs(co.beta_star - lam**2) <= 1e-8
        ok &= abs(co.employment - lam**3) <= 1e-8
    lam, kappa = 0.1, 0.35
    mixed = mixed_population_employment(TwoSidedSpec(lam=lam, k=math.inf, n=math.inf), kappa)
    formula = (1 - kappa) * lam**2 + kappa * lam ** (16 / 7)
    ok &= abs(mixed.employment_total - formula) <= 1e-9
    ok &= abs(mixed.inequality_factor - lam ** (2 / 7)) <= 1e-9
    report("criterion 3 (two-sided market)", bool(ok))


def test_criterion_4_monopoly():
    rational = monopoly_optimize(rho=0.0, t=6.0, rational=True)
    cosesi = monopoly_optimize(rho=1.0, t=6.0, n=2)
    ok = abs(rational.quantity_star - 0.10) <= 5e-3
    ok &= abs(rational.profit_star - 0.045) <= 5e-3
    # the narrated price 0.449 sits on a flat profit stretch; the exact
    # argmax price is 0.4361 with a profit gap under 5e-5 (noted row)
    th_at_narrated = monopoly_rational_demand(0.449, t=6.0)
    ok &= 0.0 <= rational.profit_star - 0.449 * th_at_narrated <= 5e-5
    ok &= abs(cosesi.price_star - 0.586) <= 5e-3
    ok &= abs(cosesi.quantity_star - 0.293) <= 5e-3
    ok &= abs(cosesi.profit_star - 0.172) <= 5e-3
    ok &= cosesi.profit_star > 3 * rational.profit_star
    report("criterion 4 (monopoly)", bool(ok))


def test_criterion_5_financial():
    ok = True
    for eta in np.linspace(0.1, 0.9, 9):
        ok &= abs(vasicek_cdf(eta, 0.5, 0.0, 1e-12, gaussian_omega=True) - eta) <= 1e-6
    for omega in (-0.8, 0.0, 0.7, 1.6):
        p = norm_cdf(omega)
        ok &= abs(default_stats(omega, 1.0, 0.0, "covariance") - 0.0) <= 1e-10
        ok &= abs(default_stats(omega, 1.0, 1.0, "covariance") - p * (1 - p)) <= 1e-10
    grid = np.linspace(0.01, 0.99, 20)
    for p in grid:
        for tau in grid:
            p11 = p * p + tau * p * (1 - p)
            p00 = (1 - p) ** 2 + tau * p * (1 - p)
            for alpha in grid:
                want = 0.0 if alpha <= p00 else (0.5 if alpha <= 1 - p11 else 1.0)
                ok &= var_two_borrowers(p, tau, alpha) == want
    report("criterion 5 (financial identities)", bool(ok))


def test_criterion_6_property_suites():
    mle = MLE()
    pow2, pow3 = power_cost(2), power_cost(3)
    ok = True
    # ranking against NE on the stated grid
    ne = solve_ne(pow2).theta
    for n in range(1, 9):
        for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
            ok &= solve_cosesi(pow2, mle, n, rho).theta <= ne + 1e-10
    # rho-monotonicity at the n = 1000 proxy
    thetas = sweep("rho", [0.0, 0.25, 0.5, 0.75, 1.0], pow2, mle, n=1000).thetas()
    ok &= all(b <= a + 1e-10 for a, b in zip(thetas, thetas[1:]))
    # n-monotonicity for n = 1..8
    for rho in (0.0, 0.5, 1.0):
        thetas = sweep("n", list(range(1, 9)), pow2, mle, rho=rho).thetas()
        ok &= all(b >= a - 1e-10 for a, b in zip(thetas, thetas[1:]))
    # persistence: no information aggregation at rho = 1
    ne3 = solve_ne(pow3).theta
    for n in (1, 10, 100, 1000):
        ok &= abs(solve_cosesi(pow3, mle, n, 1.0).theta - ne3) > 0.15
    # informativeness collapse under polarization
    psi = informativeness(200, action_count_pmf(RhoMixture(1.0), 200, 0.3), 0.3)
    ok &= psi < 0.02
    # balance-equation counterexamples classified exactly
    referrals = bahadur_joint(3, 0.5, 0.0, r3=-1.0)
    dependent_binomial = joint_from_conditionals(0.5, 0.25, 0.75, 1.0, 0.5, 0.5, 0.0)
    ok &= not balance_check(referrals, 0.5).holds
    ok &= balance_check(dependent_binomial, 0.5).holds
    report("criterion 6 (property suites)", bool(ok))


def test_criterion_7_monte_carlo_oracle():
    mle = MLE()
    pow3 = power_cost(3)
    ok = True
    stream = 0
    for n in (1, 2, 3, 5):
        for rho in (0.0, 0.5, 1.0):
            stream += 1
            out = mc_population_equilibrium(
                pow3, mle, n, RhoMixture(rho), num_agents=100_000,
                rng=SeedableRng(1234, stream),
            )
            target = solve_cosesi(pow3, mle, n, rho).theta
            ok &= abs(out.theta_hat - target) <= 3 * out.stderr
    # sampled counts match the exact pmf
    for i, (n, theta, rho) in enumerate([(2, 0.5, 0.0), (3, 0.3, 0.5), (5, 0.7, 0.9)]):
        bits = sample_correlated(n, theta, rho, SeedableRng(77, i), size=10**6)
        counts = np.bincount(bits.sum(axis=1), minlength=n + 1)
        probs = action_count_pmf(RhoMixture(rho), n, theta).probs
        _, pvalue, _ = chi_square_gof(counts, probs)
        ok &= pvalue > 0.001
    report("criterion 7 (Monte Carlo oracle)", bool(ok))


def test_criterion_8_dynamics():
    mle = MLE()
    ok = True
    configs = [
        (power_cost(4), 2, MarkovShockChain(0.0, 0.5), 0.9, 0.0),
        (power_cost(4), 2, MarkovShockChain(0.5, 0.5), 0.2, 0.0),
        (power_cost(3), 3, MarkovShockChain(0.0, 1.0), 0.5, 0.3),
        (power_cost(3), 3, MarkovShockChain(0.3, 0.1), 0.5, 0.0),
        (power_cost(2), 5, MarkovShockChain(0.2, 0.2), 0.1, 1.0),
        (linear_cost(), 4, MarkovShockChain(0.4, 0.6), 0.8, 0.2),
    ]
    for cost, n, chain, theta0, rho0 in configs:
        traj = simulate_dynamics(cost, mle, n, chain, 0.1, theta0, rho0, 500)
        rho_star = chain.p_xi / (chain.p_xi + chain.q_xi)
        target = solve_cosesi(cost, mle, n, rho_star).theta
        ok &= abs(traj.final_theta() - target) <= 1e-4
        # exact geometric convergence of the shock probability
        factor = 1.0 - chain.p_xi - chain.q_xi
        for t in (0, 1, 5, 50, 500):
            want = rho_star + (rho0 - rho_star) * factor**t
            ok &= abs(traj.rho[t] - want) <= 1e-12
    report("criterion 8 (dynamics)", bool(ok))


def test_criterion_9_documented_discrepancies():
    rows = run_repro()
    ok = all(r.status != "FAIL" for r in rows)
    noted = {r.name: r for r in rows if r.status == "PASS-WITH-NOTE"}
    # the three source inconsistencies, each carrying both values
    tax = noted.get("tax SESI vs source narration")
    ok &= tax is not None and "0.58" in tax.note and "0.5616" in tax.note
    var = noted.get("VaR p=.05 tau=0.9 a=.95")
    ok &= var is not None and "100%" in var.note and var.computed == 0.5
    ineq = noted.get("inequality disadvantage ratio")
    ok &= ineq is not None and "three times" in ineq.note
    ok &= ineq is not None and abs(ineq.computed - 0.1 ** (-2 / 7)) <= 1e-9
    report("criterion 9 (documented discrepancies)", bool(ok))
