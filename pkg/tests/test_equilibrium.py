import math

import numpy as np
import pytest

from cosesi.model import (
    BayesBeta,
    RhoMixture,
    BahadurJoint,
    InteriorRhoUnsupported,
    linear_cost,
    power_cost,
    s_shaped_cost,
)
from cosesi.equilibrium import (
    BadWeights,
    cosesi_rho1_closed,
    enumerate_cosesi,
    solve_assortative,
    solve_bayesian_cosesi,
    solve_cosesi,
    solve_general_cmb,
    solve_heterogeneous,
    solve_ne,
    solve_with_dgp,
    sweep,
    variation_diagnostic,
)
from cosesi.numerics import find_sign_changes, solve_bracketed

from conftest import (
    ASSORT_LIMIT,
    NE_POW3,
    NE_POW4,
    ROOT_POW4_BETA_RHO0,
    ROOT_POW4_BETA_RHO5,
    ROOT_POW4_MLE_RHO0,
    ROOT_POW4_MLE_RHO5,
    SESI3_POW3,
)


def grid_root_oracle(residual, step=1e-6):
    """Dense-grid sign scan refined by bisection, independent of the solvers."""
    ts = np.arange(0.0, 1.0 + step, step)
    vals = np.array([residual(t) for t in ts])
    roots = list(ts[vals == 0.0])
    sign = np.sign(vals)
    idx = np.nonzero((sign[:-1] * sign[1:]) < 0)[0]
    for i in idx:
        lo, hi = ts[i], ts[i + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if residual(lo) * residual(mid) <= 0:
                hi = mid
            else:
                lo = mid
        roots.append(0.5 * (lo + hi))
    return sorted(roots)


class TestSolveNE:
    def test_linear(self):
        assert solve_ne(linear_cost()).theta == pytest.approx(0.5, abs=1e-10)

    def test_cubic(self, pow3):
        assert solve_ne(pow3).theta == pytest.approx(NE_POW3, abs=1e-9)

    def test_quartic(self, pow4):
        assert solve_ne(pow4).theta == pytest.approx(NE_POW4, abs=1e-9)

    def test_residual_recorded(self, pow3):
        assert solve_ne(pow3).residual <= 1e-9


class TestSolveCosesi:
    def test_pow4_table(self, mle, beta_est, pow4):
        assert solve_cosesi(pow4, mle, 2, 0.0).theta == pytest.approx(ROOT_POW4_MLE_RHO0, abs=1e-9)
        assert solve_cosesi(pow4, beta_est, 2, 0.0).theta == pytest.approx(ROOT_POW4_BETA_RHO0, abs=1e-9)
        assert solve_cosesi(pow4, mle, 2, 0.5).theta == pytest.approx(ROOT_POW4_MLE_RHO5, abs=1e-9)
        assert solve_cosesi(pow4, beta_est, 2, 0.5).theta == pytest.approx(ROOT_POW4_BETA_RHO5, abs=1e-9)

    def test_full_correlation(self, mle, pow4):
        assert solve_cosesi(pow4, mle, 2, 1.0).theta == pytest.approx(0.5, abs=1e-10)

    def test_sesi_three_signals(self, mle, pow3):
        res = solve_cosesi(pow3, mle, 3, 0.0)
        assert res.theta == pytest.approx(SESI3_POW3, abs=1e-9)
        assert res.concept == "SESI"

    def test_uniqueness_single_sign_change(self, mle, pow3):
        # Residual of the equilibrium equation crosses zero exactly once.
        from cosesi.equilibrium import cost_grid
        from cosesi.model import weighted_bernstein

        for rho in (0.0, 0.5, 1.0):
            grid = cost_grid(mle, 4, pow3)
            scan = find_sign_changes(lambda t: 1 - t - weighted_bernstein(4, t, rho, grid), 1e-4)
            assert len(scan.brackets) + len(scan.node_roots) == 1

    def test_linear_cost_equals_ne_for_all_rho_n(self, mle):
        # Psi collapses to c(theta) for unbiased G and linear c.
        for rho in (0.0, 0.25, 0.75, 1.0):
            for n in (1, 3, 7):
                assert solve_cosesi(linear_cost(), mle, n, rho).theta == pytest.approx(0.5, abs=1e-10)

    def test_persistent_bias_at_full_correlation(self, mle, pow3):
        # theta* stays at 1/2 for every n while NE is about 0.682
        for n in (1, 10, 100, 1000):
            assert solve_cosesi(pow3, mle, n, 1.0).theta == pytest.approx(0.5, abs=1e-10)

    def test_large_n_limit_mode(self, mle, pow3):
        # SESI converges to NE under a consistent procedure; the 1e6 proxy
        # switches to the limit form and must land on the NE root.
        assert solve_cosesi(pow3, mle, 10**6, 0.0).theta == pytest.approx(NE_POW3, abs=1e-9)

    def test_invalid_rho(self, mle, pow3):
        with pytest.raises(ValueError):
            solve_cosesi(pow3, mle, 2, 1.5)


class TestClosedFormRhoOne:
    def test_power_costs_give_half(self, mle):
        for d in (1, 2, 4, 9):
            for n in (1, 3, 8):
                assert cosesi_rho1_closed(power_cost(d), mle, n).theta == pytest.approx(0.5, abs=1e-12)

    def test_agrees_with_bisection(self, beta_est, pow4):
        for n in (2, 4, 6):
            closed = cosesi_rho1_closed(pow4, beta_est, n).theta
            iterated = solve_cosesi(pow4, beta_est, n, 1.0).theta
            assert closed == pytest.approx(iterated, abs=1e-9)

    def test_direct_substitution(self, mle, pow2):
        # C_{2,0} = 0 and C_{2,1} = 1 give (1-0)/(1-0+1) = 1/2
        assert cosesi_rho1_closed(pow2, mle, 2).theta == pytest.approx(0.5, abs=1e-14)

    def test_prop4_gap_shrinks_with_n(self, pow3):
        # Bayesian endpoint costs converge to c(0), c(1), so the closed form
        # approaches the consistent-limit value (1-c(0))/(1-c(0)+c(1)); the
        # gap decays like 3/(4n) for the uniform prior and cubic cost.
        G = BayesBeta(1.0, 1.0, 0.0, 1.0)
        limit = (1 - pow3(0.0)) / (1 - pow3(0.0) + pow3(1.0))
        gaps = [abs(cosesi_rho1_closed(pow3, G, n).theta - limit) for n in (1, 4, 16, 64, 256)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 5e-3


class TestEnumerate:
    def test_full_correlation_unique_between_ne(self):
        # Asymmetric S-curve whose middle diagonal crossing lies in the
        # concave region, so the single rho=1 root (the chord fixed point
        # c(0)/(1 + c(0) - c(1))) sits strictly between the smallest and
        # second-largest NE.
        c = s_shaped_cost(0.02, 0.85, 25.0, 0.35)
        res = enumerate_cosesi(c, 12, 1.0)
        assert len(res.roots) == 1
        assert res.roots[0] == pytest.approx(c(0.0) / (1.0 + c(0.0) - c(1.0)), abs=1e-9)
        nes = grid_root_oracle(lambda t: t - c(t), 1e-4)
        assert len(nes) == 3
        assert nes[0] < res.roots[0] < nes[1]

    def test_multiplicity_at_low_correlation(self):
        c = s_shaped_cost()
        res = enumerate_cosesi(c, 40, 0.0)
        assert 1 <= len(res.roots) <= 3
        oracle = grid_root_oracle(
            lambda t: t - sum(
                math.comb(40, y) * t**y * (1 - t) ** (40 - y) * c(y / 40) for y in range(41)
            ),
            1e-4,
        )
        assert len(res.roots) == len(oracle)
        for got, want in zip(res.roots, oracle):
            assert got == pytest.approx(want, abs=1e-6)

    def test_count_weakly_decreasing_in_rho(self):
        c = s_shaped_cost()
        n0 = len(enumerate_cosesi(c, 40, 0.0).roots)
        n1 = len(enumerate_cosesi(c, 40, 1.0).roots)
        assert n1 == 1 <= n0


class TestVariationDiagnostic:
    def test_convex(self, pow2):
        d = variation_diagnostic(pow2, 5)
        assert d.delta_1 > 0 and d.delta_nminus1 > 0 and d.unique_guaranteed

    def test_concave(self):
        d = variation_diagnostic(power_cost(0.5), 5)
        assert d.delta_1 < 0 and d.delta_nminus1 < 0 and d.unique_guaranteed

    def test_certificate_implies_unique_root(self):
        # 50 random increasing benefit curves with interior endpoints
        rs = np.random.default_rng(5)
        checked = 0
        for _ in range(50):
            lo = rs.uniform(0.02, 0.25)
            hi = rs.uniform(0.7, 0.98)
            k = rs.uniform(2.0, 25.0)
            m = rs.uniform(0.25, 0.75)
            c = s_shaped_cost(lo, hi, k, m)
            n = int(rs.integers(2, 7))
            rho = rs.uniform(0.0, 0.99)
            if variation_diagnostic(c, n).unique_guaranteed:
                checked += 1
                assert len(enumerate_cosesi(c, n, rho).roots) == 1
        assert checked > 5


class TestAssortative:
    def test_zero_correlation_is_sesi(self, mle, pow3):
        got = solve_assortative(pow3, mle, 3, lambda eta: 0.0).theta
        assert got == pytest.approx(solve_cosesi(pow3, mle, 3, 0.0).theta, abs=1e-9)

    def test_single_signal_linear_cost(self, mle):
        assert solve_assortative(linear_cost(), mle, 1, lambda eta: eta).theta == pytest.approx(
            0.5, abs=1e-10
        )

    def test_closed_form_small_n(self, mle):
        for n in (2, 5, 17):
            target = (5 - 1 / n - math.sqrt(1 / n**2 - 2 / n + 17)) / (2 * (1 - 1 / n))
            got = solve_assortative(linear_cost(), mle, n, lambda eta: eta).theta
            assert got == pytest.approx(target, abs=1e-9)

    def test_infinite_sample_limit(self, mle):
        got = solve_assortative(linear_cost(), mle, 10**6, lambda eta: eta).theta
        assert got == pytest.approx(ASSORT_LIMIT, abs=1e-3)


class TestBayesianCosesi:
    def test_rho_zero_is_bayes_sesi_for_any_zeta(self, pow2):
        thetas = [solve_bayesian_cosesi(pow2, (1.0, 1.0), 2, 0.0, z).theta for z in (0.0, 0.4, 1.0)]
        assert max(thetas) - min(thetas) <= 1e-10

    def test_zeta_one_collapses_to_naive_mixture(self, pow2):
        # full neglect: equals the rho=1 CoSESI under the iid Bayes posterior costs
        naive = BayesBeta(1.0, 1.0, 0.0, 1.0)
        want = solve_cosesi(pow2, naive, 2, 1.0).theta
        got = solve_bayesian_cosesi(pow2, (1.0, 1.0), 2, 1.0, 1.0).theta
        assert got == pytest.approx(want, abs=1e-9)

    def test_interior_rho_rejected(self, pow2):
        with pytest.raises(InteriorRhoUnsupported):
            solve_bayesian_cosesi(pow2, (1.0, 1.0), 2, 0.5, 0.5)

    def test_zeta_direction_depends_on_prior(self, pow2):
        # theta*(zeta) is a Moebius function of zeta at rho = 1, hence monotone
        # pointwise; the non-monotonicity claim is that its direction flips
        # with the parameterization.  Grid search at 1e-3 confirms both signs.
        def gap(a, b):
            zs = np.arange(0.0, 1.0 + 1e-3, 1e-3)
            vals = [solve_bayesian_cosesi(pow2, (a, b), 2, 1.0, 0.0).theta,
                    solve_bayesian_cosesi(pow2, (a, b), 2, 1.0, 1.0).theta]
            # closed form is monotone, endpoints determine direction
            return vals[1] - vals[0]

        assert gap(0.5, 0.2) > 1e-4   # increasing in zeta
        assert gap(0.2, 0.2) < -1e-4  # decreasing in zeta

    def test_monotone_in_zeta_pointwise(self, pow2):
        vals = [solve_bayesian_cosesi(pow2, (0.2, 0.2), 2, 1.0, z).theta for z in np.linspace(0, 1, 11)]
        diffs = np.diff(vals)
        assert (diffs <= 1e-12).all() or (diffs >= -1e-12).all()


class TestHeterogeneous:
    def test_single_group_reduces(self, mle, pow4):
        got = solve_heterogeneous([(1.0, mle, 2)], pow4, 0.5).theta
        assert got == pytest.approx(solve_cosesi(pow4, mle, 2, 0.5).theta, abs=1e-10)

    def test_duplicate_groups_degenerate(self, mle, pow4):
        got = solve_heterogeneous([(0.5, mle, 3), (0.5, mle, 3)], pow4, 0.25).theta
        assert got == pytest.approx(solve_cosesi(pow4, mle, 3, 0.25).theta, abs=1e-10)

    def test_mixture_sandwiched_by_pure_equilibria(self, mle, pow4):
        mix = solve_heterogeneous([(0.5, mle, 2), (0.5, mle, 5)], pow4, 0.0).theta
        lo = solve_cosesi(pow4, mle, 2, 0.0).theta
        hi = solve_cosesi(pow4, mle, 5, 0.0).theta
        assert min(lo, hi) < mix < max(lo, hi)

    def test_bad_weights(self, mle, pow4):
        with pytest.raises(BadWeights):
            solve_heterogeneous([(0.6, mle, 2), (0.6, mle, 3)], pow4, 0.0)


class TestGeneralCMB:
    def test_nu_one_reproduces_sesi(self, mle, pow2):
        got = solve_general_cmb(pow2, mle, 4, 1.0)
        assert len(got.roots) == 1
        assert got.roots[0] == pytest.approx(solve_cosesi(pow2, mle, 4, 0.0).theta, abs=1e-9)

    def test_negative_infinity_matches_full_correlation_for_power_cost(self, mle, pow2):
        # power costs have C_{n,0} + C_{n,1} = 1, making the extreme
        # positive-dependence root coincide with the rho = 1 value 1/2
        got = solve_general_cmb(pow2, mle, 3, -math.inf)
        assert got.roots[0] == pytest.approx(solve_cosesi(pow2, mle, 3, 1.0).theta, abs=1e-9)

    def test_root_matches_grid_oracle(self, mle, pow2):
        from cosesi.model import action_count_pmf, CMB
        from cosesi.equilibrium import cost_grid

        grid = cost_grid(mle, 4, pow2)
        oracle = grid_root_oracle(
            lambda t: 1 - t - float(action_count_pmf(CMB(3.0), 4, t).probs @ grid), 1e-4
        )
        got = solve_general_cmb(pow2, mle, 4, 3.0)
        assert len(got.roots) == len(oracle)
        assert got.roots[0] == pytest.approx(oracle[0], abs=1e-6)


class TestGeneralDGPSolver:
    def test_balance_holding_joint_reproduces_sesi(self, mle, pow3):
        # A theta-indexed family of dependent signals whose count stays
        # binomial (the balance equations hold at every theta): the general
        # equilibrium must coincide with the SESI to 1e-9.
        from cosesi.sampling import balance_check, joint_from_conditionals
        from cosesi.equilibrium import cost_grid
        from cosesi.numerics import Bracket, solve_bracketed, Tolerance

        def joint_for(theta):
            s1 = theta
            a = 0.1 * theta * (1 - theta)  # dependence amplitude
            s2 = theta - a
            s3 = theta + a * theta / (1 - theta)
            s4 = theta**2 / (theta - a)  # pins P(111) = theta^3
            s5 = theta
            s6 = (3 * theta**2 * (1 - theta) - s1 * s2 * (1 - s4) - s1 * (1 - s2) * s5) / (
                (1 - s1) * s3
            )
            s7 = 1 - (1 - theta) ** 3 / ((1 - s1) * (1 - s3))
            return joint_from_conditionals(s1, s2, s3, s4, s5, s6, s7)

        for theta in (0.2, 0.5, 0.8):
            joint = joint_for(theta)
            assert balance_check(joint, theta).holds
            # signals are genuinely dependent: P(x2=1|x1=1) != theta
            assert abs((theta - 0.1 * theta * (1 - theta)) - theta) > 1e-3

        grid = cost_grid(mle, 3, pow3)

        def res(t):
            return 1 - t - float(joint_for(t).count_pmf().probs @ grid)

        root = solve_bracketed(res, Bracket(0.05, 0.9, res(0.05), res(0.9)), Tolerance(1e-12))
        assert root == pytest.approx(solve_cosesi(pow3, mle, 3, 0.0).theta, abs=1e-9)

    def test_bahadur_family_infeasible_near_boundary(self, mle, pow3):
        # fixed pairwise correlations of mixed sign stop being admissible as
        # theta approaches the boundary; the pmf constructor must say so
        from cosesi.model import InadmissibleCorrelation, action_count_pmf

        dgp = BahadurJoint(r2=(0.05, 0.05, -0.1), r3=0.0)
        action_count_pmf(dgp, 3, 0.5)  # fine in the interior
        with pytest.raises(InadmissibleCorrelation):
            action_count_pmf(dgp, 3, 0.001)

    def test_rho_mixture_agrees_with_dedicated_solver(self, mle, pow4):
        got = solve_with_dgp(pow4, mle, 2, RhoMixture(0.5))
        assert got.roots[0] == pytest.approx(solve_cosesi(pow4, mle, 2, 0.5).theta, abs=1e-9)


class TestComparativeStatics:
    def test_prop2_cosesi_below_ne(self, mle, beta_est, pow2):
        ne = solve_ne(pow2).theta
        for G in (mle, beta_est):
            for n in range(1, 9):
                for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
                    assert solve_cosesi(pow2, G, n, rho).theta <= ne + 1e-10

    def test_prop3_rho_monotone_large_n(self, mle, pow2):
        table = sweep("rho", [0.0, 0.25, 0.5, 0.75, 1.0], pow2, mle, n=10**4)
        thetas = table.thetas()
        assert all(b <= a + 1e-10 for a, b in zip(thetas, thetas[1:]))

    def test_prop5_n_monotone(self, mle, pow2):
        for rho in (0.0, 0.5, 1.0):
            table = sweep("n", list(range(1, 9)), pow2, mle, rho=rho)
            thetas = table.thetas()
            assert all(b >= a - 1e-10 for a, b in zip(thetas, thetas[1:]))

    def test_prop6_dispersion_ranking_and_vanishing_gap(self, mle, beta_est, pow2):
        gaps = []
        for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
            disp = solve_cosesi(pow2, beta_est, 3, rho).theta
            tight = solve_cosesi(pow2, mle, 3, rho).theta
            assert disp <= tight + 1e-10
            gaps.append(tight - disp)
        assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] == pytest.approx(0.0, abs=1e-9)

    def test_example4_rho_ranking(self, mle, pow3):
        table = sweep("rho", [0.0, 0.5, 0.75, 1.0], pow3, mle, n=3)
        thetas = table.thetas()
        assert len(set(round(t, 6) for t in thetas)) == 4
        assert all(b < a for a, b in zip(thetas, thetas[1:]))
