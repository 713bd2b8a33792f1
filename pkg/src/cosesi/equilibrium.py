"""Fixed-point solvers for the sampling equilibria.

Every concept here is a root of "one minus theta equals the expected measure
of agents choosing the outside action", with the expectation taken under the
relevant action-count law:

* NE:        1 - theta = c(theta)
* SESI:      1 - theta = B_n(theta; C_n)                      (iid sampling)
* CoSESI:    1 - theta = (1-rho) B_n(theta; C_n) + rho BB_n(theta; C_n)
* variants:  assortative, Bayesian partial neglect, heterogeneous groups,
             general Conway-Maxwell-Binomial counts.

The left side is strictly decreasing and the right side increasing for
increasing costs, so every solve is a bracketed bisection on [0, 1]; no
damped iteration is used anywhere.  Requests with n above 100000 and MLE
inference switch the Bernstein sum to its consistent limit C(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import (
    Bracket,
    Tolerance,
    find_sign_changes,
    integrate,
    solve_bracketed,
)
from .model import (
    CMB,
    BayesBeta,
    CostFunction,
    InferenceProcedure,
    InteriorRhoUnsupported,
    MLE,
    SignalDGP,
    action_count_pmf,
    weighted_bernstein,
    bernstein,
)

__all__ = [
    "EquilibriumResult",
    "SweepTable",
    "BadWeights",
    "LARGE_N",
    "solve_ne",
    "solve_cosesi",
    "cosesi_rho1_closed",
    "enumerate_cosesi",
    "variation_diagnostic",
    "VariationDiagnostic",
    "solve_assortative",
    "solve_bayesian_cosesi",
    "solve_heterogeneous",
    "solve_general_cmb",
    "solve_with_dgp",
    "sweep",
    "cost_grid",
]

LARGE_N = 100_000  # above this, MLE Bernstein sums switch to the limit C(theta)

_SOLVE_TOL = Tolerance(abs_tol=1e-12, max_iter=300)


class BadWeights(ValueError):
    """Mixture weights are negative or do not sum to one."""


@dataclass(frozen=True)
class EquilibriumResult:
    """Fixed point(s) with the residual of the defining equation.

    ``theta_star`` is a float for unique-equilibrium concepts and a tuple for
    enumerating solvers.  ``residual`` is the largest |equation residual|
    across the reported roots.
    """

    theta_star: float | tuple[float, ...]
    concept: str
    residual: float
    params: dict = field(default_factory=dict)

    @property
    def theta(self) -> float:
        """The unique root, or the first one for multi-root results."""
        if isinstance(self.theta_star, tuple):
            return self.theta_star[0]
        return self.theta_star

    @property
    def roots(self) -> tuple[float, ...]:
        if isinstance(self.theta_star, tuple):
            return self.theta_star
        return (self.theta_star,)


@dataclass(frozen=True)
class SweepTable:
    """Comparative-statics table: sorted (axis value, theta_star) rows."""

    axis: str
    rows: tuple[tuple[float, float], ...]

    def values(self) -> list[float]:
        return [r[0] for r in self.rows]

    def thetas(self) -> list[float]:
        return [r[1] for r in self.rows]


def cost_grid(G: InferenceProcedure, n: int, cost: Callable[[float], float]) -> np.ndarray:
    """Expected costs C_{n, y/n} on the sample-mean grid y = 0..n."""
    return np.array([G.expected_cost(n, y / n, cost) for y in range(n + 1)])


def _bisect_decreasing(residual: Callable[[float], float]) -> float:
    """Root of a residual that is positive at 0 and negative at 1 (weakly)."""
    f0, f1 = residual(0.0), residual(1.0)
    if f0 <= 0.0:
        return 0.0 if f0 == 0.0 or abs(f0) < 1e-12 else _scan_single(residual)
    if f1 >= 0.0:
        return 1.0 if f1 == 0.0 or abs(f1) < 1e-12 else _scan_single(residual)
    return solve_bracketed(residual, Bracket(0.0, 1.0, f0, f1), _SOLVE_TOL)


def _scan_single(residual: Callable[[float], float]) -> float:
    scan = find_sign_changes(residual, 1e-3)
    if scan.node_roots:
        return scan.node_roots[0]
    if not scan.brackets:
        raise ValueError("no root of the equilibrium equation on [0,1]")
    return solve_bracketed(residual, scan.brackets[0], _SOLVE_TOL)


def solve_ne(c: CostFunction) -> EquilibriumResult:
    """Nash equilibrium: the unique root of 1 - theta = c(theta)."""
    res = lambda t: 1.0 - t - c(t)
    theta = _bisect_decreasing(res)
    return EquilibriumResult(theta, "NE", abs(res(theta)), {"cost": c.name})


def _mle_limit_mode(G: InferenceProcedure, n: int) -> bool:
    return n > LARGE_N and isinstance(G, MLE)


def solve_cosesi(
    c: CostFunction, G: InferenceProcedure, n: int, rho: float
) -> EquilibriumResult:
    """Simple CoSESI: root of 1 - theta = Psi_n(theta, rho; C_n).

    Unique for any increasing cost, n, G, and rho in [0, 1]; rho = 0 is the
    SESI and rho = 1 admits the closed form of :func:`cosesi_rho1_closed`.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0,1], got {rho}")
    if _mle_limit_mode(G, n):
        c0, c1 = c(0.0), c(1.0)

        def res(t: float) -> float:
            psi = (1.0 - rho) * c(t) + rho * (t * c1 + (1.0 - t) * c0)
            return 1.0 - t - psi

    else:
        grid = cost_grid(G, n, c)

        def res(t: float) -> float:
            return 1.0 - t - weighted_bernstein(n, t, rho, grid)

    theta = _bisect_decreasing(res)
    concept = "SESI" if rho == 0.0 else "CoSESI"
    return EquilibriumResult(
        theta, concept, abs(res(theta)), {"cost": c.name, "G": G.kind, "n": n, "rho": rho}
    )


def cosesi_rho1_closed(c: CostFunction, G: InferenceProcedure, n: int) -> EquilibriumResult:
    """Closed form at rho = 1: theta* = (1 - C_{n,0}) / (1 - C_{n,0} + C_{n,1})."""
    if _mle_limit_mode(G, n):
        c0, c1 = c(0.0), c(1.0)
    else:
        c0 = G.expected_cost(n, 0.0, c)
        c1 = G.expected_cost(n, 1.0, c)
    theta = (1.0 - c0) / (1.0 - c0 + c1)
    residual = abs(1.0 - theta - (theta * c1 + (1.0 - theta) * c0))
    return EquilibriumResult(theta, "CoSESI", residual, {"cost": c.name, "G": G.kind, "n": n})


def enumerate_cosesi(
    c: CostFunction, n: int, rho: float, grid_step: float = 1e-4
) -> EquilibriumResult:
    """All CoSESIs of the cooperative benefit-form game theta = Psi_n(theta, rho; c).

    Intended for S-shaped benefit curves under MLE (so C_n = c); there is at
    least one and at most three roots, exactly one when rho = 1.  Roots closer
    than 1e-6 are deduplicated.
    """
    grid = np.array([c(y / n) for y in range(n + 1)])

    def res(t: float) -> float:
        return t - weighted_bernstein(n, t, rho, grid)

    scan = find_sign_changes(res, grid_step)
    roots = list(scan.node_roots)
    roots += [solve_bracketed(res, b, _SOLVE_TOL) for b in scan.brackets]
    roots.sort()
    dedup: list[float] = []
    for r in roots:
        if not dedup or r - dedup[-1] > 1e-6:
            dedup.append(r)
    residual = max((abs(res(r)) for r in dedup), default=math.inf)
    return EquilibriumResult(
        tuple(dedup), "CoSESI", residual, {"cost": c.name, "n": n, "rho": rho}
    )


@dataclass(frozen=True)
class VariationDiagnostic:
    delta_1: float
    delta_nminus1: float
    unique_guaranteed: bool


def variation_diagnostic(c: CostFunction, n: int) -> VariationDiagnostic:
    """Boundary variation of c on the 1/n grid and the uniqueness certificate.

    delta^n_j = Delta^n_{j+1} - Delta^n_j with Delta^n_m = c(m/n) - c((m-1)/n).
    If delta^n_1 <= 0 or delta^n_{n-1} >= 0 the CoSESI is unique for rho < 1.
    """
    if n < 2:
        raise ValueError(f"variation diagnostic needs n >= 2, got {n}")

    def delta(j: int) -> float:
        d_next = c((j + 1) / n) - c(j / n)
        d_here = c(j / n) - c((j - 1) / n)
        return d_next - d_here

    d1, dn1 = delta(1), delta(n - 1)
    return VariationDiagnostic(d1, dn1, d1 <= 0.0 or dn1 >= 0.0)


def solve_assortative(
    c: CostFunction,
    G: InferenceProcedure,
    n: int,
    rho_fn: Callable[[float], float],
) -> EquilibriumResult:
    """Assortative CoSESI with type-dependent signal correlation rho(eta).

    Solves 1 - theta = B_n(theta; C_n) + B_n(theta; L) - BB_n(theta; L) where
    L(z) = int_{C_{n,z}}^1 rho(eta) d eta.  The n + 1 quadratures are done
    once per call, not per bisection step.
    """
    quad_tol = Tolerance(abs_tol=1e-13)

    def lam_of(cval: float) -> float:
        hi = min(1.0, max(cval, 0.0))
        return integrate(rho_fn, hi, 1.0, quad_tol)

    if _mle_limit_mode(G, n):
        c0, c1 = c(0.0), c(1.0)
        lam0, lam1 = lam_of(c0), lam_of(c1)

        def res(t: float) -> float:
            rhs = c(t) + lam_of(c(t)) - (t * lam1 + (1.0 - t) * lam0)
            return 1.0 - t - rhs

    else:
        grid = cost_grid(G, n, c)
        lam_grid = np.array([lam_of(v) for v in grid])

        def res(t: float) -> float:
            rhs = (
                bernstein(n, t, grid)
                + bernstein(n, t, lam_grid)
                - (t * lam_grid[-1] + (1.0 - t) * lam_grid[0])
            )
            return 1.0 - t - rhs

    theta = _bisect_decreasing(res)
    return EquilibriumResult(
        theta, "AssortativeCoSESI", abs(res(theta)), {"cost": c.name, "G": G.kind, "n": n}
    )


def solve_bayesian_cosesi(
    c: CostFunction,
    prior: tuple[float, float],
    n: int,
    rho: float,
    zeta: float,
) -> EquilibriumResult:
    """Bayesian CoSESI under zeta-degree correlation neglect, rho in {0, 1}.

    rho = 0 reduces to the SESI with iid-posterior expected costs for any
    zeta.  rho = 1 solves the zeta-mixed polarized equation, which also has a
    closed form that is cross-checked to 1e-9.
    """
    alpha, beta = prior
    if rho not in (0.0, 1.0, 0, 1):
        raise InteriorRhoUnsupported(f"solve_bayesian_cosesi needs rho in {{0,1}}, got {rho}")
    if not 0.0 <= zeta <= 1.0:
        raise BadWeights(f"zeta must be in [0,1], got {zeta}")
    if rho == 0.0:
        g0 = BayesBeta(alpha, beta, rho=0.0, zeta=1.0)
        grid = cost_grid(g0, n, c)

        def res(t: float) -> float:
            return 1.0 - t - bernstein(n, t, grid)

        theta = _bisect_decreasing(res)
        return EquilibriumResult(
            theta,
            "BayesianCoSESI",
            abs(res(theta)),
            {"cost": c.name, "prior": (alpha, beta), "n": n, "rho": 0.0, "zeta": zeta},
        )

    naive = BayesBeta(alpha, beta, rho=0.0, zeta=1.0)
    aware = BayesBeta(alpha, beta, rho=1.0, zeta=0.0)
    c0 = (naive.expected_cost(n, 0.0, c), naive.expected_cost(n, 1.0, c))
    c1 = (aware.expected_cost(n, 0.0, c), aware.expected_cost(n, 1.0, c))

    def res(t: float) -> float:
        mixed = zeta * (t * c0[1] + (1.0 - t) * c0[0]) + (1.0 - zeta) * (
            t * c1[1] + (1.0 - t) * c1[0]
        )
        return 1.0 - t - mixed

    theta = _bisect_decreasing(res)
    num = 1.0 - zeta * c0[0] - (1.0 - zeta) * c1[0]
    den = 1.0 + zeta * (c0[1] - c0[0]) + (1.0 - zeta) * (c1[1] - c1[0])
    closed = num / den
    if abs(theta - closed) > 1e-9:
        raise ArithmeticError(
            f"bisection {theta} disagrees with the closed form {closed} beyond 1e-9"
        )
    return EquilibriumResult(
        theta,
        "BayesianCoSESI",
        abs(res(theta)),
        {"cost": c.name, "prior": (alpha, beta), "n": n, "rho": 1.0, "zeta": zeta},
    )


def solve_heterogeneous(
    specs: Sequence[tuple[float, InferenceProcedure, int]],
    c: CostFunction,
    rho: float,
) -> EquilibriumResult:
    """CoSESI for a population mixing inference procedures and sample sizes.

    ``specs`` holds (weight, G, n) triples; weights must be nonnegative and
    sum to one.  Solves 1 - theta = sum_j w_j Psi_{n_j}(theta, rho; C^j).
    """
    weights = [w for w, _, _ in specs]
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise BadWeights(f"weights must be nonnegative and sum to 1, got {weights}")
    grids = [(w, n, cost_grid(G, n, c)) for w, G, n in specs]

    def res(t: float) -> float:
        rhs = sum(w * weighted_bernstein(n, t, rho, g) for w, n, g in grids)
        return 1.0 - t - rhs

    theta = _bisect_decreasing(res)
    return EquilibriumResult(
        theta,
        "HeterogeneousCoSESI",
        abs(res(theta)),
        {"cost": c.name, "rho": rho, "groups": len(specs)},
    )


def solve_with_dgp(
    c: CostFunction, G: InferenceProcedure, n: int, dgp: SignalDGP
) -> EquilibriumResult:
    """General CoSESI for an arbitrary action-count law: roots of
    1 - theta = sum_y mu(y | theta) C_{n, y/n} located by scan plus bisection."""
    grid = cost_grid(G, n, c)

    def res(t: float) -> float:
        pmf = action_count_pmf(dgp, n, t)
        return 1.0 - t - float(pmf.probs @ grid)

    scan = find_sign_changes(res, 1e-4)
    roots = list(scan.node_roots)
    roots += [solve_bracketed(res, b, _SOLVE_TOL) for b in scan.brackets]
    roots.sort()
    residual = max((abs(res(r)) for r in roots), default=math.inf)
    return EquilibriumResult(
        tuple(roots), "GeneralCoSESI", residual, {"cost": c.name, "G": G.kind, "n": n, "dgp": repr(dgp)}
    )


def solve_general_cmb(
    c: CostFunction, G: InferenceProcedure, n: int, nu: float
) -> EquilibriumResult:
    """General CoSESI under the Conway-Maxwell-Binomial count law.

    Uniqueness is not guaranteed away from nu = 1, so all roots found on a
    1e-4 scan are reported.  nu = 1 reproduces the SESI; nu = -inf is the
    extreme positive-dependence case.
    """
    result = solve_with_dgp(c, G, n, CMB(nu))
    return EquilibriumResult(
        result.theta_star, "GeneralCMB", result.residual, {"cost": c.name, "G": G.kind, "n": n, "nu": nu}
    )


def sweep(
    axis: str,
    values: Sequence[float],
    c: CostFunction,
    G: InferenceProcedure,
    n: int = 2,
    rho: float = 0.0,
) -> SweepTable:
    """theta* as a function of rho or n, holding the other parameters fixed."""
    rows: list[tuple[float, float]] = []
    if axis == "rho":
        for v in values:
            rows.append((float(v), solve_cosesi(c, G, n, float(v)).theta))
    elif axis == "n":
        for v in values:
            rows.append((float(v), solve_cosesi(c, G, int(v), rho).theta))
    else:
        raise ValueError(f"axis must be 'rho' or 'n', got '{axis}'")
    rows.sort(key=lambda r: r[0])
    return SweepTable(axis, tuple(rows))
