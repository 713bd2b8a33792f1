"""Scalar numerics shared by every solver in the package.

Normal CDF/quantile, Owen's T function, adaptive quadrature, and bracketed
root finding.  Everything here is pure and dependency-light: the normal CDF
goes through ``math.erfc`` (double-precision complementary error function),
the quantile through safeguarded Newton on that CDF, and the quadrature is
adaptive Simpson.  No scipy is used in this module so the accuracy claims
are testable against independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "Bracket",
    "Tolerance",
    "SignChangeScan",
    "NumericsError",
    "DomainError",
    "NoSignChange",
    "MaxIterExceeded",
    "norm_cdf",
    "norm_pdf",
    "norm_quantile",
    "owen_t",
    "integrate",
    "solve_bracketed",
    "find_sign_changes",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class NumericsError(Exception):
    """Base error for this module."""


class DomainError(NumericsError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class NoSignChange(NumericsError):
    """A bracketed solve was requested without a sign change."""


class MaxIterExceeded(NumericsError):
    """Iteration/refinement budget exhausted before reaching tolerance."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute tolerance and iteration budget for iterative routines."""

    abs_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] with recorded function values of opposite sign."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not (self.f_lo < 0.0 < self.f_hi or self.f_hi < 0.0 < self.f_lo):
            raise NoSignChange(
                f"f({self.lo})={self.f_lo} and f({self.hi})={self.f_hi} "
                "do not have strictly opposite signs"
            )


@dataclass(frozen=True)
class SignChangeScan:
    """Result of a uniform-grid sign scan on [0, 1].

    ``brackets`` hold strict sign changes between adjacent grid nodes;
    ``node_roots`` are grid nodes where the function is exactly zero
    (reported separately, not as brackets).
    """

    brackets: tuple[Bracket, ...]
    node_roots: tuple[float, ...]


def norm_cdf(x: float) -> float:
    """Standard normal CDF, absolute error below 1e-15 via erfc."""
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_pdf(x: float) -> float:
    """Standard normal density."""
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_quantile(p: float) -> float:
    """Inverse of :func:`norm_cdf` on (0, 1).

    Starts from the Abramowitz-Stegun 26.2.22 rational guess (|error| < 4.5e-4)
    and polishes with safeguarded Newton until |cdf(x) - p| <= 1e-14 or the
    step stalls.  Raises :class:`DomainError` outside (0, 1).
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"norm_quantile requires p in (0,1), got {p}")
    if p == 0.5:
        return 0.0
    q = min(p, 1.0 - p)
    t = math.sqrt(-2.0 * math.log(q))
    x = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t)
    if p < 0.5:
        x = -x
    lo, hi = -40.0, 40.0
    for _ in range(60):
        err = norm_cdf(x) - p
        if abs(err) <= 1e-15:
            break
        if err > 0.0:
            hi = min(hi, x)
        else:
            lo = max(lo, x)
        pdf = norm_pdf(x)
        if pdf <= 0.0:
            break  # deep tail: cdf already flat at double precision
        step = err / pdf
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            break
        x = x_new
    return x


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance | float = Tolerance(),
) -> float:
    """Adaptive-Simpson integral of ``f`` over [a, b] to absolute tolerance.

    Raises :class:`MaxIterExceeded` when the refinement depth budget runs out
    before the local error estimate falls under the tolerance.
    """
    if isinstance(tol, float):
        tol = Tolerance(abs_tol=tol)
    if a > b:
        raise DomainError(f"integrate requires a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    max_depth = min(tol.max_iter, 60)

    def simpson(x0: float, x2: float, f0: float, f1: float, f2: float) -> float:
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        xl, xr = 0.5 * (x0 + xm), 0.5 * (xm + x2)
        fl, fr = f(xl), f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise MaxIterExceeded(
                f"adaptive quadrature did not reach tol={eps} within depth {max_depth}"
            )
        half = 0.5 * eps
        return recurse(x0, xm, f0, fl, f1, left, half, depth + 1) + recurse(
            xm, x2, f1, fr, f2, right, half, depth + 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol.abs_tol, 0)


def owen_t(h: float, a: float) -> float:
    """Owen's T function T(h, a) = (1/2pi) * int_0^a exp(-h^2(1+x^2)/2)/(1+x^2) dx.

    Evaluated by adaptive quadrature of the defining integral; absolute error
    below 1e-10.  Uses the symmetries T(h, -a) = -T(h, a) and T(-h, a) = T(h, a).
    """
    if a == 0.0:
        return 0.0
    if a < 0.0:
        return -owen_t(h, -a)
    h = abs(h)
    hh = 0.5 * h * h

    def integrand(x: float) -> float:
        one_plus = 1.0 + x * x
        return math.exp(-hh * one_plus) / one_plus

    return integrate(integrand, 0.0, a, Tolerance(abs_tol=1e-13)) / (2.0 * math.pi)


def solve_bracketed(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: Tolerance = Tolerance(),
) -> float:
    """Root of ``f`` inside ``bracket`` by bisection with secant acceleration.

    Stops when |f(x)| <= abs_tol or the interval width falls below abs_tol.
    """
    lo, hi = bracket.lo, bracket.hi
    f_lo, f_hi = bracket.f_lo, bracket.f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NoSignChange(f"no sign change on [{lo}, {hi}]")
    for _ in range(tol.max_iter):
        width = hi - lo
        if width <= tol.abs_tol:
            return lo if abs(f_lo) < abs(f_hi) else hi
        # secant candidate, kept strictly interior; fall back to the midpoint
        x = hi - f_hi * width / (f_hi - f_lo)
        margin = 0.01 * width
        if not lo + margin < x < hi - margin:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= tol.abs_tol:
            return x
        if (fx < 0.0) == (f_lo < 0.0):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
    raise MaxIterExceeded(f"no root to tolerance {tol.abs_tol} in {tol.max_iter} iterations")


def find_sign_changes(
    f: Callable[[float], float],
    grid_step: float = 1e-4,
) -> SignChangeScan:
    """Scan [0, 1] on a uniform grid for sign changes of ``f``.

    Nodes where f is exactly zero count as roots directly and never as part
    of a bracket.  ``grid_step`` must lie in (0, 0.01].
    """
    if not 0.0 < grid_step <= 0.01:
        raise DomainError(f"grid_step must be in (0, 0.01], got {grid_step}")
    n = max(2, round(1.0 / grid_step))
    xs = [i / n for i in range(n + 1)]
    fs = [f(x) for x in xs]
    node_roots = [x for x, v in zip(xs, fs) if v == 0.0]
    brackets: list[Bracket] = []
    prev_x: float | None = None
    prev_f = 0.0
    for x, v in zip(xs, fs):
        if v == 0.0:
            prev_x = None  # exact node root separates intervals
            continue
        if prev_x is not None and (v < 0.0) != (prev_f < 0.0):
            brackets.append(Bracket(prev_x, x, prev_f, v))
        prev_x, prev_f = x, v
    return SignChangeScan(tuple(brackets), tuple(node_roots))
