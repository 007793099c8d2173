"""Closed-form reference solutions used to validate the series engines.

Each solution evaluates the exact number density pointwise; the series
variants (product-kernel and bivariate cases) are summed until a term
falls below 1e-16 of the running partial sum, with a hard cap that turns
silent truncation into an explicit NonConvergenceError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from scipy import integrate

from .polyexp import as_fraction
from .problems import Coag1D, Coag2D, CoagKernel, Frag, Problem

REL_TOL = 1e-16
MAX_SERIES_TERMS = 200      # published cap for the Bessel evaluator
MAX_DENSITY_TERMS = 500     # series densities need a longer run at large x


class NonConvergenceError(Exception):
    """A series evaluation hit the term cap before reaching tolerance."""


def bessel_i1(z: float) -> float:
    """Modified Bessel function I_1 by its ascending power series.

    I_1(z) = sum_{k>=0} (z/2)^{2k+1} / (k! (k+1)!), summed until the next
    term is below 1e-16 of the partial sum.
    """
    if z == 0.0:
        return 0.0
    half = z / 2.0
    term = half
    total = term
    for k in range(1, MAX_SERIES_TERMS):
        term *= half * half / (k * (k + 1))
        total += term
        if abs(term) < REL_TOL * abs(total):
            return total
    raise NonConvergenceError(f"Bessel series did not converge at z={z}")


@dataclass(frozen=True)
class ConstantKernelSolution:
    """Coagulation with K = 1 and u0 = e^{-x}: u = 4/(2+t)^2 e^{-2x/(2+t)}."""

    def evaluate(self, x: float, t: float) -> float:
        return 4.0 / (2.0 + t) ** 2 * math.exp(-2.0 * x / (2.0 + t))

    def moment(self, j: int) -> Callable[[float], float]:
        if j == 0:
            return lambda t: 2.0 / (2.0 + t)
        if j == 1:
            return lambda t: 1.0
        if j == 2:
            return lambda t: 2.0 + t
        return _numeric_moment(self, j)


@dataclass(frozen=True)
class SumKernelSolution:
    """Coagulation with K = x + y and u0 = e^{-x}.

    u = (1-T) e^{-(1+T)x} I_1(2 x sqrt(T)) / (x sqrt(T)) with T = 1 - e^{-t}.
    """

    def evaluate(self, x: float, t: float) -> float:
        T = -math.expm1(-t)
        if T == 0.0:
            return math.exp(-x)
        if x == 0.0:
            # I_1(z)/z -> 1/2 as z -> 0, so the x factors cancel to 1.
            return (1.0 - T)
        rt = math.sqrt(T)
        return (1.0 - T) * math.exp(-(1.0 + T) * x) * bessel_i1(2.0 * x * rt) / (x * rt)

    def moment(self, j: int) -> Callable[[float], float]:
        def mom(t: float) -> float:
            T = -math.expm1(-t)
            if T == 0.0:
                return float(math.factorial(j))
            # Keep the Bessel argument inside the series' working range
            # (the 200-term cap fails past z ~ 257) and still cover the
            # e^{-(1-sqrt(T))^2 x} tail where possible.
            decay = max((1.0 - math.sqrt(T)) ** 2, 1e-3)
            xmax = min(250.0 / (2.0 * math.sqrt(T)), max(60.0, (40.0 + 10 * j) / decay))
            val, _ = integrate.quad(
                lambda xx: xx**j * self.evaluate(xx, t), 0.0, xmax,
                epsabs=1e-12, epsrel=1e-10, limit=200,
            )
            return val

        return mom


@dataclass(frozen=True)
class ProductKernelSolution:
    """Coagulation with K = x y and u0 = e^{-x}.

    u = sum_k t^k x^{3k} e^{-(t+1)x} / ((k+1)! (2k+1)!).  Gelation sits at
    t = 1/mu2(0) = 1/2 for this initial state: past it the density keeps
    solving the equation but total mass is no longer conserved.
    """

    def evaluate(self, x: float, t: float) -> float:
        if t == 0.0 or x == 0.0:
            return math.exp(-(t + 1.0) * x)
        # Summed in log space: for large t x^3 the terms overflow floats
        # long before the e^{-(t+1)x} envelope is applied.
        log_ratio = math.log(t * x**3)
        log_term = 0.0
        peak = 0.0
        logs = [0.0]
        for k in range(1, MAX_DENSITY_TERMS):
            log_term += log_ratio - math.log((k + 1) * (2 * k) * (2 * k + 1))
            logs.append(log_term)
            peak = max(peak, log_term)
            if log_term < peak + math.log(REL_TOL):
                total = sum(math.exp(l - peak) for l in logs)
                return math.exp(peak - (t + 1.0) * x) * total
        raise NonConvergenceError(f"product-kernel series stalled at x={x}, t={t}")

    def moment(self, j: int) -> Callable[[float], float]:
        # The tail decay rate 1 + t - 3 (t/4)^{1/3} vanishes at gelation,
        # so the count integral needs a long domain to settle.
        return _numeric_moment(self, j, xmax=600.0)


@dataclass(frozen=True)
class LinearBreakageSolution:
    """Binary breakage B = 2/y with S = x and u0 = e^{-x}.

    u = (1+t)^2 e^{-x(1+t)}; kept as an oracle for the fragmentation
    engine, whose components must match this density's Taylor blocks.
    """

    def evaluate(self, x: float, t: float) -> float:
        return (1.0 + t) ** 2 * math.exp(-x * (1.0 + t))

    def moment(self, j: int) -> Callable[[float], float]:
        if j == 0:
            return lambda t: 1.0 + t
        if j == 1:
            return lambda t: 1.0
        if j == 2:
            return lambda t: 2.0 / (1.0 + t)
        return _numeric_moment(self, j)


@dataclass(frozen=True)
class BivariateConstantSolution:
    """Bivariate constant-kernel coagulation with a gamma-product initial state.

    Parameterised by (N0, m1, m2, p1, p2); the density is the separable
    series of gamma modes whose k-th term carries (t/(t+2))^k.
    """

    N0: Fraction = Fraction(1)
    m1: Fraction = Fraction(1, 25)
    m2: Fraction = Fraction(1, 25)
    p1: int = 1
    p2: int = 1

    def initial_condition(self, x: float, y: float) -> float:
        return self.evaluate(x, y, 0.0)

    def evaluate(self, x: float, y: float, t: float) -> float:
        n0, m1, m2 = float(self.N0), float(self.m1), float(self.m2)
        q1, q2 = self.p1 + 1, self.p2 + 1
        xs, ys = x / m1, y / m2
        pref = (
            4.0 * n0 / (m1 * m2 * (t + 2.0) ** 2)
            * q1**q1 * q2**q2
            * math.exp(-q1 * xs - q2 * ys)
        )
        ratio = t / (t + 2.0)
        if xs == 0.0 or ys == 0.0:
            # only a zero exponent contributes on the axes (k = 0, p = 0)
            k0 = (
                _power(xs, q1 - 1) * _power(ys, q2 - 1)
                / (math.gamma(q1) * math.gamma(q2))
            )
            return pref * k0
        # Terms are summed in log space: the raw powers overflow floats
        # long before the gamma denominators bring them back down.
        log_step = math.log(ratio * q1**q1 * q2**q2) if ratio > 0.0 else None
        lx, ly = math.log(xs), math.log(ys)
        total = 0.0
        prev = math.inf
        for k in range(MAX_DENSITY_TERMS):
            log_term = (
                (0.0 if k == 0 else k * log_step)
                + ((k + 1) * q1 - 1) * lx
                + ((k + 1) * q2 - 1) * ly
                - math.lgamma(q1 * (k + 1))
                - math.lgamma(q2 * (k + 1))
            )
            contrib = math.exp(log_term)
            total += contrib
            if log_step is None:
                return pref * total
            if k > 0 and contrib <= prev and contrib < REL_TOL * total:
                return pref * total
            prev = contrib
        raise NonConvergenceError(f"bivariate series stalled at ({x}, {y}, {t})")

    def moment(self, jx: int, jy: int) -> Callable[[float], float]:
        n0 = float(self.N0)
        if (jx, jy) == (0, 0):
            return lambda t: 2.0 * n0 / (2.0 + n0 * t)
        if (jx, jy) == (1, 0):
            return lambda t: n0 * float(self.m1)
        if (jx, jy) == (0, 1):
            return lambda t: n0 * float(self.m2)
        return self._numeric_moment_2d(jx, jy)

    def _numeric_moment_2d(self, jx: int, jy: int) -> Callable[[float], float]:
        # Integrand decays like exp(-2x/m1), so a finite box is exact to
        # far below quadrature tolerance.
        xmax = float(self.m1) * 40.0
        ymax = float(self.m2) * 40.0

        def mom(t: float) -> float:
            val, _ = integrate.dblquad(
                lambda yy, xx: xx**jx * yy**jy * self.evaluate(xx, yy, t),
                0.0, xmax, 0.0, ymax, epsabs=1e-10, epsrel=1e-8,
            )
            return val

        return mom


def _power(base: float, expo: int) -> float:
    if base == 0.0:
        return 1.0 if expo == 0 else 0.0
    return base**expo


ExactSolution1D = Union[
    ConstantKernelSolution,
    SumKernelSolution,
    ProductKernelSolution,
    LinearBreakageSolution,
]
ExactSolution = Union[ExactSolution1D, BivariateConstantSolution]


def _numeric_moment(sol, j: int, xmax: float = 60.0) -> Callable[[float], float]:
    def mom(t: float) -> float:
        val, _ = integrate.quad(
            lambda xx: xx**j * sol.evaluate(xx, t), 0.0, xmax,
            epsabs=1e-12, epsrel=1e-10, limit=200,
        )
        return val

    return mom


def matching_exact_solution(problem: Problem) -> Optional[ExactSolution]:
    """Map a problem spec to its known closed-form solution, if any."""
    if isinstance(problem, Coag1D):
        if problem.u0 != _unit_exponential():
            return None
        return {
            CoagKernel.CONSTANT: ConstantKernelSolution(),
            CoagKernel.SUM: SumKernelSolution(),
            CoagKernel.PRODUCT: ProductKernelSolution(),
        }[problem.kernel]
    if isinstance(problem, Frag):
        f = problem.frag
        if (
            problem.u0 == _unit_exponential()
            and (f.c, f.r, f.s, f.k) == (2, 1, 1, 1)
        ):
            return LinearBreakageSolution()
        return None
    if isinstance(problem, Coag2D):
        terms = list(problem.u0.terms())
        if len(terms) != 1:
            return None
        (a, b), (i, k, j), c = terms[0]
        if (i, k, j) != (1, 1, 0):
            return None
        m1 = 2 / as_fraction(a)
        m2 = 2 / as_fraction(b)
        n0 = c * m1**2 * m2**2 / 16
        return BivariateConstantSolution(N0=n0, m1=m1, m2=m2, p1=1, p2=1)
    return None


def _unit_exponential():
    from .polyexp import PolyExp1D

    return PolyExp1D.monomial(1, rate=1)
