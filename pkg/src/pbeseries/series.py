"""Iteration engines producing the series components v_0, v_1, ..., v_n.

Two schemes are implemented over the same right-hand-side operators:

  * accelerated: v_0 = u_0 and

        v_{k+1} = T[ rhs(Psi_k) - rhs(Psi_{k-1}) ],   rhs(Psi_{-1}) := 0,

    where T integrates from 0 in time and Psi_k = v_0 + ... + v_k.  The
    increments telescope, so the partial sums satisfy the Picard identity
    Psi_{k+1} = u_0 + T[rhs(Psi_k)] exactly; that identity is the main
    structural test of the engine.

  * classical: the familiar decomposition-series recursion
    v_{k+1} = T[A_k] with A_k the bilinear expansion polynomial
    sum_{i+j=k} Q(v_i, v_j) plus the linear breakage applied to v_k.

For purely linear models (fragmentation) the two recursions coincide
component by component.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import reduce

from .polyexp import PolyExp1D, PolyExp2D, PolyExpError
from .problems import (
    Coag1D,
    Coag2D,
    CoagFrag,
    Frag,
    Problem,
    coag2d_bilinear,
    coag_bilinear,
    frag_rhs,
    rhs,
)

DEFAULT_TERM_BUDGET = 200_000


class TermBudgetError(PolyExpError):
    """The iteration grew past the configured monomial budget."""


class Method(Enum):
    ACCELERATED = "ahpetm"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class SeriesSolution:
    """Ordered components of a truncated series solution."""

    problem: Problem
    method: Method
    components: tuple

    @property
    def n(self) -> int:
        """Truncation index: components run v_0 ... v_n."""
        return len(self.components) - 1

    def truncated(self, k: int):
        """Partial sum Psi_k = v_0 + ... + v_k."""
        if not 0 <= k <= self.n:
            raise IndexError(f"truncation order {k} outside 0..{self.n}")
        return reduce(lambda a, b: a + b, self.components[: k + 1])


def _zero_like(problem: Problem):
    return PolyExp2D.zero() if isinstance(problem, Coag2D) else PolyExp1D.zero()


def _check_budget(value, budget: int) -> None:
    n = value.term_count()
    if n > budget:
        raise TermBudgetError(
            f"intermediate expression holds {n} monomials, over the budget of "
            f"{budget}; lower the number of terms or raise the budget"
        )


def iterate_accelerated(
    problem: Problem, n: int, term_budget: int = DEFAULT_TERM_BUDGET
) -> SeriesSolution:
    """Run the accelerated recursion up to component v_n."""
    if n < 0:
        raise ValueError("number of components must be nonnegative")
    components = [problem.u0]
    psi = problem.u0
    prev_rhs = _zero_like(problem)
    for _ in range(n):
        cur_rhs = rhs(problem, psi)
        _check_budget(cur_rhs, term_budget)
        v = (cur_rhs - prev_rhs).time_antiderivative()
        components.append(v)
        psi = psi + v
        _check_budget(psi, term_budget)
        prev_rhs = cur_rhs
    return SeriesSolution(problem, Method.ACCELERATED, tuple(components))


def _bilinear_block(problem: Problem, components, k: int):
    """A_k = sum_{i+j=k} Q(v_i, v_j) (+ linear breakage of v_k)."""
    acc = _zero_like(problem)
    if isinstance(problem, (Coag1D, CoagFrag)):
        for i in range(k + 1):
            acc = acc + coag_bilinear(problem.kernel, components[i], components[k - i])
    elif isinstance(problem, Coag2D):
        for i in range(k + 1):
            acc = acc + coag2d_bilinear(components[i], components[k - i])
    if isinstance(problem, (Frag, CoagFrag)):
        acc = acc + frag_rhs(problem.frag, components[k])
    return acc


def iterate_classical(
    problem: Problem, n: int, term_budget: int = DEFAULT_TERM_BUDGET
) -> SeriesSolution:
    """Run the classical decomposition recursion up to component v_n."""
    if n < 0:
        raise ValueError("number of components must be nonnegative")
    components = [problem.u0]
    for k in range(n):
        a_k = _bilinear_block(problem, components, k)
        _check_budget(a_k, term_budget)
        components.append(a_k.time_antiderivative())
    return SeriesSolution(problem, Method.CLASSICAL, tuple(components))


def iterate(
    problem: Problem,
    method: Method,
    n: int,
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> SeriesSolution:
    if method is Method.ACCELERATED:
        return iterate_accelerated(problem, n, term_budget)
    return iterate_classical(problem, n, term_budget)

