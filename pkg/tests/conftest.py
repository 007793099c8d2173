"""Shared fixtures: benchmark problems, sympy bridges, random generators."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy as sp

from pbeseries.polyexp import PolyExp1D, PolyExp2D
from pbeseries.problems import (
    Coag1D,
    Coag2D,
    CoagFrag,
    CoagKernel,
    Frag,
    FragSpec,
    exponential_ic,
    mono_exponential_ic,
)

X, Y, T = sp.symbols("x y t")


def to_sympy(f):
    """Exact sympy form of a PolyExp value (rational coefficients)."""
    expr = sp.Integer(0)
    if isinstance(f, PolyExp1D):
        for a, (i, j), c in f.terms():
            expr += (
                sp.Rational(c.numerator, c.denominator)
                * X**i * T**j
                * sp.exp(-sp.Rational(a.numerator, a.denominator) * X)
            )
        return expr
    for (a, b), (i, k, j), c in f.terms():
        expr += (
            sp.Rational(c.numerator, c.denominator)
            * X**i * Y**k * T**j
            * sp.exp(-sp.Rational(a.numerator, a.denominator) * X
                     - sp.Rational(b.numerator, b.denominator) * Y)
        )
    return expr


def assert_sympy_equal(f, expr) -> None:
    diff = sp.expand(to_sympy(f) - sp.expand(expr))
    assert diff == 0, f"symbolic mismatch, difference {sp.simplify(diff)}"


def random_polyexp(
    rng: random.Random,
    max_terms: int = 5,
    max_xpow: int = 6,
    max_tpow: int = 3,
    rates=(1, 2, Fraction(1, 2)),
    single_rate: bool = False,
) -> PolyExp1D:
    rate_pool = [rng.choice(rates)] if single_rate else list(rates)
    terms: dict = {}
    for _ in range(rng.randint(1, max_terms)):
        a = rng.choice(rate_pool)
        poly = terms.setdefault(a, {})
        key = (rng.randint(0, max_xpow), rng.randint(0, max_tpow))
        poly[key] = poly.get(key, 0) + Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    f = PolyExp1D(terms)
    return f if not f.is_zero() else PolyExp1D.monomial(1, rate=rate_pool[0])


# -- the six benchmark problems --------------------------------------------


@pytest.fixture(scope="session")
def constant_kernel_problem():
    return Coag1D(CoagKernel.CONSTANT, exponential_ic(1))


@pytest.fixture(scope="session")
def sum_kernel_problem():
    return Coag1D(CoagKernel.SUM, exponential_ic(1))


@pytest.fixture(scope="session")
def product_kernel_problem():
    return Coag1D(CoagKernel.PRODUCT, exponential_ic(1))


@pytest.fixture(scope="session")
def binary_breakage_problem():
    """Binary breakage with S(x) = x on e^{-x}: the linear oracle case."""
    return Frag(FragSpec(Fraction(2), 1, Fraction(1), 1), exponential_ic(1))


@pytest.fixture(scope="session")
def coupled_halfx_problem():
    """Constant coagulation plus binary breakage, S = x/2, u0 = 4x e^{-2x}."""
    return CoagFrag(
        CoagKernel.CONSTANT,
        FragSpec(Fraction(2), 1, Fraction(1, 2), 1),
        mono_exponential_ic(4, 1, 2),
    )


@pytest.fixture(scope="session")
def coupled_twox_problem():
    """Constant coagulation plus binary breakage, S = 2x, u0 = 32x e^{-4x}."""
    return CoagFrag(
        CoagKernel.CONSTANT,
        FragSpec(Fraction(2), 1, Fraction(2), 1),
        mono_exponential_ic(32, 1, 4),
    )


@pytest.fixture(scope="session")
def bivariate_problem():
    """Constant-kernel 2-D coagulation, u0 = 6.25e6 x y e^{-50x-50y}."""
    return Coag2D(PolyExp2D.monomial(6250000, xpow=1, ypow=1, xrate=50, yrate=50))
