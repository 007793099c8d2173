"""Population balance models and their right-hand sides on the symbolic class.

Four model variants are supported, matching the governing equations the
series engines solve:

  * 1-D coagulation      du/dt = 1/2 int_0^x K(x-y,y) u(x-y) u(y) dy
                                  - int_0^inf K(x,y) u(x) u(y) dy
  * pure fragmentation   du/dt = int_x^inf B(x,y) S(y) u(y) dy - S(x) u(x)
  * coupled model        sum of the two right-hand sides above
  * 2-D coagulation      constant-kernel bivariate analogue

Coagulation kernels form a closed enum (constant, sum, product): each
carries a closed-form reduction of its gain and loss integrals to the
convolution/moment operators, which keeps the symbolic path total.
Breakage is the two-parameter power family B(x,y) = c x^{r-1} / y^r with
selection S(x) = s x^k; the family is mass-conserving exactly when
c = r + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from .polyexp import (
    OutOfClassError,
    PolyExp1D,
    PolyExp2D,
    RationalLike,
    as_fraction,
)


class CoagKernel(Enum):
    CONSTANT = "constant"  # K(x, y) = 1
    SUM = "sum"            # K(x, y) = x + y
    PRODUCT = "product"    # K(x, y) = x y


@dataclass(frozen=True)
class FragSpec:
    """Breakage family B(x,y) = c x^{r-1}/y^r with selection S(x) = s x^k."""

    c: Fraction
    r: int
    s: Fraction
    k: int

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        object.__setattr__(self, "s", as_fraction(self.s))
        if self.c <= 0 or self.s <= 0:
            raise ValueError("breakage constants c and s must be positive")
        if not isinstance(self.r, int) or self.r < 1:
            raise ValueError("breakage exponent r must be a positive integer")
        if not isinstance(self.k, int) or self.k < 0:
            raise ValueError("selection exponent k must be a nonnegative integer")

    @property
    def mass_conserving(self) -> bool:
        """True when int_0^y x B(x, y) dx = y exactly, i.e. c = r + 1."""
        return self.c == self.r + 1


def _check_u0_1d(u0: PolyExp1D) -> None:
    if u0.is_zero():
        raise ValueError("initial condition must be nonzero")
    if any(a == 0 for a in u0.rates()):
        raise ValueError("initial condition needs strictly positive rates")
    if u0.t_degree() > 0:
        raise ValueError("initial condition must not depend on t")


@dataclass(frozen=True)
class Coag1D:
    kernel: CoagKernel
    u0: PolyExp1D

    def __post_init__(self):
        _check_u0_1d(self.u0)


@dataclass(frozen=True)
class Frag:
    frag: FragSpec
    u0: PolyExp1D

    def __post_init__(self):
        _check_u0_1d(self.u0)


@dataclass(frozen=True)
class CoagFrag:
    kernel: CoagKernel
    frag: FragSpec
    u0: PolyExp1D

    def __post_init__(self):
        _check_u0_1d(self.u0)


@dataclass(frozen=True)
class Coag2D:
    """Bivariate coagulation with the constant kernel."""

    u0: PolyExp2D

    def __post_init__(self):
        if self.u0.is_zero():
            raise ValueError("initial condition must be nonzero")
        if any(a == 0 or b == 0 for a, b in self.u0.rates()):
            raise ValueError("initial condition needs strictly positive rates")
        if self.u0.t_degree() > 0:
            raise ValueError("initial condition must not depend on t")


Problem = Union[Coag1D, Frag, CoagFrag, Coag2D]


def coag_bilinear(kernel: CoagKernel, u: PolyExp1D, w: PolyExp1D) -> PolyExp1D:
    """Bilinear coagulation form Q(u, w) = 1/2 gain(u, w) - loss(u, w).

    The kernel substitution K(x-y, y) reduces each gain to a convolution
    and each loss to the product of u with a moment of w (times x where
    the kernel demands it).  The model right-hand side is Q(u, u).
    """
    if kernel is CoagKernel.CONSTANT:
        gain = u.convolve(w)
        loss = u.mul_tpoly(w.moment(0))
    elif kernel is CoagKernel.SUM:
        gain = u.convolve(w).mul_x()
        loss = u.mul_x().mul_tpoly(w.moment(0)) + u.mul_tpoly(w.moment(1))
    elif kernel is CoagKernel.PRODUCT:
        gain = u.mul_x().convolve(w.mul_x())
        loss = u.mul_x().mul_tpoly(w.moment(1))
    else:  # pragma: no cover - closed enum
        raise ValueError(f"unknown kernel {kernel!r}")
    return gain.scale(Fraction(1, 2)) - loss


def frag_rhs(spec: FragSpec, u: PolyExp1D) -> PolyExp1D:
    """Linear breakage operator: birth tail integral minus selection death.

    birth = c s x^{r-1} int_x^inf y^{k-r} u(y, t) dy, which stays in class
    only if every monomial power m of u satisfies m + k - r >= 0.
    """
    try:
        birth = u.tail_integral(spec.k - spec.r).mul_x(spec.r - 1).scale(spec.c * spec.s)
    except OutOfClassError as exc:
        raise OutOfClassError(
            f"breakage birth integral left the function class: {exc}"
        ) from exc
    death = u.mul_x(spec.k).scale(spec.s)
    return birth - death


def coag2d_bilinear(u: PolyExp2D, w: PolyExp2D) -> PolyExp2D:
    """Constant-kernel bivariate form: 1/2 convolution minus count loss."""
    return u.convolve(w).scale(Fraction(1, 2)) - u.mul_tpoly(w.moment(0, 0))


def rhs(problem: Problem, u):
    """Model right-hand side applied to a symbolic state."""
    if isinstance(problem, Coag1D):
        return coag_bilinear(problem.kernel, u, u)
    if isinstance(problem, Frag):
        return frag_rhs(problem.frag, u)
    if isinstance(problem, CoagFrag):
        return coag_bilinear(problem.kernel, u, u) + frag_rhs(problem.frag, u)
    if isinstance(problem, Coag2D):
        return coag2d_bilinear(u, u)
    raise TypeError(f"unsupported problem {problem!r}")


def exponential_ic(rate: RationalLike = 1) -> PolyExp1D:
    """e^{-a x}, the workhorse initial condition."""
    return PolyExp1D.monomial(1, rate=rate)


def mono_exponential_ic(
    coeff: RationalLike, xpow: int, rate: RationalLike
) -> PolyExp1D:
    """c x^p e^{-a x}."""
    return PolyExp1D.monomial(coeff, xpow=xpow, rate=rate)
