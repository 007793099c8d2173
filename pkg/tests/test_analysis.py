"""Tests for error norms, series moments, bounds and tables."""

import json
import math
from fractions import Fraction as F

import pytest
from scipy import integrate

from pbeseries.analysis import (
    ErrorTable,
    InvalidSpecError,
    coag2d_bounds,
    coag_bound,
    error_table_l1,
    error_table_pointwise,
    frag_bound,
    l1_error,
    pointwise,
    series_moment,
    sup_l1_norm,
)
from pbeseries.exact import ConstantKernelSolution, SumKernelSolution
from pbeseries.polyexp import PolyExp1D
from pbeseries.series import iterate_accelerated


@pytest.fixture(scope="module")
def constant_series(constant_kernel_problem):
    return iterate_accelerated(constant_kernel_problem, 3)


@pytest.fixture(scope="module")
def sum_series(sum_kernel_problem):
    return iterate_accelerated(sum_kernel_problem, 4)


class TestL1Error:
    def test_vanishes_on_identical_integrands(self, constant_series):
        # at t = 0 the truncation and the exact solution are both e^{-x}
        err = l1_error(constant_series.truncated(0), ConstantKernelSolution(), 0.0)
        assert err <= 1e-14

    def test_third_order_cell(self, constant_series):
        err = l1_error(constant_series.truncated(3), ConstantKernelSolution(), 0.5)
        assert abs(err - 1.4202e-3) <= 1e-6

    def test_monotone_in_order(self, constant_series):
        sol = ConstantKernelSolution()
        errs = [l1_error(constant_series.truncated(n), sol, 1.0) for n in (1, 2, 3)]
        assert errs[0] > errs[1] > errs[2]

    def test_nonnegative(self, constant_series):
        assert l1_error(constant_series.truncated(2), ConstantKernelSolution(), 0.3) >= 0


class TestPointwise:
    def test_published_rows(self, sum_series):
        psi4 = sum_series.truncated(4)
        sol = SumKernelSolution()
        approx, ex, err = pointwise(psi4, sol, 5.0, 0.2)
        assert abs(ex - 0.0129) < 1e-4
        assert abs(err - 2.71288e-5) <= 2e-10
        _, _, err = pointwise(psi4, sol, 5.0, 1.0)
        assert abs(err - 0.0102) <= 2e-4

    def test_zero_at_initial_time(self, constant_series):
        _, _, err = pointwise(constant_series.truncated(3), ConstantKernelSolution(), 1.3, 0.0)
        assert err <= 1e-15


class TestSeriesMoment:
    def test_mass_constant(self, constant_series):
        assert series_moment(constant_series, 3, 1) == {0: F(1)}

    def test_count_taylor(self, constant_series, constant_kernel_problem):
        from pbeseries.series import iterate_classical

        expected = {0: F(1), 1: F(-1, 2), 2: F(1, 4), 3: F(-1, 8)}
        # accelerated partial sums agree with the Taylor polynomial of
        # 2/(2+t) through degree 3 (they carry a higher-order tail)
        mu0 = series_moment(constant_series, 3, 0)
        assert {j: c for j, c in mu0.items() if j <= 3} == expected
        # the classical partial sum IS that polynomial
        classical = iterate_classical(constant_kernel_problem, 3)
        assert series_moment(classical, 3, 0) == expected

    def test_2d_orders(self, bivariate_problem):
        s = iterate_accelerated(bivariate_problem, 2)
        assert series_moment(s, 2, (1, 0)) == {0: F(1, 25)}
        assert series_moment(s, 2, (0, 1)) == {0: F(1, 25)}


class TestBounds:
    def test_coag_reference_point(self):
        b = coag_bound(1.0, 1.0, 0.05, 3, 1.0)
        assert b.lipschitz == 2.0
        assert abs(b.contraction - 0.05**2 * math.exp(0.2) * 1.6) <= 1e-15
        assert abs(b.contraction - 4.886e-3) <= 2e-6
        assert b.contractive

    def test_vanishing_horizon(self):
        for t0 in (1e-3, 1e-5):
            b = coag_bound(1.0, 1.0, t0, 1, 1.0)
            assert b.contraction < 4 * t0**2
            assert b.bound < 5 * t0**2

    def test_zeroth_order_bound(self):
        b = coag_bound(1.0, 1.0, 0.05, 0, 2.0)
        assert abs(b.bound - 2.0 / (1.0 - b.contraction)) <= 1e-15

    def test_frag_quarter(self):
        b = frag_bound(1, 1.0, 0.5, 1, 1.0)
        assert b.contraction == 0.25

    def test_frag_boundary_not_contractive(self):
        b = frag_bound(1, 1.0, 1.0, 2, 1.0)
        assert not b.contractive
        assert math.isinf(b.bound)

    def test_frag_rational_case(self):
        b = frag_bound(2, 2.0, 0.5, 3, 1.0)
        assert abs(b.contraction - 1.0 / 16.0) <= 1e-15
        assert abs(b.bound - (1.0 / 16.0) ** 3 / (15.0 / 16.0)) <= 1e-18

    def test_monotone_in_t0_and_m(self):
        bounds = [coag_bound(1.0, 1.0, t0, 2, 1.0) for t0 in (0.05, 0.10, 0.15)]
        assert bounds[0].contraction < bounds[1].contraction < bounds[2].contraction
        assert bounds[0].bound < bounds[1].bound < bounds[2].bound
        by_m = [coag_bound(1.0, 1.0, 0.1, m, 1.0).bound for m in (1, 2, 3)]
        assert by_m[0] > by_m[1] > by_m[2]
        thetas = [frag_bound(1, 1.0, t0, 2, 1.0).contraction for t0 in (0.3, 0.5, 0.7)]
        assert thetas[0] < thetas[1] < thetas[2]

    def test_2d_variants(self):
        pair = coag2d_bounds(1.0, 1.0, 0.05, 3, 1.0)
        assert abs(pair["statement"].contraction - 2 * pair["derived"].contraction) <= 1e-18
        assert pair["derived"].contraction == coag_bound(1.0, 1.0, 0.05, 3, 1.0).contraction

    def test_input_validation(self):
        with pytest.raises(InvalidSpecError):
            coag_bound(-1.0, 1.0, 0.1, 1, 1.0)
        with pytest.raises(InvalidSpecError):
            frag_bound(0, 1.0, 0.1, 1, 1.0)


class TestSupNorm:
    def test_unit_exponential(self):
        assert sup_l1_norm(PolyExp1D.monomial(1, rate=1), 7.0) == 1.0

    def test_growing_in_time(self):
        f = PolyExp1D.monomial(1, tpow=1, rate=1)
        assert abs(sup_l1_norm(f, 2.0) - 2.0) <= 1e-14

    def test_first_component(self, constant_series):
        # v1 = (1/2) t e^{-x}(x-2): sup over [0,1] is half the absolute
        # integral of (x-2)e^{-x}, reached at s = 1
        got = sup_l1_norm(constant_series.components[1], 1.0)
        ref, _ = integrate.quad(lambda x: 0.5 * abs(x - 2.0) * math.exp(-x), 0, 60)
        assert abs(got - ref) <= 1e-9
        assert abs(got - 0.5 * (1.0 + 2.0 * math.exp(-2.0))) <= 1e-9

    def test_invalid(self):
        with pytest.raises(InvalidSpecError):
            sup_l1_norm(PolyExp1D.monomial(1, rate=1), -1.0)


class TestErrorTables:
    def test_l1_table_shape(self, constant_series):
        table = error_table_l1(
            constant_series, ConstantKernelSolution(), [2, 3], [0.5, 1.0], step=0.05
        )
        assert table.row_labels == (2, 3)
        assert table.col_labels == (0.5, 1.0)
        assert len(table.cells) == 2 and len(table.cells[0]) == 2
        csv = table.to_csv()
        assert csv.startswith("# norm = L1[0,50]")
        assert csv.count("\n") == 4

    def test_pointwise_table_columns(self, sum_series):
        table = error_table_pointwise(sum_series, SumKernelSolution(), 5.0, [0.2, 0.4])
        assert table.col_labels == ("exact", "approx", "abs_error")
        obj = table.to_json_obj()
        assert json.dumps(obj)  # serializable
        assert obj["row_labels"] == [0.2, 0.4]

    def test_empty_axes_rejected(self, constant_series):
        with pytest.raises(InvalidSpecError):
            error_table_l1(constant_series, ConstantKernelSolution(), [], [1.0])
        with pytest.raises(InvalidSpecError):
            error_table_pointwise(sum_series, SumKernelSolution(), 5.0, [])

    def test_nonfinite_cells_rejected(self):
        with pytest.raises(InvalidSpecError):
            ErrorTable("n", "t", (1,), (1.0,), ((math.inf,),), "test")

    def test_ragged_cells_rejected(self):
        with pytest.raises(InvalidSpecError):
            ErrorTable("n", "t", (1, 2), (1.0,), ((0.1,),), "test")