"""Error functionals, the weak-distance bound, and observed orders."""

import math

import numpy as np
import pytest

from fpme.metrics import (
    ConvergenceTable,
    ErrorReport,
    d0_upper_bound,
    error_Ev,
    error_Eu,
    error_Eu_weak,
    observed_order,
)


class TestErrorFunctionals:
    def test_zero_when_fields_agree(self, rng):
        ref = rng.uniform(0.1, 1.0, 40)
        assert error_Ev(ref, ref) == 0.0
        assert error_Eu(ref, ref) == 0.0
        assert error_Eu_weak(ref, ref, 0.1) == 0.0

    def test_constant_shift(self, rng):
        ref = rng.uniform(0.1, 1.0, 40)
        eps = 1e-3
        shifted = ref + eps
        assert error_Ev(shifted, ref) == pytest.approx(eps / np.max(np.abs(ref)))

    def test_weak_error_dominated_by_l1(self, rng):
        for _ in range(20):
            ref = rng.uniform(0.0, 1.0, 30)
            approx = ref + rng.normal(0.0, 0.1, 30)
            h = 0.05
            e_u = error_Eu(approx, ref)
            e_w = error_Eu_weak(approx, ref, h)
            mass = h * np.sum(ref)
            assert e_u >= e_w / mass - 1e-12

    def test_zero_reference_rejected(self):
        with pytest.raises(ValueError):
            error_Ev(np.ones(5), np.zeros(5))
        with pytest.raises(ValueError):
            error_Eu(np.ones(5), np.zeros(5))


class TestD0Bound:
    def test_identical_densities(self, rng):
        f = rng.uniform(0.0, 1.0, 50)
        assert d0_upper_bound(f, f, 0.1) == 0.0

    def test_shifted_indicator_pair(self):
        # f1 = 1_[0,1), f2 = 1_[a,1+a): the CDF bound is a, the density
        # bound 2a; the minimum is a (up to the grid resolution)
        h = 1.0 / 512
        xs = np.arange(-1.0, 3.0, h)
        a = 0.25
        f1 = ((xs >= 0.0) & (xs < 1.0)).astype(float)
        f2 = ((xs >= a) & (xs < 1.0 + a)).astype(float)
        bound = d0_upper_bound(f1, f2, h)
        assert bound == pytest.approx(a, abs=2 * h)
        assert bound < h * np.sum(np.abs(f1 - f2)) / 2 + 2 * h  # below the L1 bound

    def test_symmetry_and_triangle(self, rng):
        h = 0.05
        for _ in range(10):
            f = [rng.uniform(0.0, 1.0, 60) for _ in range(3)]
            f = [g / (h * np.sum(g)) for g in f]  # equal unit masses
            d01 = d0_upper_bound(f[0], f[1], h)
            d10 = d0_upper_bound(f[1], f[0], h)
            assert d01 == pytest.approx(d10, rel=1e-14)
            d02 = d0_upper_bound(f[0], f[2], h)
            d12 = d0_upper_bound(f[1], f[2], h)
            assert d02 <= d01 + d12 + 1e-12

    def test_mass_mismatch_rejected(self):
        f1 = np.ones(10)
        f2 = 1.001 * np.ones(10)
        with pytest.raises(ValueError):
            d0_upper_bound(f1, f2, 0.1)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            d0_upper_bound(np.ones(5), np.ones(6), 0.1)


class TestObservedOrder:
    def test_halving(self):
        assert observed_order([1.0, 0.5, 0.25]) == pytest.approx([1.0, 1.0])

    def test_quartering(self):
        assert observed_order([1.0, 0.25]) == pytest.approx([2.0])

    def test_general_ratio(self):
        orders = observed_order([1.0, 0.1], hs=[1.0, 0.1])
        assert orders == pytest.approx([1.0])

    def test_zero_error_gives_inf_sentinel(self):
        assert observed_order([1.0, 0.0]) == [math.inf]

    def test_needs_two_rungs(self):
        with pytest.raises(ValueError):
            observed_order([1.0])


class TestConvergenceTable:
    def _row(self, h, ev):
        return ErrorReport(h=h, tau=h * h, E_v=ev, E_u=2 * ev, E_u_weak=ev / 10,
                           d0_bound=ev / 2, runtime_seconds=0.01)

    def test_ladder_must_decrease(self):
        t = ConvergenceTable()
        t.append(self._row(0.25, 1e-2))
        with pytest.raises(ValueError):
            t.append(self._row(0.25, 1e-2))

    def test_orders_and_csv(self):
        t = ConvergenceTable()
        t.append(self._row(0.25, 4e-2))
        t.append(self._row(0.125, 2e-2))
        t.append(self._row(0.0625, 1e-2))
        assert t.orders("E_v") == pytest.approx([1.0, 1.0])
        csv = t.to_csv()
        lines = csv.splitlines()
        assert lines[0] == "h,tau,E_v,E_u,E_u_weak,d0_bound,order_Ev,order_Eu,runtime_s"
        assert len(lines) == 4
        assert lines[1].split(",")[6] == "nan"  # no order at the first rung

    def test_negative_error_rejected(self):
        with pytest.raises(ValueError):
            ErrorReport(h=0.1, tau=0.01, E_v=-1.0, E_u=0.0, E_u_weak=0.0, d0_bound=0.0)
