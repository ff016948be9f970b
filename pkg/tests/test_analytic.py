"""Reference solutions and constants, cross-checked against an independent
Lanczos Gamma oracle and closed incomplete-beta forms."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import betainc

from fpme.analytic import (
    ExplicitSolutionParams,
    bump_sum_datum,
    dirac_datum,
    experiment3_u0,
    explicit_profile_datum,
    explicit_u,
    explicit_v,
    k_constant,
    mass_explicit,
    sample_v0,
    smoothing_exponents,
)

# Lanczos approximation (g = 7, 9 coefficients): an independent Gamma oracle,
# accurate to ~1e-13 relative on the positive axis.
_LANCZOS_G = 7.0
_LANCZOS_C = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]


def lanczos_gamma(x: float) -> float:
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1.0 - x))
    x -= 1.0
    a = _LANCZOS_C[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, 9):
        a += _LANCZOS_C[i] / (x + i)
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def oracle_k(s: float) -> float:
    return (
        1.0
        / (2.0 ** (2.0 * s) * (1.0 + 2.0 * s))
        * lanczos_gamma(0.5)
        / (lanczos_gamma(1.0 + s) * lanczos_gamma(0.5 + s))
    )


def oracle_mass(R: float, s: float) -> float:
    return (
        oracle_k(s)
        * R ** (1.0 + 2.0 * s)
        * lanczos_gamma(0.5)
        * lanczos_gamma(1.0 + s)
        / lanczos_gamma(1.5 + s)
    )


class TestConstants:
    def test_k_half(self):
        assert k_constant(0.5) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
    def test_k_vs_independent_gamma_oracle(self, s):
        assert k_constant(s) == pytest.approx(oracle_k(s), rel=1e-12)
        assert k_constant(s) > 0.0

    def test_mass_half(self):
        assert mass_explicit(1.0, 0.5) == pytest.approx(math.pi / 4.0, rel=1e-12)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_mass_vs_oracle_and_quadrature(self, s):
        assert mass_explicit(1.0, s) == pytest.approx(oracle_mass(1.0, s), rel=1e-12)
        p = ExplicitSolutionParams(s=s, t0=1.0, R=1.0)
        val, _ = quad(lambda y: explicit_u(y, 0.0, p), -1.0, 1.0, epsabs=1e-12,
                      epsrel=0.0, limit=300)
        assert val == pytest.approx(mass_explicit(1.0, s), abs=1e-8)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_mass_scaling_in_radius(self, s):
        ratio = mass_explicit(2.0, s) / mass_explicit(1.0, s)
        assert ratio == pytest.approx(2.0 ** (1.0 + 2.0 * s), rel=1e-13)


class TestExplicitSolution:
    def test_point_value(self):
        p = ExplicitSolutionParams(s=0.5, t0=1.0, R=0.5)
        assert explicit_u(0.0, 0.0, p) == pytest.approx(0.25, rel=1e-13)

    def test_vanishes_on_free_boundary(self):
        p = ExplicitSolutionParams(s=0.5, t0=1.0, R=0.5)
        for t in (0.0, 1.0, 3.0):
            r = p.radius(t)
            assert explicit_u(r, t, p) == 0.0
            assert explicit_u(-r - 0.1, t, p) == 0.0

    def test_self_similar_form(self):
        p = ExplicitSolutionParams(s=0.25, t0=0.5, R=0.8)
        k = k_constant(0.25)
        for x, t in ((0.1, 0.3), (-0.4, 2.0)):
            lam = (t + p.t0) ** (-1.0 / 1.5)
            profile = k * max(p.R**2 - (x * lam) ** 2, 0.0) ** 0.25
            assert explicit_u(x, t, p) == pytest.approx(lam * profile, rel=1e-14)

    def test_mass_constant_in_time(self):
        p = ExplicitSolutionParams(s=0.75, t0=1.0, R=0.5)
        M = mass_explicit(0.5, 0.75)
        for t in (0.0, 1.0):
            r = p.radius(t)
            val, _ = quad(lambda y: explicit_u(y, t, p), -r, r, epsabs=1e-12,
                          epsrel=0.0, limit=300)
            assert val == pytest.approx(M, abs=1e-9)

    def test_dirac_time_rejected(self):
        p = ExplicitSolutionParams(s=0.5, t0=0.0, R=1.0)
        with pytest.raises(ValueError):
            explicit_u(0.0, 0.0, p)
        with pytest.raises(ValueError):
            explicit_v(0.0, 0.0, p)


class TestExplicitV:
    def test_limits_and_centre(self):
        p = ExplicitSolutionParams(s=0.5, t0=1.0, R=0.5)
        M = mass_explicit(0.5, 0.5)
        assert explicit_v(-10.0, 0.0, p) == 0.0
        assert explicit_v(10.0, 0.0, p) == M
        assert explicit_v(0.0, 0.0, p) == pytest.approx(M / 2.0, rel=1e-10)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_against_incomplete_beta_closed_form(self, s):
        # independent route: int_{-1}^{xi} (1-z^2)^s dz via the regularized
        # incomplete beta function
        p = ExplicitSolutionParams(s=s, t0=1.0, R=0.5)
        M = mass_explicit(0.5, s)
        t = 0.7
        r = p.radius(t)
        for xi in (-0.9, -0.3, 0.0, 0.4, 0.95):
            x = xi * r
            closed = M * (0.5 + 0.5 * math.copysign(1.0, xi)
                          * betainc(0.5, 1.0 + s, xi * xi))
            assert explicit_v(x, t, p) == pytest.approx(closed, abs=1e-9)

    def test_nondecreasing(self):
        p = ExplicitSolutionParams(s=0.25, t0=1.0, R=0.5)
        xs = np.linspace(-0.7, 0.7, 41)
        vals = [explicit_v(float(x), 0.0, p) for x in xs]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


class TestBumpDatum:
    def test_point_values(self):
        assert experiment3_u0(1.5) == pytest.approx(math.exp(-1.0), rel=1e-14)
        assert experiment3_u0(-1.5) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-14)

    def test_support(self):
        for x in (2.5, -2.5, 3.0, -4.0):
            assert experiment3_u0(x) == 0.0
        assert experiment3_u0(2.2) > 0.0

    def test_datum_mass_and_sup(self):
        d = bump_sum_datum()
        # bump integral int exp(-1/(1-x^2)) dx times (1 + 2)
        single, _ = quad(lambda x: math.exp(-1.0 / (1.0 - x * x)) if abs(x) < 1 else 0.0,
                         -1.0, 1.0, epsabs=1e-12, epsrel=0.0, limit=200)
        assert d.M == pytest.approx(3.0 * single, rel=1e-8)
        assert d.u_sup == pytest.approx(2.0 * math.exp(-1.0), rel=1e-14)


class TestSmoothingExponents:
    def test_reference_values(self):
        se = smoothing_exponents(0.5, 2.0)
        assert (se.gamma, se.delta) == (0.5, 0.5)
        assert smoothing_exponents(0.5, 4.0).gamma == pytest.approx(0.25)

    @pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("m", [2.0, 3.0, 5.0])
    def test_consistency_identity(self, s, m):
        se = smoothing_exponents(s, m)
        assert se.gamma * ((m - 1.0) + 2.0 * (1.0 - s)) == pytest.approx(1.0, rel=1e-14)
        assert 0.0 < se.gamma < 1.0 and 0.0 < se.delta < 1.0

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            smoothing_exponents(1.0, 2.0)
        with pytest.raises(ValueError):
            smoothing_exponents(0.5, 1.5)


class TestSampleV0:
    def test_explicit_profile_pinned_to_extensions(self):
        d = explicit_profile_datum(0.5, 1.0, 0.5)
        xs = np.linspace(-2.0, 2.0, 65)
        v0 = sample_v0(d, xs)
        assert v0[0] == 0.0
        assert v0[-1] == d.M  # exactly the closed-form mass
        assert np.all(np.diff(v0) >= 0.0)
        assert np.all((v0 >= 0.0) & (v0 <= d.M))

    def test_dirac_step(self):
        d = dirac_datum(2.0, a=0.5)
        xs = np.array([-1.0, 0.0, 0.5, 1.0])
        assert np.array_equal(sample_v0(d, xs), [0.0, 0.0, 2.0, 2.0])

    def test_bump_sum_cumulative(self):
        d = bump_sum_datum()
        xs = np.linspace(-3.0, 3.0, 49)
        v0 = sample_v0(d, xs)
        assert v0[0] == 0.0 and v0[-1] == d.M
        assert np.all(np.diff(v0) >= 0.0)
        mid = sample_v0(d, np.array([0.0]))[0]
        # left bump carries 2/3 of the mass
        assert mid == pytest.approx(2.0 * d.M / 3.0, rel=1e-7)
