"""Closed-form reference solutions, masses, and the initial-data library.

The explicit self-similar family exists only for quadratic nonlinearity
(m = 2): a rescaled ``(R^2 - y^2)_+^s`` profile whose radius grows like
``(t + t0)^{1/(1+2s)}``.  Its cumulative integral is the reference for the
integrated problem; Dirac data enter only through their integrated step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

_QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class ExplicitSolutionParams:
    """Parameters of the explicit self-similar solution (m = 2 only)."""

    s: float
    t0: float = 0.0
    R: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.t0 < 0.0:
            raise ValueError(f"t0 must be >= 0, got {self.t0}")
        if self.R <= 0.0:
            raise ValueError(f"R must be positive, got {self.R}")

    def radius(self, t: float) -> float:
        """Support radius of the density at time t."""
        return self.R * (t + self.t0) ** (1.0 / (1.0 + 2.0 * self.s))


@dataclass(frozen=True)
class SmoothingExponents:
    """Decay exponents of the L^inf smoothing estimate in one dimension."""

    gamma: float
    delta: float


def k_constant(s: float) -> float:
    """Amplitude constant of the explicit profile,
    ``1 / (2^{2s} (1+2s)) * Gamma(1/2) / (Gamma(1+s) Gamma(1/2+s))``."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    return math.exp(
        -2.0 * s * math.log(2.0)
        - math.log(1.0 + 2.0 * s)
        + 0.5 * math.log(math.pi)
        - gammaln(1.0 + s)
        - gammaln(0.5 + s)
    )


def mass_explicit(R: float, s: float) -> float:
    """Total mass ``k_s R^{1+2s} Gamma(1/2) Gamma(1+s) / Gamma(3/2+s)`` of the
    explicit profile; independent of time."""
    if R <= 0.0:
        raise ValueError(f"R must be positive, got {R}")
    return k_constant(s) * R ** (1.0 + 2.0 * s) * math.exp(
        0.5 * math.log(math.pi) + gammaln(1.0 + s) - gammaln(1.5 + s)
    )


def explicit_u(x, t: float, params: ExplicitSolutionParams):
    """Density of the explicit solution at (x, t); zero outside the moving
    support.  Requires t + t0 > 0 (at t + t0 = 0 the datum is a point mass
    and only the integrated step makes sense)."""
    if t + params.t0 <= 0.0:
        raise ValueError(
            "explicit_u undefined at t + t0 = 0 (Dirac datum); use the integrated step"
        )
    lam = (t + params.t0) ** (-1.0 / (1.0 + 2.0 * params.s))
    y = np.asarray(x, dtype=np.float64) * lam
    prof = np.maximum(params.R**2 - y**2, 0.0) ** params.s
    out = k_constant(params.s) * lam * prof
    if np.ndim(x) == 0:
        return float(out)
    return out


def explicit_v(x: float, t: float, params: ExplicitSolutionParams) -> float:
    """Cumulative integral of :func:`explicit_u` from -inf to x.

    Adaptive quadrature split at the free boundary (the integrand is only
    C^s there); exact 0 / total-mass branches outside the support.
    """
    if t + params.t0 <= 0.0:
        raise ValueError("explicit_v undefined at t + t0 = 0; use the integrated step")
    r = params.radius(t)
    if x <= -r:
        return 0.0
    M = mass_explicit(params.R, params.s)
    if x >= r:
        return M
    val, err = quad(
        lambda y: explicit_u(y, t, params),
        -r,
        x,
        epsabs=_QUAD_ABS_TOL,
        epsrel=0.0,
        limit=200,
    )
    if err > 10.0 * _QUAD_ABS_TOL:
        warnings.warn(
            f"explicit_v quadrature tolerance not met: estimated error {err:.2e}",
            stacklevel=2,
        )
    # quadrature can overshoot the range by its own tolerance
    return min(max(val, 0.0), M)


def experiment3_u0(x):
    """Sum-of-bumps datum used with quartic nonlinearity: a unit bump at
    x = 3/2 plus a double-height bump at x = -3/2, supported in [-5/2, 5/2]."""
    x = np.asarray(x, dtype=np.float64)

    def bump(z):
        g = np.maximum(1.0 - z**2, 0.0)
        out = np.zeros_like(g)
        pos = g > 0.0
        out[pos] = np.exp(-1.0 / g[pos])
        return out

    val = bump(x - 1.5) + 2.0 * bump(x + 1.5)
    if val.ndim == 0:
        return float(val)
    return val


def smoothing_exponents(s: float, m: float) -> SmoothingExponents:
    """Exponents gamma (time decay) and delta (mass dependence) of the sup
    bound ``||u(.,t)||_inf <= C t^{-gamma} M^delta`` in dimension one."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if m < 2.0:
        raise ValueError(f"m must be >= 2, got {m}")
    denom = (m - 1.0) + 2.0 * (1.0 - s)
    return SmoothingExponents(gamma=1.0 / denom, delta=2.0 * (1.0 - s) / denom)


@dataclass(frozen=True)
class InitialDatum:
    """Initial data for the integrated problem.

    kind: one of 'explicit_profile', 'dirac', 'step_v', 'bump_sum', 'custom'.
    Dirac data are represented only through their integrated step (height
    ``M`` at ``a``); a grid density at t = 0 is not meaningful for them.
    """

    kind: str
    s: float | None = None
    t0: float | None = None
    R: float | None = None
    M: float | None = None
    a: float = 0.0
    v0: Callable[[float], float] | None = None
    u_sup: float | None = None
    support: tuple[float, float] | None = None

    def params(self) -> ExplicitSolutionParams:
        if self.kind != "explicit_profile":
            raise ValueError(f"no explicit-solution params for kind {self.kind!r}")
        return ExplicitSolutionParams(s=self.s, t0=self.t0, R=self.R)


def explicit_profile_datum(s: float, t0: float, R: float) -> InitialDatum:
    p = ExplicitSolutionParams(s=s, t0=t0, R=R)
    if t0 <= 0.0:
        raise ValueError("explicit profile datum needs t0 > 0; use dirac_datum for t0 = 0")
    r0 = p.radius(0.0)
    u_sup = explicit_u(0.0, 0.0, p)
    return InitialDatum(
        kind="explicit_profile",
        s=s,
        t0=t0,
        R=R,
        M=mass_explicit(R, s),
        u_sup=u_sup,
        support=(-r0, r0),
    )


def dirac_datum(M: float, a: float = 0.0) -> InitialDatum:
    if M < 0.0:
        raise ValueError(f"mass must be nonnegative, got {M}")
    return InitialDatum(kind="dirac", M=M, a=a, u_sup=None, support=(a, a))


def bump_sum_datum() -> InitialDatum:
    total, _ = quad(experiment3_u0, -2.5, 2.5, epsabs=_QUAD_ABS_TOL, epsrel=0.0, limit=200)
    return InitialDatum(
        kind="bump_sum",
        M=total,
        u_sup=2.0 * math.exp(-1.0),
        support=(-2.5, 2.5),
    )


def sample_v0(datum: InitialDatum, xs: np.ndarray) -> np.ndarray:
    """Pointwise samples of the integrated initial datum at the grid nodes.

    Values are clamped to [0, M] and pinned exactly to 0 / M outside the
    support, so fields start bit-consistent with their constant extensions.
    """
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty_like(xs)
    if datum.kind == "explicit_profile":
        p = datum.params()
        for i, x in enumerate(xs):
            out[i] = explicit_v(float(x), 0.0, p)
        np.clip(out, 0.0, datum.M, out=out)
    elif datum.kind in ("dirac", "step_v"):
        out[:] = np.where(xs >= datum.a, datum.M, 0.0)
    elif datum.kind == "bump_sum":
        lo, hi = datum.support
        acc = 0.0
        prev = None
        for i, x in enumerate(xs):
            x = float(x)
            if x <= lo:
                out[i] = 0.0
                continue
            start = lo if prev is None else prev
            seg, _ = quad(
                experiment3_u0, start, min(x, hi), epsabs=_QUAD_ABS_TOL / max(len(xs), 1),
                epsrel=0.0, limit=200,
            )
            acc += seg
            prev = min(x, hi)
            out[i] = min(acc, datum.M) if x < hi else datum.M
    elif datum.kind == "custom":
        for i, x in enumerate(xs):
            out[i] = datum.v0(float(x))
    else:
        raise ValueError(f"unknown datum kind {datum.kind!r}")
    return out
