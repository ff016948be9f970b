"""Error measures, the weak-convergence distance bound, and observed orders.

Errors follow the reporting conventions of the experiments: relative sup norm
for the integrated variable, relative L^1 or weak (test function 1) error for
the density, all at the final time on the grid nodes.  The
Rubinstein-Kantorovich distance is never solved as an optimization; it is
bracketed from above by the L^1 norms of the CDF difference (1-Lipschitz
duals) and of the density difference (bounded duals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

D0_MASS_RTOL = 1e-8


@dataclass(frozen=True)
class ErrorReport:
    """Errors of one resolution rung."""

    h: float
    tau: float
    E_v: float
    E_u: float
    E_u_weak: float
    d0_bound: float
    runtime_seconds: float = 0.0

    def __post_init__(self):
        for name in ("E_v", "E_u", "E_u_weak", "d0_bound"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


CSV_HEADER = "h,tau,E_v,E_u,E_u_weak,d0_bound,order_Ev,order_Eu,runtime_s"


@dataclass
class ConvergenceTable:
    """Error reports over a strictly decreasing refinement ladder."""

    rows: list[ErrorReport] = field(default_factory=list)

    def append(self, row: ErrorReport) -> None:
        if self.rows and row.h >= self.rows[-1].h:
            raise ValueError("ladder must be strictly decreasing in h")
        self.rows.append(row)

    def errors(self, metric: str) -> list[float]:
        return [getattr(r, metric) for r in self.rows]

    def orders(self, metric: str) -> list[float]:
        if len(self.rows) < 2:
            return []
        return observed_order(self.errors(metric), [r.h for r in self.rows])

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        o_v = [math.nan] + self.orders("E_v")
        o_u = [math.nan] + self.orders("E_u")
        for r, ov, ou in zip(self.rows, o_v, o_u):
            lines.append(
                f"{r.h!r},{r.tau!r},{r.E_v!r},{r.E_u!r},{r.E_u_weak!r},"
                f"{r.d0_bound!r},{ov!r},{ou!r},{r.runtime_seconds:.3f}"
            )
        return "\n".join(lines) + "\n"


def error_Ev(approx: np.ndarray, reference: np.ndarray) -> float:
    """Relative sup error over the nodes: ``max|ref - approx| / max|ref|``."""
    approx = np.asarray(approx, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    denom = float(np.max(np.abs(reference)))
    if denom == 0.0:
        raise ValueError("reference sup norm is zero; relative error undefined")
    return float(np.max(np.abs(reference - approx))) / denom


def error_Eu(approx: np.ndarray, reference: np.ndarray) -> float:
    """Relative L^1 error over the nodes, ``sum|diff| / sum ref`` (the h
    factors cancel)."""
    approx = np.asarray(approx, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    denom = float(np.sum(reference))
    if denom == 0.0:
        raise ValueError("reference mass is zero; relative error undefined")
    return float(np.sum(np.abs(approx - reference))) / denom


def error_Eu_weak(approx: np.ndarray, reference: np.ndarray, h: float) -> float:
    """Weak error against the test function 1: ``h |sum(approx - ref)|``."""
    return h * abs(float(np.sum(np.asarray(approx) - np.asarray(reference))))


def d0_upper_bound(
    f1: np.ndarray,
    f2: np.ndarray,
    h: float,
    mass_rtol: float = D0_MASS_RTOL,
) -> float:
    """Upper bound on the Rubinstein-Kantorovich distance of two densities
    sampled on the same grid.

    Returns ``min(||F1 - F2||_L1, ||f1 - f2||_L1)`` with F_i the discrete
    CDFs; the first bound comes from integrating the 1-Lipschitz dual by
    parts, the second from its sup bound.  Both are upper bounds, not the
    distance itself.  Requires (nearly) equal masses: the CDF duality breaks
    otherwise.
    """
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError("densities must be sampled on the same grid")
    m1 = h * math.fsum(f1)
    m2 = h * math.fsum(f2)
    if abs(m1 - m2) > mass_rtol * max(abs(m1), abs(m2), 1e-300):
        raise ValueError(
            f"d0 bound requires equal masses: got {m1!r} vs {m2!r}"
        )
    F1 = h * np.cumsum(f1)
    F2 = h * np.cumsum(f2)
    cdf_bound = h * float(np.sum(np.abs(F1 - F2)))
    l1_bound = h * float(np.sum(np.abs(f1 - f2)))
    return min(cdf_bound, l1_bound)


def observed_order(errors, hs=None) -> list[float]:
    """Convergence order per adjacent ladder pair; ``log2(E_k / E_{k+1})``
    for a halving ladder, generalized via the h ratio otherwise.  A zero
    error in the denominator yields the +inf sentinel."""
    errors = list(errors)
    if len(errors) < 2:
        raise ValueError("need at least two ladder rungs")
    if hs is None:
        ratios = [2.0] * (len(errors) - 1)
    else:
        hs = list(hs)
        if len(hs) != len(errors):
            raise ValueError("need one h per error")
        ratios = [a / b for a, b in zip(hs, hs[1:])]
    out = []
    for e0, e1, r in zip(errors, errors[1:], ratios):
        if e1 == 0.0:
            out.append(math.inf)
        elif e0 == 0.0:
            out.append(-math.inf)
        else:
            out.append(math.log(e0 / e1) / math.log(r))
    return out
