"""Explicit monotone scheme for the integrated problem.

One step maps a nondecreasing bounded grid function V through

    V_i  <-  V_i - tau * |D_h V_i|^{m-1} * Lap_h^s V_i,

where the one-sided difference D_h switches side on the sign of the discrete
fractional Laplacian at the same node.  That coupling is the monotonicity
mechanism: under the CFL restrictions below the map preserves order, bounds,
and Lipschitz constants.  The grid is a finite window with constant
extensions; the extension values never change (flat one-sided slopes freeze
the far field), which is monitored rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from fpme.oplib import WeightTable, _kernel_args, _lap_grid

CFL1 = "CFL1"
CFL2 = "CFL2"
DEFAULT_SAFETY = 0.9


class CflViolationError(RuntimeError):
    """Raised when a step output is no longer nondecreasing (or blew up):
    the time step was too large for the data, or the input was corrupted."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


@dataclass(frozen=True)
class GridSpec:
    """Uniform window ``[i_min, i_max]`` of the grid ``origin + h Z`` with
    constant extension values v_L (left) and v_R (right)."""

    h: float
    i_min: int
    i_max: int
    v_L: float
    v_R: float
    origin: float = 0.0

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError(f"h must be positive, got {self.h}")
        if self.i_min >= self.i_max:
            raise ValueError("window must contain at least two nodes")
        if self.v_L > self.v_R:
            raise ValueError("constant extensions must satisfy v_L <= v_R")

    @property
    def n_nodes(self) -> int:
        return self.i_max - self.i_min + 1

    def xs(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.i_min, self.i_max + 1)

    def x(self, i: int) -> float:
        return self.origin + self.h * (self.i_min + i)


@dataclass(frozen=True)
class TimeSpec:
    """Uniform time grid t_j = j * tau, j = 0..J, with tau J = T."""

    tau: float
    J: int
    T: float
    tau_bound: float = math.inf
    safety: float = 1.0

    def __post_init__(self):
        if self.J < 0 or self.tau < 0.0:
            raise ValueError("need J >= 0 and tau >= 0")
        if self.J > 0 and not math.isclose(self.tau * self.J, self.T, rel_tol=1e-12):
            raise ValueError("tau * J must equal T")


@dataclass(frozen=True)
class ProblemSpec:
    """Problem parameters: fractional order s, nonlinearity exponent m >= 2,
    sup bound M on |v|, optional Lipschitz bound L on v_0 (needed by CFL2)."""

    s: float
    m: float
    M: float
    L: float | None = None
    cfl_mode: str = CFL1

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.m < 2.0:
            raise ValueError(f"m must be >= 2 (comparison requires it), got {self.m}")
        if self.M < 0.0:
            raise ValueError(f"M must be >= 0, got {self.M}")
        if self.cfl_mode not in (CFL1, CFL2):
            raise ValueError(f"cfl_mode must be CFL1 or CFL2, got {self.cfl_mode!r}")
        if self.cfl_mode == CFL2 and self.L is None:
            raise ValueError("CFL2 requires the Lipschitz bound L")


@dataclass(frozen=True)
class VField:
    """Snapshot of the integrated variable on a window."""

    values: np.ndarray
    grid: GridSpec
    time_index: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"values shape {v.shape} does not match window of {self.grid.n_nodes} nodes"
            )
        object.__setattr__(self, "values", v)

    def is_nondecreasing(self) -> bool:
        v = self.values
        return (
            bool(np.all(np.diff(v) >= 0.0))
            and self.grid.v_L <= v[0]
            and v[-1] <= self.grid.v_R
        )

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def max_slope(self) -> float:
        """Largest one-sided slope, seam cells against the extensions included."""
        v = self.values
        h = self.grid.h
        interior = float(np.max(np.diff(v))) if v.size > 1 else 0.0
        return max(interior, v[0] - self.grid.v_L, self.grid.v_R - v[-1]) / h

    def boundary_deviation(self) -> tuple[float, float]:
        """|V_{i_min} - v_L| and |v_R - V_{i_max}|: the limits-at-infinity monitor."""
        return (
            abs(self.values[0] - self.grid.v_L),
            abs(self.grid.v_R - self.values[-1]),
        )


def lap_field(table: WeightTable, v: VField) -> np.ndarray:
    """Discrete fractional Laplacian of the field at every window node."""
    n_off, rest = _kernel_args(table, v.grid.n_nodes)
    out = np.empty(v.grid.n_nodes)
    _lap_grid(v.values, v.grid.v_L, v.grid.v_R, table.w, n_off, rest, table.scale, out)
    return out


def _shifted(v: VField) -> tuple[np.ndarray, np.ndarray]:
    vals = v.values
    right = np.empty_like(vals)
    right[:-1] = vals[1:]
    right[-1] = v.grid.v_R
    left = np.empty_like(vals)
    left[1:] = vals[:-1]
    left[0] = v.grid.v_L
    return left, right


def upwind_gradient(v: VField, i: int, lap: float) -> float:
    """One-sided difference at node i, side chosen by the sign of the
    discrete fractional Laplacian there (ties take the forward branch)."""
    vals = v.values
    h = v.grid.h
    if lap <= 0.0:
        right = vals[i + 1] if i + 1 < vals.shape[0] else v.grid.v_R
        return (right - vals[i]) / h
    left = vals[i - 1] if i > 0 else v.grid.v_L
    return (vals[i] - left) / h


def quasilinear_op(table: WeightTable, p: ProblemSpec, v: VField, i: int) -> float:
    """Discretized quasilinear operator ``-|D_h v|^{m-1} Lap_h^s v`` at node i.

    The Laplacian is evaluated once and reused for both the branch decision
    and the product; recomputing it differently would break the monotonicity
    coupling.
    """
    from fpme.oplib import apply_lap

    lap = apply_lap(table, v.values, i, v.grid.v_L, v.grid.v_R)
    grad = upwind_gradient(v, i, lap)
    return -abs(grad) ** (p.m - 1.0) * lap


def cfl_tau(p: ProblemSpec, h: float, Cs: float) -> float:
    """Theoretical time-step bound for spacing h and empirical constant Cs.

    CFL1: ``h^{2s+m-1} / (Cs m (2M)^{m-1})`` for bounded data.
    CFL2: ``h^{max(1,2s)} f_s(h) / (Cs m L^{m-2} max(L, 2M))`` for Lipschitz
    data, with ``f_s(h) = 1/|log h|`` at s = 1/2 and 1 otherwise.
    Degenerate data (M = 0) evolve trivially: returns +inf.
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"CFL formulas require 0 < h < 1, got {h}")
    if Cs <= 0.0:
        raise ValueError(f"Cs must be positive, got {Cs}")
    if p.M == 0.0:
        return math.inf
    if p.cfl_mode == CFL1:
        return h ** (2.0 * p.s + p.m - 1.0) / (Cs * p.m * (2.0 * p.M) ** (p.m - 1.0))
    if p.L is None:
        raise ValueError("CFL2 requires the Lipschitz bound L")
    if p.L == 0.0:
        return math.inf
    f_s = 1.0 / abs(math.log(h)) if p.s == 0.5 else 1.0
    denom = Cs * p.m * p.L ** (p.m - 2.0) * max(p.L, 2.0 * p.M)
    return h ** max(1.0, 2.0 * p.s) * f_s / denom


def make_time_grid(
    tau_bound: float,
    T: float,
    snapshot_times: tuple[float, ...] = (),
    safety: float = DEFAULT_SAFETY,
) -> TimeSpec:
    """Time grid with tau <= safety * tau_bound, shrunk so that T / tau is an
    integer and every snapshot time falls exactly on the grid."""
    if T < 0.0:
        raise ValueError(f"T must be >= 0, got {T}")
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety factor must lie in (0, 1], got {safety}")
    if T == 0.0:
        return TimeSpec(tau=0.0, J=0, T=0.0, tau_bound=tau_bound, safety=safety)
    target = safety * tau_bound
    J = 1 if target >= T else math.ceil(T / target)
    mult = 1
    for t in snapshot_times:
        if not 0.0 <= t <= T:
            raise ValueError(f"snapshot time {t} outside [0, {T}]")
        frac = Fraction(t / T).limit_denominator(10**6)
        mult = math.lcm(mult, frac.denominator)
    J = math.ceil(J / mult) * mult
    return TimeSpec(tau=T / J, J=J, T=T, tau_bound=tau_bound, safety=safety)


def _step_arrays(
    table: WeightTable, p: ProblemSpec, v: VField, tau: float
) -> tuple[np.ndarray, np.ndarray]:
    lap = lap_field(table, v)
    left, right = _shifted(v)
    h = v.grid.h
    grad = np.where(lap <= 0.0, (right - v.values) / h, (v.values - left) / h)
    new = v.values - tau * np.abs(grad) ** (p.m - 1.0) * lap
    return new, lap


def _check_step(new: np.ndarray, grid: GridSpec, j: int):
    if not np.all(np.isfinite(new)):
        bad = int(np.argmin(np.isfinite(new)))
        raise CflViolationError(
            f"non-finite value at node {bad} after step {j}", step_index=j
        )
    diffs_ok = np.all(new[1:] >= new[:-1])
    if not (diffs_ok and grid.v_L <= new[0] and new[-1] <= grid.v_R):
        if not diffs_ok:
            bad = int(np.argmin(new[1:] >= new[:-1]))
            detail = f"V[{bad}] = {new[bad]!r} > V[{bad + 1}] = {new[bad + 1]!r}"
        else:
            detail = f"window values left [{grid.v_L}, {grid.v_R}]"
        raise CflViolationError(
            f"monotonicity lost after step {j} ({detail}): tau too large or input corrupted",
            step_index=j,
        )


def step(table: WeightTable, p: ProblemSpec, v: VField, tau: float,
         check: bool = True) -> VField:
    """One application of the propagator.  With ``check`` (default) the output
    is verified to be nondecreasing and within the extension bounds, raising
    :class:`CflViolationError` otherwise."""
    new, _ = _step_arrays(table, p, v, tau)
    if check:
        _check_step(new, v.grid, v.time_index)
    return VField(values=new, grid=v.grid, time_index=v.time_index + 1)


@dataclass
class Trajectory:
    """Snapshots of an evolution at requested times, plus per-snapshot
    bookkeeping (telescoped mass, sup norm, max slope, boundary deviation)."""

    grid: GridSpec
    tspec: TimeSpec
    times: list[float] = field(default_factory=list)
    snapshots: list[VField] = field(default_factory=list)
    meta: list[dict] = field(default_factory=list)

    @property
    def final(self) -> VField:
        return self.snapshots[-1]

    def at_time(self, t: float) -> VField:
        for tt, snap in zip(self.times, self.snapshots):
            if math.isclose(tt, t, rel_tol=0.0, abs_tol=1e-12 * max(1.0, self.tspec.T)):
                return snap
        raise KeyError(f"no snapshot stored at t = {t}")


def _snapshot_meta(v: VField) -> dict:
    dev_l, dev_r = v.boundary_deviation()
    return {
        "mass": v.values[-1] - v.grid.v_L,
        "sup_norm": v.sup_norm(),
        "max_slope": v.max_slope(),
        "boundary_dev_left": dev_l,
        "boundary_dev_right": dev_r,
    }


def evolve(
    table: WeightTable,
    p: ProblemSpec,
    v0: VField,
    tspec: TimeSpec,
    snapshot_times: tuple[float, ...] = (),
    check: bool = True,
) -> Trajectory:
    """March the scheme J steps from v0, collecting snapshots.

    Snapshot times must sit on the time grid (see :func:`make_time_grid`);
    the final time is always collected.  NaN/Inf or a monotonicity violation
    aborts with the offending step index when ``check`` is set.
    """
    if check and not v0.is_nondecreasing():
        raise ValueError("initial data must be nondecreasing and within [v_L, v_R]")
    J, tau, T = tspec.J, tspec.tau, tspec.T
    want: dict[int, float] = {}
    for t in snapshot_times:
        jf = t / tau if tau > 0.0 else 0.0
        jr = round(jf)
        if abs(jf - jr) > 1e-9 * max(1.0, J):
            raise ValueError(f"snapshot time {t} does not lie on the time grid")
        want[int(jr)] = t
    want[J] = T

    traj = Trajectory(grid=v0.grid, tspec=tspec)
    v = v0
    if 0 in want:
        traj.times.append(0.0)
        traj.snapshots.append(v)
        traj.meta.append(_snapshot_meta(v))
    for j in range(J):
        new, _ = _step_arrays(table, p, v, tau)
        if check:
            _check_step(new, v.grid, j)
        elif not np.all(np.isfinite(new)):
            raise CflViolationError(f"non-finite value after step {j}", step_index=j)
        v = VField(values=new, grid=v.grid, time_index=j + 1)
        if j + 1 in want:
            traj.times.append(want[j + 1])
            traj.snapshots.append(v)
            traj.meta.append(_snapshot_meta(v))
    return traj
