"""Density recovery from the integrated variable and the space-time
interpolants.

U is the backward difference of V, so cell ``[x_{i-1}, x_i)`` carries the
value ``U_i`` and the piecewise-linear interpolant of V has slope U almost
everywhere.  Prefix sums invert the differencing exactly (telescoping), which
is what makes mass conservation an algebraic identity rather than an
estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fpme.scheme import GridSpec, Trajectory, VField

PIECEWISE_LINEAR_V = "piecewise_linear_V"
PIECEWISE_CONSTANT_U = "piecewise_constant_U"


@dataclass(frozen=True)
class UField:
    """Grid density on a window; ``values[i]`` lives on cell
    ``[x_{i-1}, x_i)`` of the grid (backward-difference convention)."""

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

    def right_seam_value(self) -> float:
        """Density of the virtual cell between the last node and the right
        extension; nonzero only when the window clips the support."""
        covered = self.grid.v_L + self.grid.h * math.fsum(self.values)
        return (self.grid.v_R - covered) / self.grid.h


def differentiate(v: VField) -> UField:
    """Backward difference of V with the left extension as ghost value.

    ``h * sum(U)`` telescopes to ``V_{i_max} - v_L`` exactly; for windows that
    contain the support this equals ``v_R - v_L``.
    """
    vals = v.values
    h = v.grid.h
    u = np.empty_like(vals)
    u[0] = (vals[0] - v.grid.v_L) / h
    u[1:] = np.diff(vals) / h
    return UField(values=u, grid=v.grid, time_index=v.time_index)


def cumulative(u: UField) -> VField:
    """Prefix sums scaled by h, offset by the left extension value; exact
    round-trip with :func:`differentiate` up to a few ulp."""
    vals = u.grid.v_L + u.grid.h * np.cumsum(u.values)
    return VField(values=vals, grid=u.grid, time_index=u.time_index)


def mass(u: UField) -> float:
    """Total mass h * sum(U), summed exactly."""
    return u.grid.h * math.fsum(u.values)


def sup_norm(u: UField) -> float:
    return float(np.max(u.values))


def tail_mass(u: UField, R: float) -> float:
    """Mass carried by cells whose nodes satisfy |x_i| > R."""
    xs = u.grid.xs()
    sel = np.abs(xs) > R
    return u.grid.h * math.fsum(u.values[sel])


@dataclass(frozen=True)
class Interpolant:
    """Space-time interpolant over a trajectory's snapshots.

    kind 'piecewise_linear_V' interpolates V linearly in x; kind
    'piecewise_constant_U' looks up the cell value of U.  Time lookup is
    left-constant on [t_j, t_{j+1}) in both cases.
    """

    kind: str
    times: tuple[float, ...]
    fields: tuple[np.ndarray, ...]
    grid: GridSpec

    def __post_init__(self):
        if self.kind not in (PIECEWISE_LINEAR_V, PIECEWISE_CONSTANT_U):
            raise ValueError(f"unknown interpolant kind {self.kind!r}")
        if len(self.times) != len(self.fields) or not self.times:
            raise ValueError("need one field per snapshot time")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def _field_at(self, t: float) -> np.ndarray:
        if t < self.times[0] - 1e-12 or t > self.horizon + 1e-12:
            raise ValueError(f"t = {t} outside stored horizon [{self.times[0]}, {self.horizon}]")
        idx = int(np.searchsorted(np.asarray(self.times), t, side="right")) - 1
        return self.fields[max(idx, 0)]

    def __call__(self, x: float, t: float) -> float:
        vals = self._field_at(t)
        g = self.grid
        p = (x - g.x(0)) / g.h
        n = vals.shape[0]
        if self.kind == PIECEWISE_LINEAR_V:
            idx = math.floor(p)
            if idx < -1:
                return g.v_L
            if idx >= n:
                return g.v_R
            left = vals[idx] if idx >= 0 else g.v_L
            right = vals[idx + 1] if idx + 1 <= n - 1 else g.v_R
            theta = p - idx
            return (1.0 - theta) * left + theta * right
        # piecewise-constant U: x in [x_{i-1}, x_i) -> U_i
        cell = math.floor(p) + 1
        if cell < 0 or cell > n:
            return 0.0
        if cell == n:
            covered = g.v_L + g.h * math.fsum(vals)
            return (g.v_R - covered) / g.h
        return float(vals[cell])


def v_interpolant(traj: Trajectory) -> Interpolant:
    return Interpolant(
        kind=PIECEWISE_LINEAR_V,
        times=tuple(traj.times),
        fields=tuple(s.values for s in traj.snapshots),
        grid=traj.grid,
    )


def u_interpolant(traj: Trajectory) -> Interpolant:
    return Interpolant(
        kind=PIECEWISE_CONSTANT_U,
        times=tuple(traj.times),
        fields=tuple(differentiate(s).values for s in traj.snapshots),
        grid=traj.grid,
    )


def snapshot_rows(v: VField) -> np.ndarray:
    """Columns x, V, U for one snapshot (U in the backward-cell convention)."""
    u = differentiate(v)
    return np.column_stack([v.grid.xs(), v.values, u.values])


def write_snapshot_csv(path, v: VField) -> None:
    rows = snapshot_rows(v)
    with open(path, "w") as fh:
        fh.write("x,V,U\n")
        for x, vv, uu in rows:
            fh.write(f"{float(x)!r},{float(vv)!r},{float(uu)!r}\n")
