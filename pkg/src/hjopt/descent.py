"""Normalized steepest descent on a computed critical solution.

The integrator realizes the unit-speed inclusion dy/dt = -p/|p| with p a
discrete upwind gradient of v: at the node nearest to y the Godunov upwind
slope is taken per axis; when that gradient is numerically zero off the
target the step falls back to discrete steepest descent over the axis and
diagonal neighbours, and terminates with status "stalled" when no probe
direction decreases v beyond the solver noise floor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError
from .fields import (GridSpec, ScalarField, TargetMask, interpolate_many)

# Upwind gradients below GRAD_ZERO_FACTOR * h * max(ell) count as zero and
# trigger the neighbour-probe fallback.
GRAD_ZERO_FACTOR = 10.0
# Probe decreases below FLAT_FLOOR_FACTOR * max(1, ||v||) are solver noise:
# the trajectory is declared stalled rather than chasing roundoff.
FLAT_FLOOR_FACTOR = 1e-9

STATUS_HIT = "hit"
STATUS_MAXTIME = "maxtime"
STATUS_STALLED = "stalled"
STATUS_BOUNDARY = "boundary"


@dataclass(frozen=True)
class DescentConfig:
    """Step size, horizon and hit band for one descent integration.

    ``step <= grid spacing`` so the path cannot jump the target band, and
    ``stop_dist >= spacing`` so the band is resolvable on the grid.
    """

    step: float
    max_time: float
    stop_dist: float
    tie_break: str = "lexicographic"

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError("step must be positive")
        if not self.max_time > 0:
            raise ConfigError("max_time must be positive")
        if not self.stop_dist > 0:
            raise ConfigError("stop_dist must be positive")
        if self.tie_break != "lexicographic":
            raise ConfigError("only lexicographic tie-breaking is supported")

    @classmethod
    def for_grid(cls, grid: GridSpec, max_time: float,
                 step: Optional[float] = None,
                 stop_dist: Optional[float] = None) -> "DescentConfig":
        h = grid.spacing
        return cls(step=h / 2 if step is None else step,
                   max_time=max_time,
                   stop_dist=h if stop_dist is None else stop_dist)

    def check_against(self, grid: GridSpec) -> None:
        if self.step > grid.spacing * (1 + 1e-12):
            raise ConfigError(
                f"step {self.step} exceeds grid spacing {grid.spacing}")
        if self.stop_dist < grid.spacing * (1 - 1e-12):
            raise ConfigError(
                f"stop_dist {self.stop_dist} below grid spacing "
                f"{grid.spacing}")


@dataclass(frozen=True)
class Trajectory:
    """Recorded descent path with the monitored quantities.

    ``h_values[k] = v(y_k) + integral of ell along the path up to t_k``
    (trapezoid rule); along an exactly optimal path it is constant, and the
    discrete path keeps it non-increasing up to discretization slack.
    """

    start: np.ndarray
    times: np.ndarray
    points: np.ndarray
    ell_values: np.ndarray
    d_values: np.ndarray
    h_values: np.ndarray
    hit_time: Optional[float]
    status: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        n = times.shape[0]
        for name in ("ell_values", "d_values", "h_values"):
            if np.asarray(getattr(self, name)).shape[0] != n:
                raise ValueError(f"{name} length mismatch")
        if pts.shape[0] != n:
            raise ValueError("points length mismatch")
        if n > 1:
            dts = np.diff(times)
            if np.any(dts <= 0):
                raise ValueError("times must be strictly ascending")
            speeds = np.linalg.norm(np.diff(pts, axis=0), axis=1)
            if np.any(speeds > dts * (1 + 1e-12) + 1e-15):
                raise ValueError("trajectory exceeds unit speed")

    @property
    def final_point(self) -> np.ndarray:
        return self.points[-1]

    @property
    def duration(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class OccupationalStats:
    """Fraction of [0, t] spent where ell > delta, with the a priori bound
    max(ell) * dist(start, target) / (t * delta)."""

    delta: float
    horizon: float
    fraction: float
    bound: float

    def __post_init__(self):
        if not (-1e-12 <= self.fraction <= 1 + 1e-12):
            raise ValueError(f"fraction {self.fraction} outside [0, 1]")


def _direction_set(dim: int) -> np.ndarray:
    """Unit probe directions (axis + diagonals), lexicographic order."""
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    dirs = [np.array([i, j], dtype=float)
            for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)]
    return np.array([d / np.linalg.norm(d) for d in dirs])


def _upwind_gradient(values: np.ndarray, idx: tuple[int, ...],
                     h: float) -> np.ndarray:
    """Godunov upwind gradient at a node: per axis the one-sided slope of
    larger descending magnitude; missing boundary differences drop out."""
    dim = values.ndim
    p = np.zeros(dim)
    for k in range(dim):
        i = idx[k]
        n = values.shape[k]
        here = values[idx]
        lo = list(idx)
        lo[k] -= 1
        hi = list(idx)
        hi[k] += 1
        a = (here - values[tuple(lo)]) / h if i > 0 else -np.inf
        b = (values[tuple(hi)] - here) / h if i < n - 1 else np.inf
        a_plus = max(a, 0.0)
        b_minus = max(-b, 0.0)
        p[k] = a if a_plus >= b_minus else b
    return p


def integrate_descent(v: ScalarField, ell: ScalarField, mask: TargetMask,
                      x0, cfg: DescentConfig) -> Trajectory:
    """Explicit Euler integration of the unit-speed descent of v from x0.

    Stops on hit (distance to the target at most ``stop_dist``), at
    ``max_time``, at the box boundary, or with status "stalled" at a
    numerically flat spot off the target.
    """
    grid = v.grid
    if ell.grid != grid or mask.grid != grid:
        raise ValueError("v, ell and mask must share one grid")
    cfg.check_against(grid)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (grid.dim,):
        raise ValueError(f"x0 must have shape ({grid.dim},)")
    if not grid.contains(x0):
        raise ValueError(f"start {x0} outside the grid box")

    h = grid.spacing
    dt = cfg.step
    lo, hi = grid.box
    tree = cKDTree(mask.flagged_coords())
    ell_bar = float(ell.values.max())
    grad_floor = GRAD_ZERO_FACTOR * h * ell_bar
    flat_floor = FLAT_FLOOR_FACTOR * max(1.0, float(np.max(np.abs(v.values))))
    dirs = _direction_set(grid.dim)

    def dist(p):
        return float(tree.query(p)[0])

    def v_at(p):
        return float(interpolate_many(v, p[None, :])[0])

    def ell_at(p):
        return float(interpolate_many(ell, p[None, :])[0])

    times = [0.0]
    points = [x0.copy()]
    ells = [ell_at(x0)]
    dists = [dist(x0)]
    hit_time = None
    status = STATUS_MAXTIME

    if dists[0] <= cfg.stop_dist:
        hit_time = 0.0
        status = STATUS_HIT
    else:
        y = x0.copy()
        t = 0.0
        while t + dt <= cfg.max_time + 1e-12:
            p = _upwind_gradient(v.values, grid.nearest_index(y), h)
            norm = float(np.linalg.norm(p))
            step_dir = None
            if norm >= grad_floor:
                step_dir = -p / norm
                if not grid.contains(y + dt * step_dir):
                    status = STATUS_BOUNDARY
                    break
            else:
                # discrete steepest descent over the probe stencil
                best_val = None
                v_here = v_at(y)
                in_box = False
                for d in dirs:
                    cand = y + dt * d
                    if np.any(cand < lo - 1e-12) or np.any(cand > hi + 1e-12):
                        continue
                    in_box = True
                    val = v_at(cand)
                    if best_val is None or val < best_val:
                        best_val = val
                        step_dir = d
                if not in_box:
                    status = STATUS_BOUNDARY
                    break
                if v_here - best_val <= flat_floor:
                    status = STATUS_STALLED
                    break
            y = y + dt * step_dir
            t += dt
            times.append(t)
            points.append(y.copy())
            ells.append(ell_at(y))
            d_new = dist(y)
            dists.append(d_new)
            if d_new <= cfg.stop_dist:
                d_prev = dists[-2]
                if d_prev > d_new:
                    frac = (d_prev - cfg.stop_dist) / (d_prev - d_new)
                else:
                    frac = 1.0
                hit_time = t - dt + dt * min(max(frac, 0.0), 1.0)
                status = STATUS_HIT
                break

    times = np.asarray(times)
    points = np.asarray(points).reshape(len(times), grid.dim)
    ells = np.asarray(ells)
    dists = np.asarray(dists)
    v_path = interpolate_many(v, points)
    if len(times) > 1:
        run_cost = np.concatenate(
            [[0.0], np.cumsum(0.5 * (ells[1:] + ells[:-1]) * np.diff(times))])
    else:
        run_cost = np.zeros(1)
    return Trajectory(start=x0, times=times, points=points, ell_values=ells,
                      d_values=dists, h_values=v_path + run_cost,
                      hit_time=hit_time, status=status)


def hitting_time(traj: Trajectory) -> Optional[float]:
    """First recorded time with d(y) at or below the hit band, linearly
    interpolated between the bracketing steps; None when never hit."""
    if traj.status != STATUS_HIT:
        return None
    return traj.hit_time


def occupational_fraction(traj: Trajectory, ell: ScalarField, delta: float,
                          t: float) -> OccupationalStats:
    """Fraction of [0, t] the path spends where ell > delta (step counting).

    For trajectories that hit the target, times past the recorded end count
    as inside the quasi-minimizer set (the path parks on the target); for
    any other trajectory ``t`` must not exceed the recorded horizon.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    t_end = float(traj.times[-1])
    if t > t_end + 1e-12 and traj.hit_time is None:
        raise ValueError(f"t = {t} beyond the recorded horizon {t_end}")
    outside = 0.0
    for k in range(len(traj.times) - 1):
        seg = min(float(traj.times[k + 1]), t) - min(float(traj.times[k]), t)
        if seg <= 0:
            break
        if traj.ell_values[k] > delta:
            outside += seg
    fraction = outside / t
    ell_bar = float(ell.values.max())
    bound = ell_bar * float(traj.d_values[0]) / (t * delta)
    return OccupationalStats(delta=delta, horizon=t,
                             fraction=min(fraction, 1.0), bound=bound)


def descend_batch(v: ScalarField, ell: ScalarField, mask: TargetMask,
                  starts: Sequence, cfg: DescentConfig,
                  jobs: int = 1) -> list[Trajectory]:
    """Integrate independent descents from several starts (deterministic
    output order; ``jobs > 1`` runs them in a process pool)."""
    starts = [np.atleast_1d(np.asarray(s, dtype=float)) for s in starts]
    if jobs > 1 and len(starts) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(integrate_descent, v, ell, mask, s, cfg)
                       for s in starts]
            return [f.result() for f in futures]
    return [integrate_descent(v, ell, mask, s, cfg) for s in starts]


def seeded_starts(grid: GridSpec, count: int, seed: int) -> np.ndarray:
    """Reproducible uniform start points over the grid box."""
    lo, hi = grid.box
    rng = np.random.default_rng(seed)
    return lo + (hi - lo) * rng.random((count, grid.dim))


def batch_summary(trajectories: Sequence[Trajectory], ell: ScalarField,
                  deltas: Sequence[float] = ()) -> dict:
    """Hit rate, hitting-time statistics and occupational-fraction tables."""
    hits = [tr.hit_time for tr in trajectories if tr.hit_time is not None]
    statuses = {}
    for tr in trajectories:
        statuses[tr.status] = statuses.get(tr.status, 0) + 1
    summary = {
        "runs": len(trajectories),
        "hit_count": len(hits),
        "hit_rate": len(hits) / len(trajectories) if trajectories else 0.0,
        "statuses": dict(sorted(statuses.items())),
        "final_distances": [float(tr.d_values[-1]) for tr in trajectories],
    }
    if hits:
        summary["hitting_times"] = {
            "min": min(hits), "max": max(hits),
            "mean": float(np.mean(hits)),
        }
    rho_tables = {}
    for delta in deltas:
        rows = []
        for k, tr in enumerate(trajectories):
            t_end = float(tr.times[-1])
            if t_end <= 0:
                continue
            stats = occupational_fraction(tr, ell, delta, t_end)
            rows.append({"run": k, "t": t_end, "fraction": stats.fraction,
                         "bound": stats.bound})
        rho_tables[repr(float(delta))] = rows
    if rho_tables:
        summary["rho_tables"] = rho_tables
    return summary
