"""Runnable checks, one per quantitative bound the solvers must honour.

Every check is a pure function returning a :class:`CheckReport`; ``margin``
is the worst signed slack (positive = satisfied) and ``passed`` is
``margin >= -tolerance``.  The bounds are continuum statements, so each
check folds an explicit O(h) discretization slack into its default
tolerance via the per-check kappa constants below.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .descent import Trajectory, _upwind_gradient, occupational_fraction
from .fields import (ScalarField, TargetMask, distance_to_mask,
                     interpolate_many)

# Discretization slack factors: tolerance = kappa * h * scale per check.
KAPPA_GRADIENT = 4.0        # central differences at kinks
KAPPA_SEMICONCAVITY = 30.0  # second differences of first-order solutions
KAPPA_V_UPPER = 2.0         # upwind overshoot of the sweeping solution
KAPPA_RHO_EXCURSION = 4.0   # step counting quantizes time by the step size


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    margin: float
    worst_location: Optional[tuple[float, ...]]
    tolerance: float
    details: str = ""

    def to_dict(self) -> dict:
        loc = None if self.worst_location is None else list(self.worst_location)
        return {"name": self.name, "passed": bool(self.passed),
                "margin": float(self.margin), "worst_location": loc,
                "tolerance": float(self.tolerance), "details": self.details}


def _report(name, margin, tolerance, worst=None, details="") -> CheckReport:
    margin = float(margin)
    return CheckReport(name=name, passed=bool(margin >= -tolerance),
                       margin=margin,
                       worst_location=None if worst is None else tuple(worst),
                       tolerance=float(tolerance), details=details)


def _node_coord(grid, flat_index: int) -> tuple[float, ...]:
    idx = np.unravel_index(int(flat_index), grid.counts)
    return tuple(float(o + grid.spacing * i)
                 for o, i in zip(grid.origin, idx))


def gradient_magnitude(field: ScalarField) -> np.ndarray:
    """|grad| by central differences inside, one-sided at the boundary."""
    h = field.grid.spacing
    if field.grid.dim == 1:
        return np.abs(np.gradient(field.values, h))
    gx, gy = np.gradient(field.values, h)
    return np.hypot(gx, gy)


def _second_difference_directions(dim: int):
    if dim == 1:
        return [((1,), 1.0)]
    return [((1, 0), 1.0), ((0, 1), 1.0), ((1, 1), 2.0), ((1, -1), 2.0)]


def max_second_difference(field: ScalarField,
                          exclude: Optional[TargetMask] = None):
    """Largest centered second difference over the grid directions.

    Returns (value, flat node index).  Nodes flagged in ``exclude`` are
    skipped: at pinned target nodes the first-order schemes carry an O(1)
    corner bias that is a grid artifact, not a curvature of the solution.
    """
    vals = field.values
    h2 = field.grid.spacing ** 2
    best = -np.inf
    best_idx = 0
    skip = exclude.flags if exclude is not None else None
    for off, norm2 in _second_difference_directions(field.grid.dim):
        if field.grid.dim == 1:
            core = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / (h2 * norm2)
            flat_centers = np.arange(1, vals.shape[0] - 1)
            ok = np.ones_like(core, dtype=bool) if skip is None \
                else ~skip[1:-1]
        else:
            di, dj = off
            nx, ny = vals.shape
            # center nodes must have both stencil neighbours in range
            ii = np.arange(abs(di), nx - abs(di)) if di else np.arange(nx)
            jj = np.arange(abs(dj), ny - abs(dj)) if dj else np.arange(ny)
            ci, cj = np.meshgrid(ii, jj, indexing="ij")
            core = ((vals[ci + di, cj + dj] - 2 * vals[ci, cj]
                     + vals[ci - di, cj - dj]) / (h2 * norm2)).ravel()
            ok = np.ones_like(core, dtype=bool) if skip is None \
                else ~skip[ci, cj].ravel()
            flat_centers = np.ravel_multi_index((ci.ravel(), cj.ravel()),
                                                vals.shape)
        if not ok.any():
            continue
        masked = np.where(ok, core.ravel(), -np.inf)
        k = int(np.argmax(masked))
        if masked[k] > best:
            best = float(masked[k])
            best_idx = int(flat_centers[k])
    return best, best_idx


def check_value_bounds(f: ScalarField, u_lambda: ScalarField, lam: float,
                       tolerance: float = 1e-6) -> CheckReport:
    """min f <= lam * u_lambda <= max f, nodewise."""
    if f.grid != u_lambda.grid:
        raise ValueError("f and u_lambda live on different grids")
    fmin, fmax = float(f.values.min()), float(f.values.max())
    scaled = lam * u_lambda.values
    low_slack = scaled - fmin
    high_slack = fmax - scaled
    slack = np.minimum(low_slack, high_slack)
    k = int(np.argmin(slack))
    return _report(
        "value_bounds", slack.ravel()[k], tolerance,
        worst=_node_coord(f.grid, k),
        details=f"min f = {fmin:.6g}, max f = {fmax:.6g}, lam = {lam}")


def check_gradient_bound(field: ScalarField, f: ScalarField,
                         tolerance: Optional[float] = None) -> CheckReport:
    """|grad field| <= sqrt(4 ||f||_inf) up to discretization slack."""
    bound = float(np.sqrt(4.0 * np.max(np.abs(f.values))))
    if tolerance is None:
        tolerance = KAPPA_GRADIENT * field.grid.spacing * max(1.0, bound)
    mag = gradient_magnitude(field)
    slack = bound - mag
    k = int(np.argmin(slack))
    return _report(
        "gradient_bound", slack.ravel()[k], tolerance,
        worst=_node_coord(field.grid, k),
        details=f"bound sqrt(4||f||) = {bound:.6g}, "
                f"max |grad| = {float(mag.max()):.6g}")


def check_semiconcavity(field: ScalarField, c1: float, c2: float,
                        tolerance: Optional[float] = None,
                        exclude: Optional[TargetMask] = None) -> CheckReport:
    """Directional second differences <= sqrt(2 (C1 + C2) + 1).

    The constant is the stationary one; it dominates the evolutive
    constant sqrt(C1 + C2), so one check covers both fields.
    """
    bound = float(np.sqrt(2.0 * (c1 + c2) + 1.0))
    if tolerance is None:
        tolerance = KAPPA_SEMICONCAVITY * field.grid.spacing
    worst, k = max_second_difference(field, exclude=exclude)
    return _report(
        "semiconcavity", bound - worst, tolerance,
        worst=_node_coord(field.grid, k),
        details=f"bound = {bound:.6g}, max D2 = {worst:.6g}")


def check_v_upper_bound(v: ScalarField, ell: ScalarField, mask: TargetMask,
                        tolerance: Optional[float] = None) -> CheckReport:
    """v(x) <= max(ell) * dist(x, target) up to discretization slack."""
    ell_bar = float(ell.values.max())
    if tolerance is None:
        tolerance = KAPPA_V_UPPER * v.grid.spacing * max(1.0, ell_bar)
    d = distance_to_mask(mask)
    slack = ell_bar * d.values - v.values
    k = int(np.argmin(slack))
    return _report(
        "v_upper_bound", slack.ravel()[k], tolerance,
        worst=_node_coord(v.grid, k),
        details=f"max ell = {ell_bar:.6g}")


def check_rho_bound(stats, tolerance: float = 1e-3) -> CheckReport:
    """Occupational fraction <= max(ell) * d(start) / (t * delta)."""
    return _report(
        "rho_bound", stats.bound - stats.fraction, tolerance,
        details=f"delta = {stats.delta}, t = {stats.horizon}, "
                f"fraction = {stats.fraction:.6g}, bound = {stats.bound:.6g}")


def check_rho_lower_bound_excursion(traj: Trajectory, ell: ScalarField,
                                    mask: TargetMask, delta: float,
                                    tolerance: Optional[float] = None
                                    ) -> CheckReport:
    """After an excursion past distance delta at time tau, the fraction of
    time above the measured floor gamma(delta/2) obeys
    t * rho(t) >= delta for all recorded t > tau + delta/2."""
    if tolerance is None:
        dt = float(np.median(np.diff(traj.times))) if len(traj.times) > 1 \
            else ell.grid.spacing
        tolerance = KAPPA_RHO_EXCURSION * (ell.grid.spacing + dt)
    exc = np.flatnonzero(traj.d_values > delta)
    if exc.size == 0:
        return _report("rho_lower_bound_excursion", np.inf, tolerance,
                       details="no excursion beyond delta; vacuous")
    tau = float(traj.times[exc[0]])
    d = distance_to_mask(mask)
    far = d.values > delta / 2.0
    if not far.any():
        return _report("rho_lower_bound_excursion", np.inf, tolerance,
                       details="no grid nodes beyond delta/2; vacuous")
    gamma = float(ell.values[far].min())
    lip = float(gradient_magnitude(ell).max())
    gamma_eff = gamma - 2.0 * ell.grid.spacing * lip
    if gamma_eff <= 0:
        return _report("rho_lower_bound_excursion", np.inf, tolerance,
                       details=f"measured gamma({delta/2:.3g}) = {gamma:.3g} "
                               "too small to certify; vacuous")
    qual = np.flatnonzero(traj.times > tau + delta / 2.0)
    if qual.size == 0:
        return _report("rho_lower_bound_excursion", np.inf, tolerance,
                       details="no recorded times past tau + delta/2; vacuous")
    worst = np.inf
    worst_t = None
    for k in qual:
        t = float(traj.times[k])
        rho = occupational_fraction(traj, ell, gamma_eff, t).fraction
        slack = t * rho - delta
        if slack < worst:
            worst = slack
            worst_t = t
    return _report(
        "rho_lower_bound_excursion", worst, tolerance,
        details=f"tau = {tau:.6g}, gamma({delta/2:.3g}) = {gamma:.6g} "
                f"(deflated {gamma_eff:.6g}), worst t = {worst_t}")


def check_assumption_H(ell: ScalarField, mask: TargetMask,
                       delta_list: Sequence[float],
                       floor: float = 1e-6) -> CheckReport:
    """Measure gamma(delta) = inf{ell : dist > delta}; fail when any
    measured infimum drops below the configured floor."""
    d = distance_to_mask(mask)
    rows = []
    margin = np.inf
    worst = None
    for delta in delta_list:
        far = d.values > delta
        if not far.any():
            rows.append(f"gamma({delta:g}) vacuous (no nodes)")
            continue
        gamma = float(ell.values[far].min())
        rows.append(f"gamma({delta:g}) = {gamma:.6g}")
        if gamma - floor < margin:
            margin = gamma - floor
            flat = np.flatnonzero(far.ravel()
                                  & (ell.values.ravel() == gamma))
            if flat.size:
                worst = _node_coord(ell.grid, int(flat[0]))
    return _report("assumption_H", margin, 0.0, worst=worst,
                   details="; ".join(rows) + f"; floor = {floor:g}")


def check_hitting_time_radial(traj: Trajectory,
                              gamma_tilde: Callable[[float], float],
                              d_x0: float, r: float,
                              rel_tolerance: float = 0.05) -> CheckReport:
    """For radial running costs the hitting time equals the starting
    distance; verified to a relative tolerance."""
    if d_x0 > r:
        raise ValueError(f"d_x0 = {d_x0} outside the radial range {r}")
    if abs(float(gamma_tilde(0.0))) > 1e-9:
        raise ValueError("gamma_tilde(0) must vanish")
    if d_x0 == 0:
        ok = traj.hit_time is not None and traj.hit_time == 0.0
        return _report("hitting_time_radial", 0.0 if ok else -1.0, 0.0,
                       details="start on target; expect hit_time = 0")
    if traj.hit_time is None:
        return _report("hitting_time_radial", -1.0, 0.0,
                       details=f"no hit recorded (status {traj.status})")
    rel_err = abs(traj.hit_time - d_x0) / d_x0
    return _report(
        "hitting_time_radial", rel_tolerance - rel_err, 0.0,
        details=f"measured {traj.hit_time:.6g} vs d(x0) = {d_x0:.6g} "
                f"(rel err {rel_err:.3%})")


def check_lojasiewicz_hitting(traj: Trajectory, v: ScalarField, c: float,
                              beta: float, d_x0: float,
                              tolerance: float = 1e-9) -> CheckReport:
    """With ell >= c d^beta near the target (beta < 3/2) the hit happens by
    v(x0)^(1-rho) / (C4 (1-rho)), rho = 2 beta / 3, with C4 measured as the
    path minimum of |grad v| / v^rho."""
    if not beta < 1.5:
        raise ValueError(f"beta must be below 3/2, got {beta}")
    rho = 2.0 * beta / 3.0
    if d_x0 == 0:
        return _report("lojasiewicz_hitting", np.inf, tolerance,
                       details="start on target; vacuous")
    if traj.hit_time is None:
        return _report("lojasiewicz_hitting", -1.0, tolerance,
                       details=f"no hit recorded (status {traj.status})")
    grid = v.grid
    c4 = np.inf
    v_path = interpolate_many(v, traj.points)
    v0 = float(v_path[0])
    floor = 1e-10 * max(1.0, v0)
    for k in range(len(traj.times)):
        vk = float(v_path[k])
        if vk <= floor:
            continue
        p = _upwind_gradient(v.values, grid.nearest_index(traj.points[k]),
                             grid.spacing)
        ratio = float(np.linalg.norm(p)) / vk ** rho
        if ratio < c4:
            c4 = ratio
    if not np.isfinite(c4) or c4 <= 0:
        return _report("lojasiewicz_hitting", -1.0, tolerance,
                       details="could not measure a positive C4")
    bound = v0 ** (1.0 - rho) / (c4 * (1.0 - rho))
    return _report(
        "lojasiewicz_hitting", bound - traj.hit_time, tolerance,
        details=f"beta = {beta}, rho = {rho:.4g}, C4 = {c4:.6g}, "
                f"bound = {bound:.6g}, hit = {traj.hit_time:.6g}, c = {c}")
