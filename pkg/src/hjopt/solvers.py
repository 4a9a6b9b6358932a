"""The three routes to the critical value and critical solution.

* ``solve_discounted``: semi-Lagrangian value iteration for the discounted
  equation ``lam*u + |Du|^2/2 = f``; ``lam*u -> min f`` as ``lam -> 0``.
* ``solve_evolutive``: explicit Godunov marching for
  ``u_t + |Du|^2/2 = f`` from ``u(.,0) = 0``; ``u/t -> min f``.
* ``solve_eikonal_dirichlet``: Gauss-Seidel fast sweeping for
  ``|grad v| = ell`` with ``v = 0`` on the target.

All solves are serial and deterministic.  The computational box truncates
the unbounded problem; boundaries are treated as outflow (one-sided
differences, semi-Lagrangian foot points clamped), which is the dominant
error source near the box edge.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, ConvergenceError
from .fields import GridSpec, ScalarField, TargetMask, build_target_mask

DEFAULT_FIXPOINT_TOL = 1e-8
DEFAULT_SWEEP_TOL = 1e-10


def gradient_cap(f: ScalarField) -> float:
    """A priori bound on solution gradients, sqrt(4 ||f||_inf)."""
    return float(np.sqrt(4.0 * np.max(np.abs(f.values))))


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscountedSolveConfig:
    """Parameters of the semi-Lagrangian discounted solve.

    ``control_magnitude_cap`` must dominate sqrt(4 ||f||_inf): solution
    gradients never exceed that, so capped controls lose nothing.
    """

    lam: float
    pseudo_time_step: float
    control_magnitude_cap: float
    direction_count: int = 16
    magnitude_count: int = 33
    tol: float = DEFAULT_FIXPOINT_TOL
    max_iters: int = 200_000

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"lam must be positive, got {self.lam}")
        if not self.pseudo_time_step > 0:
            raise ConfigError("pseudo_time_step must be positive")
        if not self.lam * self.pseudo_time_step < 1:
            raise ConfigError(
                f"need lam * pseudo_time_step < 1, got "
                f"{self.lam * self.pseudo_time_step}")
        if not self.control_magnitude_cap > 0:
            raise ConfigError("control_magnitude_cap must be positive")
        if self.direction_count < 1 or self.magnitude_count < 2:
            raise ConfigError("need >= 1 direction and >= 2 magnitudes")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")

    @classmethod
    def for_field(cls, f: ScalarField, lam: float,
                  **overrides) -> "DiscountedSolveConfig":
        cap = 1.25 * gradient_cap(f)
        defaults = dict(lam=lam, control_magnitude_cap=max(cap, 1e-6),
                        pseudo_time_step=0.5 * np.sqrt(f.grid.spacing))
        defaults.update(overrides)
        return cls(**defaults)


@dataclass(frozen=True)
class EvolutiveSolveConfig:
    """Explicit marching parameters; dt must satisfy the CFL bound
    dt <= cfl * h / max(1, A) where A caps the solution gradient."""

    dt: float
    t_final: float
    cfl: float = 0.9
    record_times: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if not (0 < self.cfl <= 1):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        times = tuple(float(t) for t in self.record_times) or (self.t_final,)
        object.__setattr__(self, "record_times", times)
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigError("record_times must be strictly ascending")
        if times[0] < 0 or times[-1] > self.t_final + 1e-12:
            raise ConfigError("record_times must lie in [0, t_final]")

    @classmethod
    def for_field(cls, f: ScalarField, t_final: float,
                  record_times: Sequence[float] = (),
                  cfl: float = 0.9) -> "EvolutiveSolveConfig":
        a = max(1.0, gradient_cap(f))
        dt = cfl * f.grid.spacing / (f.grid.dim * a)
        return cls(dt=dt, t_final=t_final, cfl=cfl,
                   record_times=tuple(record_times))


@dataclass(frozen=True)
class EikonalSolveConfig:
    sweep_tol: float = DEFAULT_SWEEP_TOL
    max_sweeps: int = 10_000

    def __post_init__(self):
        if not self.sweep_tol > 0:
            raise ConfigError("sweep_tol must be positive")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be >= 1")


@dataclass(frozen=True)
class CriticalSolution:
    """Estimated critical value plus the nonnegative critical solution."""

    c_hat: float
    v: ScalarField
    method: str
    residual: float
    tol: float = 1e-6

    def __post_init__(self):
        if self.method not in ("discounted", "evolutive", "eikonal"):
            raise ValueError(f"unknown method tag {self.method!r}")

    def validate(self, f: ScalarField, mask: TargetMask) -> None:
        if float(self.v.values.min()) < -self.tol:
            raise ValueError("critical solution dips below zero")
        on_mask = np.abs(self.v.values[mask.flags])
        if on_mask.size and float(on_mask.max()) > self.tol:
            raise ValueError("critical solution does not vanish on the target")
        fmin, fmax = float(f.values.min()), float(f.values.max())
        if not (fmin - self.tol <= self.c_hat <= fmax + self.tol):
            raise ValueError(
                f"critical value {self.c_hat} outside [{fmin}, {fmax}]")


# ---------------------------------------------------------------------------
# Discounted route
# ---------------------------------------------------------------------------

def _control_set(grid_dim: int, cfg: DiscountedSolveConfig):
    """Displacement and running-cost arrays for the discretized controls."""
    mags = np.linspace(0.0, cfg.control_magnitude_cap, cfg.magnitude_count)
    if grid_dim == 1:
        dirs = np.array([[-1.0], [1.0]])
    else:
        ang = 2.0 * np.pi * np.arange(cfg.direction_count) / cfg.direction_count
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    disp = (mags[:, None, None] * dirs[None, :, :]).reshape(-1, grid_dim)
    speed = np.repeat(mags, len(dirs))
    cost = cfg.pseudo_time_step * 0.5 * speed ** 2
    return cfg.pseudo_time_step * disp, cost


def _solve_discounted_raw(f: ScalarField, cfg: DiscountedSolveConfig):
    cap_needed = gradient_cap(f)
    if cfg.control_magnitude_cap < cap_needed * (1 - 1e-12):
        raise ConfigError(
            f"control_magnitude_cap {cfg.control_magnitude_cap:.6g} below "
            f"gradient bound sqrt(4||f||) = {cap_needed:.6g}")
    grid = f.grid
    disp, cost = _control_set(grid.dim, cfg)
    u = np.ascontiguousarray(f.values / cfg.lam)
    fv = np.ascontiguousarray(f.values)
    if grid.dim == 1:
        residual, rounds = _kernels.bellman_1d(
            u, fv, grid.origin[0], grid.spacing, cfg.lam,
            cfg.pseudo_time_step, np.ascontiguousarray(disp[:, 0]),
            np.ascontiguousarray(cost), cfg.tol, cfg.max_iters)
    else:
        residual, rounds = _kernels.bellman_2d(
            u, fv, grid.origin[0], grid.origin[1], grid.spacing, cfg.lam,
            cfg.pseudo_time_step, np.ascontiguousarray(disp[:, 0]),
            np.ascontiguousarray(disp[:, 1]), np.ascontiguousarray(cost),
            cfg.tol, cfg.max_iters)
    if residual > cfg.tol:
        raise ConvergenceError(
            f"discounted solve did not reach tol {cfg.tol:.1e} in "
            f"{cfg.max_iters} rounds (residual {residual:.3e})", residual)
    lo = float(f.values.min()) / cfg.lam - cfg.tol
    hi = float(f.values.max()) / cfg.lam + cfg.tol
    slack = 10.0 * cfg.tol * max(1.0, 1.0 / cfg.lam)
    if u.min() < lo - slack or u.max() > hi + slack:
        raise ConvergenceError(
            "discounted solve violated the a priori value bounds", residual)
    return u, float(residual), int(rounds)


def solve_discounted(f: ScalarField, cfg: DiscountedSolveConfig) -> ScalarField:
    """Fixed point of the semi-Lagrangian Bellman update for
    ``lam*u + |Du|^2/2 = f`` on the grid box."""
    u, _, _ = _solve_discounted_raw(f, cfg)
    return ScalarField(f.grid, u)


# ---------------------------------------------------------------------------
# Evolutive route
# ---------------------------------------------------------------------------

def _godunov_hamiltonian(u: np.ndarray, h: float, dim: int) -> np.ndarray:
    """Godunov numerical Hamiltonian for |Du|^2/2 with outflow boundaries.

    Per axis the upwind slope is max(max(D-, 0), -min(D+, 0)); missing
    one-sided differences at the boundary drop out (ghost copy).
    """
    total = np.zeros_like(u)
    for axis in range(dim):
        du = np.diff(u, axis=axis) / h
        pad = [(0, 0)] * dim
        pad[axis] = (1, 0)
        back = np.pad(du, pad)          # D- with ghost copy at low edge
        pad[axis] = (0, 1)
        fwd = np.pad(du, pad)           # D+ with ghost copy at high edge
        up = np.maximum(np.maximum(back, 0.0), -np.minimum(fwd, 0.0))
        total += up ** 2
    return 0.5 * total


def _solve_evolutive_raw(f: ScalarField, cfg: EvolutiveSolveConfig):
    grid = f.grid
    a = max(1.0, gradient_cap(f))
    if cfg.dt > cfg.cfl * grid.spacing / a + 1e-15:
        raise ConfigError(
            f"dt {cfg.dt:.3e} violates CFL bound "
            f"{cfg.cfl * grid.spacing / a:.3e}")
    fv = f.values
    fmax = float(np.max(np.abs(fv)))
    u = np.zeros(grid.counts)
    snapshots = []
    t = 0.0
    blowup = 2.0 * fmax * (cfg.t_final + 1.0) + 10.0
    for t_rec in cfg.record_times:
        while t < t_rec - 1e-12:
            step = min(cfg.dt, t_rec - t)
            u = u + step * (fv - _godunov_hamiltonian(u, grid.spacing,
                                                      grid.dim))
            t += step
            if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > blowup:
                raise ConvergenceError(
                    f"evolutive solve blew past the a priori bound at "
                    f"t = {t:.4g}; check the CFL condition", float("nan"))
        snapshots.append((t_rec, ScalarField(grid, u.copy())))
    return snapshots


def solve_evolutive(f: ScalarField,
                    cfg: EvolutiveSolveConfig) -> list[tuple[float, ScalarField]]:
    """March ``u_t + |Du|^2/2 = f`` from zero data; snapshot at the
    requested times."""
    return _solve_evolutive_raw(f, cfg)


# ---------------------------------------------------------------------------
# Eikonal route
# ---------------------------------------------------------------------------

def _solve_eikonal_raw(ell: ScalarField, mask: TargetMask,
                       cfg: EikonalSolveConfig):
    if ell.grid != mask.grid:
        raise ValueError("ell and mask live on different grids")
    if float(ell.values.min()) < 0:
        k = np.unravel_index(int(np.argmin(ell.values)), ell.grid.counts)
        raise ValueError(f"ell must be nonnegative; ell{k} = "
                         f"{float(ell.values.min()):.3e}")
    grid = ell.grid
    v = np.full(grid.counts, _kernels.INF)
    v[mask.flags] = 0.0
    frozen = np.ascontiguousarray(mask.flags)
    lv = np.ascontiguousarray(ell.values)
    if grid.dim == 1:
        residual, rounds = _kernels.fsm_1d(v, lv, grid.spacing, frozen,
                                           cfg.sweep_tol, cfg.max_sweeps)
    else:
        residual, rounds = _kernels.fsm_2d(v, lv, grid.spacing, frozen,
                                           cfg.sweep_tol, cfg.max_sweeps)
    if residual > cfg.sweep_tol:
        raise ConvergenceError(
            f"fast sweeping stalled at residual {residual:.3e} after "
            f"{rounds} rounds", residual)
    return v, float(residual), int(rounds)


def solve_eikonal_dirichlet(ell: ScalarField, mask: TargetMask,
                            cfg: EikonalSolveConfig = EikonalSolveConfig()
                            ) -> ScalarField:
    """Godunov upwind fast sweeping for ``|grad v| = ell`` with ``v = 0``
    on the masked nodes.  ``ell`` values on masked nodes are ignored."""
    v, _, _ = _solve_eikonal_raw(ell, mask, cfg)
    return ScalarField(ell.grid, v)


# ---------------------------------------------------------------------------
# Critical value estimation and the running cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalValueEstimate:
    """Final estimate plus the whole sequence for convergence inspection."""

    c_hat: float
    estimates: tuple[float, ...]
    route: str
    monotone_warning: bool


def estimate_critical_value(f: ScalarField, route: str,
                            sequence: Sequence[float],
                            config=None) -> CriticalValueEstimate:
    """Estimate min f via the small-discount or the long-time route.

    ``sequence`` is a strictly decreasing lambda list (route "discounted")
    or a strictly increasing time list (route "evolutive"); the final term
    supplies the estimate ``min over grid`` of lam*u_lam resp. u(., t)/t.
    """
    seq = [float(s) for s in sequence]
    if len(seq) < 2:
        raise ValueError("need a sequence of length >= 2")
    if route == "discounted":
        if any(b >= a for a, b in zip(seq, seq[1:])):
            raise ValueError("lambda sequence must be strictly decreasing")
        estimates = []
        for lam in seq:
            cfg = (replace(config, lam=lam) if config is not None
                   else DiscountedSolveConfig.for_field(f, lam))
            u = solve_discounted(f, cfg)
            estimates.append(lam * float(u.values.min()))
    elif route == "evolutive":
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError("time sequence must be strictly increasing")
        cfg = (config if config is not None
               else EvolutiveSolveConfig.for_field(f, seq[-1],
                                                   record_times=seq))
        if list(cfg.record_times) != seq:
            cfg = replace(cfg, t_final=max(cfg.t_final, seq[-1]),
                          record_times=tuple(seq))
        snaps = solve_evolutive(f, cfg)
        estimates = [float(u.values.min()) / t for t, u in snaps]
    else:
        raise ValueError(f"unknown route {route!r}")

    scale = 1e-9 * (1.0 + float(np.max(np.abs(f.values))))
    warning = any(b > a + scale for a, b in zip(estimates, estimates[1:]))
    c_hat = estimates[-1]
    fmin, fmax = float(f.values.min()), float(f.values.max())
    tol_post = 1e-6 * (1.0 + abs(fmin))
    if not (fmin - tol_post <= c_hat <= fmax + tol_post):
        raise ConvergenceError(
            f"critical value estimate {c_hat} escaped [min f, max f]",
            c_hat - fmin)
    return CriticalValueEstimate(c_hat=c_hat, estimates=tuple(estimates),
                                 route=route, monotone_warning=warning)


def build_ell(f: ScalarField, c_hat: float,
              overshoot_tol: float = 1e-6) -> ScalarField:
    """Running cost ell = sqrt(2 (f - c_hat)_+).

    The interior clamp keeps ell real when the estimated critical value
    overshoots the grid minimum by a hair; overshoots beyond
    ``overshoot_tol`` are rejected.
    """
    fmin = float(f.values.min())
    if c_hat > fmin + overshoot_tol:
        raise ValueError(
            f"c_hat {c_hat} exceeds grid min f {fmin} by more than "
            f"{overshoot_tol}")
    return ScalarField(f.grid,
                       np.sqrt(2.0 * np.clip(f.values - c_hat, 0.0, None)))


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------

def default_eps_target(f: ScalarField, c_hat: float) -> float:
    """Sublevel tolerance guaranteeing a nonempty target mask."""
    gap = float(f.values.min()) - c_hat
    return max(1e-8 * (1.0 + abs(c_hat)), 1.5 * max(gap, 0.0))


def critical_solution(f: ScalarField, method: str, *,
                      lambdas: Sequence[float] = (0.2, 0.1, 0.05),
                      times: Sequence[float] = (5.0, 10.0, 20.0),
                      c_hat: Optional[float] = None,
                      eps_target: Optional[float] = None,
                      config=None,
                      validate: bool = True,
                      ) -> tuple[CriticalSolution, TargetMask]:
    """Run one route end to end: estimate c_hat, shift/build the critical
    solution, and build the target mask.  For the eikonal route ``c_hat``
    defaults to the grid minimum of f (the grid oracle)."""
    if method == "discounted":
        est = estimate_critical_value(f, "discounted", lambdas, config)
        lam = float(lambdas[-1])
        cfg = (replace(config, lam=lam) if config is not None
               else DiscountedSolveConfig.for_field(f, lam))
        u, residual, _ = _solve_discounted_raw(f, cfg)
        v = u - est.c_hat / lam
        c = est.c_hat
        tol = max(1e-6, 10 * cfg.tol / lam)
    elif method == "evolutive":
        est = estimate_critical_value(f, "evolutive", times, config)
        t_last = float(times[-1])
        cfg = (config if config is not None
               else EvolutiveSolveConfig.for_field(f, t_last,
                                                   record_times=times))
        # one extra snapshot a step past the end measures steadiness
        cfg = replace(cfg, t_final=t_last + cfg.dt,
                      record_times=tuple(times) + (t_last + cfg.dt,))
        snaps = solve_evolutive(f, cfg)
        (_, u_extra), (t_last, u_last) = snaps[-1], snaps[-2]
        v = u_last.values - est.c_hat * t_last
        c = est.c_hat
        residual = float(np.max(np.abs(
            (u_extra.values - u_last.values) / cfg.dt - c)))
        tol = max(1e-6, 1e-4 * t_last)
    elif method == "eikonal":
        c = float(f.values.min()) if c_hat is None else float(c_hat)
        ell = build_ell(f, c)
        eps = default_eps_target(f, c) if eps_target is None else eps_target
        mask = build_target_mask(f, c, eps)
        cfg = config if config is not None else EikonalSolveConfig()
        v, residual, _ = _solve_eikonal_raw(ell, mask, cfg)
        sol = CriticalSolution(c_hat=c, v=ScalarField(f.grid, v),
                               method="eikonal", residual=residual,
                               tol=max(1e-6, 10 * cfg.sweep_tol))
        if validate:
            sol.validate(f, mask)
        return sol, mask
    else:
        raise ValueError(f"unknown method {method!r}")

    eps = default_eps_target(f, c) if eps_target is None else eps_target
    mask = build_target_mask(f, c, eps)
    # shifted fields vanish on the target only up to the route's own
    # convergence error; widen the type tolerance accordingly
    shift_err = float(np.max(np.abs(np.asarray(v)[mask.flags])))
    sol = CriticalSolution(c_hat=c, v=ScalarField(f.grid, v), method=method,
                           residual=residual,
                           tol=max(tol, 1.01 * shift_err))
    if validate:
        sol.validate(f, mask)
    return sol, mask
