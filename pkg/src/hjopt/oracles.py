"""Independent references used to validate the solvers.

The graph oracle restricts controls to grid-edge paths, so its value bounds
the continuum one from above up to stencil anisotropy; the radial oracle
integrates the one-dimensional profile by adaptive quadrature; the brute
force minimum is the plain grid scan.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .fields import ScalarField, TargetMask


@dataclass(frozen=True)
class GraphOracleConfig:
    """Neighbour stencil ("axis" or "axis+diagonal") with trapezoid edge
    costs: cost(u, w) = (ell(u) + ell(w)) / 2 * |u - w|."""

    neighbor_stencil: str = "axis+diagonal"
    edge_cost_rule: str = "trapezoid"

    def __post_init__(self):
        if self.neighbor_stencil not in ("axis", "axis+diagonal"):
            raise ValueError(
                f"unknown stencil {self.neighbor_stencil!r}")
        if self.edge_cost_rule != "trapezoid":
            raise ValueError("only trapezoid edge costs are supported")


def _stencil_offsets(dim: int, stencil: str) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(1,)]
    offsets = [(1, 0), (0, 1)]
    if stencil == "axis+diagonal":
        offsets += [(1, 1), (1, -1)]
    return offsets


def dijkstra_value(ell: ScalarField, mask: TargetMask,
                   cfg: GraphOracleConfig = GraphOracleConfig()
                   ) -> ScalarField:
    """Exact shortest-path cost to the target on the chosen grid graph."""
    if ell.grid != mask.grid:
        raise ValueError("ell and mask live on different grids")
    if float(ell.values.min()) < 0:
        raise ValueError("ell must be nonnegative")
    grid = ell.grid
    h = grid.spacing
    lv = ell.values
    counts = grid.counts
    idx = np.arange(grid.n_nodes).reshape(counts)

    rows, cols, weights = [], [], []
    for off in _stencil_offsets(grid.dim, cfg.neighbor_stencil):
        if grid.dim == 1:
            src = idx[:-1]
            dst = idx[1:]
            cost = 0.5 * (lv[:-1] + lv[1:]) * h
        else:
            di, dj = off
            nx, ny = counts
            i0 = np.arange(max(0, -di), nx - max(0, di))
            j0 = np.arange(max(0, -dj), ny - max(0, dj))
            ii, jj = np.meshgrid(i0, j0, indexing="ij")
            src = idx[ii, jj]
            dst = idx[ii + di, jj + dj]
            cost = (0.5 * (lv[ii, jj] + lv[ii + di, jj + dj])
                    * h * float(np.hypot(di, dj)))
        rows.append(src.ravel())
        cols.append(dst.ravel())
        weights.append(cost.ravel())
    graph = coo_matrix(
        (np.concatenate(weights),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_nodes, grid.n_nodes))
    sources = np.flatnonzero(mask.flags.ravel())
    dist = _csgraph_dijkstra(graph.tocsr(), directed=False, indices=sources,
                             min_only=True)
    return ScalarField(grid, dist.reshape(counts))


def exact_v_radial(gamma_tilde: Callable[[float], float], d: float,
                   r: Optional[float] = None) -> float:
    """Integral of the radial cost profile from 0 to d, absolute
    tolerance 1e-10."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if r is not None and d > r:
        raise ValueError(f"d = {d} outside the radial profile's range {r}")
    g0 = float(gamma_tilde(0.0))
    if abs(g0) > 1e-9:
        raise ValueError(f"gamma_tilde(0) = {g0}, expected 0")
    if d == 0:
        return 0.0
    val, _ = integrate.quad(gamma_tilde, 0.0, d, epsabs=1e-10, epsrel=1e-12,
                            limit=200)
    return float(val)


def brute_force_min(f: ScalarField) -> tuple[float, np.ndarray]:
    """Exact grid minimum of f and the coordinates of every attaining node."""
    vmin = float(f.values.min())
    nodes = np.argwhere(f.values == vmin)
    coords = np.asarray(f.grid.origin) + f.grid.spacing * nodes
    return vmin, coords


def write_fixture(path, descriptor: dict, output, config: dict,
                  tolerance: float) -> None:
    """Persist an oracle run: {input descriptor, oracle output, config,
    tolerance}."""
    record = {"descriptor": descriptor, "output": np.asarray(output).tolist(),
              "config": config, "tolerance": tolerance}
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_fixture(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
