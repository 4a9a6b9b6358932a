"""Uniform Cartesian grids, sampled scalar fields, target masks and distances.

Grids are 1D or 2D with equal spacing along every axis.  Field values are
stored as numpy arrays shaped like ``grid.counts`` (C order, so the
flattened view is row-major by axis order).  Everything is immutable after
construction and safe to share across threads or processes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyTargetError

# Node budget below which the distance transform uses the exact
# nearest-flagged-node computation; larger grids fall back to unit-speed
# fast sweeping (cross-checked against the exact route in the test suite).
_EXACT_DISTANCE_NODE_LIMIT = 100_000


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian sampling of an axis-aligned box in 1 or 2 dimensions.

    ``origin`` is the corner with the smallest coordinates; node ``(i, j)``
    sits at ``origin + spacing * (i, j)``.
    """

    dim: int
    origin: tuple[float, ...]
    spacing: float
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        origin = tuple(float(c) for c in np.atleast_1d(self.origin))
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "spacing", float(self.spacing))
        if len(origin) != self.dim or len(counts) != self.dim:
            raise ValueError("origin/counts length must match dim")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if any(c < 3 for c in counts):
            raise ValueError(f"need at least 3 nodes per axis, got {counts}")

    @classmethod
    def from_box(cls, lo, hi, spacing) -> "GridSpec":
        """Grid covering ``[lo, hi]`` with the given spacing.

        Node counts are rounded so the realized box never exceeds the
        requested one; spacings that divide the box exactly are honoured.
        """
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box must satisfy lo < hi componentwise")
        counts = tuple(int(np.floor((b - a) / spacing + 1e-9)) + 1
                       for a, b in zip(lo, hi))
        return cls(dim=len(counts), origin=tuple(lo), spacing=float(spacing),
                   counts=counts)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.counts))

    @property
    def box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.origin)
        hi = lo + self.spacing * (np.asarray(self.counts) - 1)
        return lo, hi

    def axes(self) -> list[np.ndarray]:
        return [self.origin[k] + self.spacing * np.arange(self.counts[k])
                for k in range(self.dim)]

    def node_coords(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, dim), row-major order."""
        axes = self.axes()
        if self.dim == 1:
            return axes[0][:, None]
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.box
        return bool(np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12))

    def nearest_index(self, x) -> tuple[int, ...]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.rint((x - np.asarray(self.origin)) / self.spacing).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.counts) - 1)
        return tuple(int(i) for i in idx)

    def diameter(self) -> float:
        lo, hi = self.box
        return float(np.linalg.norm(hi - lo))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=arr.dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Grid plus one finite value per node (shape = ``grid.counts``)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size != self.grid.n_nodes:
            raise ValueError(
                f"values size {vals.size} != node count {self.grid.n_nodes}")
        vals = vals.reshape(self.grid.counts)
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            raise ValueError(f"non-finite field value at node index {tuple(bad)}")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, np.asarray(values, dtype=float))


@dataclass(frozen=True)
class TargetMask:
    """Boolean flags marking the grid nodes that belong to the target set."""

    grid: GridSpec
    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        if flags.size != self.grid.n_nodes:
            raise ValueError(
                f"flags size {flags.size} != node count {self.grid.n_nodes}")
        flags = flags.reshape(self.grid.counts)
        if not flags.any():
            raise ValueError("target mask must flag at least one node")
        object.__setattr__(self, "flags", _freeze(flags))

    @property
    def n_flagged(self) -> int:
        return int(self.flags.sum())

    def flagged_coords(self) -> np.ndarray:
        """Coordinates of flagged nodes, shape (n_flagged, dim)."""
        idx = np.argwhere(self.flags)
        return np.asarray(self.grid.origin) + self.grid.spacing * idx


@dataclass(frozen=True)
class ObjectiveFunction:
    """Closed-form objective with optional ground-truth metadata.

    ``evaluator`` maps a point of shape (dim,) to a float and also accepts
    batches of shape (..., dim).  ``known_argmin`` lists representative
    minimizers (not necessarily all of them); when ``known_min`` is present
    the evaluator must reproduce it there to 1e-12.  ``lipschitz_C1`` and
    ``semiconcave_C2`` are valid on ``domain`` when given.
    """

    evaluator: Callable[[np.ndarray], float]
    name: str
    dim: int
    known_min: Optional[float] = None
    known_argmin: Optional[tuple[tuple[float, ...], ...]] = None
    lipschitz_C1: Optional[float] = None
    semiconcave_C2: Optional[float] = None
    domain: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None
    description: str = ""

    def __post_init__(self):
        if self.known_argmin is not None:
            pts = tuple(tuple(float(c) for c in np.atleast_1d(p))
                        for p in self.known_argmin)
            object.__setattr__(self, "known_argmin", pts)
            if self.known_min is not None:
                for p in pts:
                    val = float(self.evaluator(np.asarray(p)))
                    if abs(val - self.known_min) > 1e-12:
                        raise ValueError(
                            f"{self.name}: evaluator({p}) = {val} != "
                            f"known_min {self.known_min}")

    def __call__(self, x) -> float:
        return float(self.evaluator(np.asarray(x, dtype=float)))


def sample(obj: ObjectiveFunction, grid: GridSpec) -> ScalarField:
    """Evaluate an objective at every grid node."""
    coords = grid.node_coords()
    try:
        vals = np.asarray(obj.evaluator(coords), dtype=float)
        if vals.shape != (grid.n_nodes,):
            raise ValueError
    except Exception:
        vals = np.array([float(obj.evaluator(c)) for c in coords])
    if not np.all(np.isfinite(vals)):
        k = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise ValueError(
            f"objective {obj.name!r} is non-finite at node {coords[k]}")
    return ScalarField(grid, vals.reshape(grid.counts))


def build_target_mask(f: ScalarField, c_hat: float,
                      eps_target: float) -> TargetMask:
    """Flag the sublevel set ``f <= c_hat + eps_target`` as the target."""
    if not eps_target > 0:
        raise ValueError(f"eps_target must be positive, got {eps_target}")
    flags = f.values <= c_hat + eps_target
    if not flags.any():
        gap = float(f.values.min() - c_hat)
        raise EmptyTargetError(
            f"empty target: min f exceeds c_hat + eps_target by "
            f"{gap - eps_target:.3e}", gap)
    return TargetMask(f.grid, flags)


def mask_from_points(grid: GridSpec, points) -> TargetMask:
    """Flag the nodes nearest to the given points (e.g. known minimizers)."""
    flags = np.zeros(grid.counts, dtype=bool)
    for p in points:
        flags[grid.nearest_index(p)] = True
    return TargetMask(grid, flags)


def distance_to_mask(mask: TargetMask, method: str = "auto") -> ScalarField:
    """Euclidean distance from every node to the nearest flagged node.

    ``method``: "exact" (nearest-neighbour search), "sweep" (unit-speed
    fast sweeping, O(h) accurate), or "auto" which picks "exact" up to
    100k nodes.
    """
    if method == "auto":
        method = ("exact" if mask.grid.n_nodes <= _EXACT_DISTANCE_NODE_LIMIT
                  else "sweep")
    if method == "exact":
        tree = cKDTree(mask.flagged_coords())
        d, _ = tree.query(mask.grid.node_coords())
        return ScalarField(mask.grid, d.reshape(mask.grid.counts))
    if method == "sweep":
        from . import _kernels
        grid = mask.grid
        ell = np.ones(grid.counts)
        v = np.full(grid.counts, np.inf)
        v[mask.flags] = 0.0
        frozen = np.ascontiguousarray(mask.flags)
        if grid.dim == 1:
            res, _ = _kernels.fsm_1d(v, ell, grid.spacing, frozen, 1e-12, 1000)
        else:
            res, _ = _kernels.fsm_2d(v, ell, grid.spacing, frozen, 1e-12, 1000)
        return ScalarField(grid, v)
    raise ValueError(f"unknown distance method {method!r}")


def _interp_weights(grid: GridSpec, pts: np.ndarray):
    """Multilinear cell indices and fractional weights for query points."""
    lo, hi = grid.box
    if np.any(pts < lo - 1e-12) or np.any(pts > hi + 1e-12):
        raise ValueError("interpolation point outside grid bounding box")
    rel = (pts - lo) / grid.spacing
    base = np.floor(rel).astype(int)
    base = np.minimum(base, np.asarray(grid.counts) - 2)
    base = np.maximum(base, 0)
    frac = rel - base
    return base, frac


def interpolate_many(field: ScalarField, pts) -> np.ndarray:
    """Multilinear interpolation at an array of points, shape (m, dim)."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    base, frac = _interp_weights(field.grid, pts)
    v = field.values
    if field.grid.dim == 1:
        i = base[:, 0]
        w = frac[:, 0]
        return v[i] * (1 - w) + v[i + 1] * w
    i, j = base[:, 0], base[:, 1]
    wx, wy = frac[:, 0], frac[:, 1]
    return (v[i, j] * (1 - wx) * (1 - wy)
            + v[i + 1, j] * wx * (1 - wy)
            + v[i, j + 1] * (1 - wx) * wy
            + v[i + 1, j + 1] * wx * wy)


def interpolate(field: ScalarField, x) -> float:
    """Multilinear interpolation at one point; exact at nodes and on
    affine fields; raises outside the bounding box (no extrapolation)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(interpolate_many(field, x[None, :])[0])


# ---------------------------------------------------------------------------
# Flat CSV + JSON-header serialization
# ---------------------------------------------------------------------------

_AXIS_NAMES = ("x", "y")


def grid_to_dict(grid: GridSpec) -> dict:
    return {"dim": grid.dim, "origin": list(grid.origin),
            "spacing": grid.spacing, "counts": list(grid.counts)}


def grid_from_dict(d: dict) -> GridSpec:
    return GridSpec(dim=int(d["dim"]), origin=tuple(d["origin"]),
                    spacing=float(d["spacing"]), counts=tuple(d["counts"]))


def field_to_csv(field: ScalarField) -> str:
    """Flat CSV: index, coordinates, value (row-major node order)."""
    grid = field.grid
    coords = grid.node_coords()
    vals = field.flat
    header = "index," + ",".join(_AXIS_NAMES[:grid.dim]) + ",value"
    lines = [header]
    for k in range(grid.n_nodes):
        cs = ",".join(repr(float(c)) for c in coords[k])
        lines.append(f"{k},{cs},{repr(float(vals[k]))}")
    return "\n".join(lines) + "\n"


def write_field(field: ScalarField, basepath) -> None:
    """Write ``<basepath>.csv`` (values) and ``<basepath>.json`` (grid)."""
    base = str(basepath)
    with open(base + ".csv", "w") as fh:
        fh.write(field_to_csv(field))
    with open(base + ".json", "w") as fh:
        json.dump({"grid": grid_to_dict(field.grid)}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")


def read_field(basepath) -> ScalarField:
    base = str(basepath)
    with open(base + ".json") as fh:
        grid = grid_from_dict(json.load(fh)["grid"])
    rows = np.loadtxt(base + ".csv", delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(rows[:, 0].astype(int))
    return ScalarField(grid, rows[order, -1])
