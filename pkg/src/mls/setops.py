"""Level sets, discrete boundaries, set distances and geodesic r-convex hulls."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    TWO_PI,
    EvaluationGrid,
    GeodesicGraph,
    Kind,
    ManifoldSpec,
    geodesic_graph_build,
    spd_distance,
    sphere_distance,
)

METRICS = ("ambient", "geodesic", "chart")


class HullResolutionWarning(UserWarning):
    """Hull radius is too small for the grid; the hull degenerates towards A."""


@dataclass(frozen=True, eq=False)
class GridSubset:
    grid: EvaluationGrid
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (len(self.grid),):
            raise ValueError(f"mask has shape {m.shape}, grid has {len(self.grid)} points")
        object.__setattr__(self, "mask", m)

    def __len__(self) -> int:
        return int(self.mask.sum())

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def issubset(self, other: GridSubset) -> bool:
        _same_grid(self, other)
        return bool(np.all(other.mask[self.mask]))

    def complement(self) -> GridSubset:
        return GridSubset(self.grid, ~self.mask)

    def volume(self) -> float:
        return float(self.grid.weights[self.mask].sum())

    def point_set(self, metric: str = "ambient") -> FinitePointSet:
        g = self.grid
        return FinitePointSet(g.points[self.mask], metric, g.spec, g.intrinsic[self.mask])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("idx\n")
            fh.writelines(f"{i}\n" for i in self.indices)


@dataclass(frozen=True, eq=False)
class FinitePointSet:
    """Points in ambient coordinates plus the metric used to compare them.

    ``chart`` compares intrinsic coordinates with the flat product metric of
    the angle chart (periodic on the torus).
    """

    points: np.ndarray
    metric: str = "ambient"
    spec: ManifoldSpec | None = None
    intrinsic: np.ndarray | None = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts.reshape(len(pts), -1) if pts.size else pts.reshape(0, 3))

    def __len__(self) -> int:
        return len(self.points)


def _same_grid(a: GridSubset, b: GridSubset) -> None:
    if a.grid is not b.grid:
        raise ValueError("subsets belong to different grids")


def level_set(field, level: float) -> GridSubset:
    """Closed superlevel set ``{value >= level}``."""
    if not level > 0:
        raise ValueError("level must be positive")
    return GridSubset(field.grid, field.values >= level)


def boundary_of(subset: GridSubset) -> GridSubset:
    """Members with at least one lattice neighbour outside the subset."""
    outside = (~subset.mask).astype(np.int64)
    touches = subset.grid.adjacency.astype(np.int64) @ outside
    return GridSubset(subset.grid, subset.mask & (touches > 0))


def distance_in_measure(a: GridSubset, b: GridSubset) -> float:
    _same_grid(a, b)
    return float(a.grid.weights[a.mask ^ b.mask].sum())


# ----------------------------------------------------------------------------
# Hausdorff distance


def _chart_box(spec: ManifoldSpec | None):
    if spec is None:
        raise ValueError("the chart metric needs a manifold")
    if spec.kind is Kind.TORUS:
        return np.array([TWO_PI, TWO_PI])
    if spec.kind is Kind.SPD:
        return None
    raise ValueError(f"no flat chart metric on the {spec.kind.value}")


def _directed(a: FinitePointSet, b: FinitePointSet, graph: GeodesicGraph | None) -> float:
    """max_{p in a} min_{q in b} rho(p, q)."""
    if a.metric == "chart":
        box = _chart_box(a.spec)
        ua, ub = a.intrinsic, b.intrinsic
        if box is not None:
            ua, ub = np.mod(ua, box), np.mod(ub, box)
            # cKDTree wants coordinates strictly below the box size
            ua[ua >= box] = 0.0
            ub[ub >= box] = 0.0
        return float(cKDTree(ub, boxsize=box).query(ua)[0].max())
    if a.metric == "ambient":
        return float(cKDTree(b.points).query(a.points)[0].max())
    kind = a.spec.kind if a.spec is not None else None
    if kind in (Kind.SPHERE, Kind.HEMISPHERE):
        # nearest by chord is nearest by arc
        _, j = cKDTree(b.points).query(a.points)
        return float(sphere_distance(a.points, b.points[j]).max())
    if kind is Kind.SPD:
        best = np.full(len(a), np.inf)
        for s in range(0, len(a), 256):
            d = spd_distance(a.points[s : s + 256, None, :], b.points[None, :, :])
            best[s : s + 256] = d.min(axis=1)
        return float(best.max())
    if kind is Kind.TORUS:
        if graph is None:
            raise ValueError("geodesic Hausdorff on the torus needs a GeodesicGraph")
        to_b = graph.distance_to_points(b.points)
        dist, idx = graph.tree.query(a.points, k=min(graph.k, len(graph)))
        dist, idx = dist.reshape(len(a), -1), idx.reshape(len(a), -1)
        return float((dist + to_b[idx]).min(axis=1).max())
    raise ValueError("geodesic metric needs a manifold")


def hausdorff(a: FinitePointSet, b: FinitePointSet, graph: GeodesicGraph | None = None) -> float:
    """``max(max_a rho(a, B), max_b rho(b, A))``."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("Hausdorff distance of an empty set")
    if a.metric != b.metric:
        raise ValueError("point sets use different metrics")
    return max(_directed(a, b, graph), _directed(b, a, graph))


# ----------------------------------------------------------------------------
# r-convex hull


def distance_to_set(grid: EvaluationGrid, points: np.ndarray, graph: GeodesicGraph | None = None) -> np.ndarray:
    """Geodesic distance from every grid point to the nearest of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    kind = grid.spec.kind
    if kind in (Kind.SPHERE, Kind.HEMISPHERE):
        _, j = cKDTree(pts).query(grid.points)
        return sphere_distance(grid.points, pts[j])
    if kind is Kind.SPD:
        out = np.empty(len(grid))
        for s in range(0, len(grid), 256):
            out[s : s + 256] = spd_distance(grid.points[s : s + 256, None, :], pts[None, :, :]).min(axis=1)
        return out
    graph = graph if graph is not None else geodesic_graph_build(grid)
    return graph.distance_to_points(pts)


def _reached_within(grid: EvaluationGrid, centres: np.ndarray, r: float, graph: GeodesicGraph | None) -> np.ndarray:
    """Mask of grid points at distance < r from some grid point in ``centres``."""
    out = np.zeros(len(grid), dtype=bool)
    if len(centres) == 0:
        return out
    kind = grid.spec.kind
    if kind is Kind.TORUS:
        graph = graph if graph is not None else geodesic_graph_build(grid)
        return graph.distances_from(centres, limit=r) < r
    return distance_to_set(grid, grid.points[centres]) < r


def r_convex_hull(a, grid: EvaluationGrid, r: float, graph: GeodesicGraph | None = None) -> GridSubset:
    """Discrete geodesic r-convex hull of ``a`` on ``grid``.

    A grid point is dropped when some grid point ``c`` with ``rho(c, a) >= r``
    lies at distance ``< r`` from it, i.e. when an open geodesic ball of
    radius r centred on the grid covers it without touching ``a``.
    """
    pts = a.points if isinstance(a, FinitePointSet) else np.asarray(a, dtype=float)
    if len(pts) == 0:
        raise ValueError("r-convex hull of an empty set")
    if not r > 0:
        raise ValueError("hull radius must be positive")
    if r < 2 * grid.spacing:
        warnings.warn(
            f"r={r} is below twice the grid spacing {grid.spacing:.4g}; the hull degenerates towards A",
            HullResolutionWarning,
            stacklevel=2,
        )
    if grid.spec.kind is Kind.TORUS and graph is None:
        graph = geodesic_graph_build(grid)
    to_a = distance_to_set(grid, pts, graph)
    centres = np.flatnonzero(to_a >= r)
    return GridSubset(grid, ~_reached_within(grid, centres, r, graph))


def sample_filter(sample, evaluator, level: float, metric: str = "ambient") -> FinitePointSet:
    """Sample points whose (estimated or true) density is strictly above ``level``."""
    pts = np.asarray(getattr(sample, "points", sample), dtype=float)
    vals = np.asarray(evaluator(pts), dtype=float)
    keep = vals > level
    spec = getattr(sample, "spec", None)
    intrinsic = getattr(sample, "intrinsic", None)
    return FinitePointSet(pts[keep], metric, spec, None if intrinsic is None else intrinsic[keep])


def stereographic(points, pole) -> np.ndarray:
    """Project unit vectors from ``pole`` onto the plane through the origin orthogonal to it.

    Plane coordinates use the basis ``(e1, e2)`` returned by :func:`projection_basis`.
    """
    p = np.asarray(pole, dtype=float)
    p = p / np.linalg.norm(p)
    e1, e2 = projection_basis(p)
    x = np.atleast_2d(np.asarray(points, dtype=float))
    denom = 1.0 - x @ p
    return np.column_stack([x @ e1, x @ e2]) / denom[:, None]


def projection_basis(pole: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pole, dtype=float) / np.linalg.norm(pole)
    helper = np.eye(3)[int(np.argmin(np.abs(p)))]
    e1 = helper - (helper @ p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return e1, e2
