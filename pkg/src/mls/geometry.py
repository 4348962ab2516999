"""Manifold geometries, geodesic metrics and evaluation grids.

Four geometries are supported, all embedded in R^3:

* ``sphere``      unit sphere S^2, d' = 2
* ``hemisphere``  polar cap of S^2 around +z with a rim, d' = 2
* ``torus``       embedded torus with major radius R and minor radius r, d' = 2
* ``spd``         2x2 symmetric positive-definite matrices [[a, b], [b, c]]
                  in coordinates (a, b, c), d' = 3

Sphere and hemisphere charts use ``x = (sin(phi) cos(theta), sin(phi) sin(theta), cos(phi))``.
The torus chart is ``((R + r cos(phi)) cos(theta), (R + r cos(phi)) sin(theta), r sin(phi))``.
"""

from __future__ import annotations

import csv
import enum
import functools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

TWO_PI = 2.0 * np.pi
ON_MANIFOLD_TOL = 1e-9
SPD_EIG_FLOOR = 1e-12


class DomainError(ValueError):
    """Input lies outside a chart, a manifold or the SPD cone."""


class GraphDisconnectedError(RuntimeError):
    pass


class Kind(str, enum.Enum):
    SPHERE = "sphere"
    TORUS = "torus"
    SPD = "spd"
    HEMISPHERE = "hemisphere"


@dataclass(frozen=True)
class ManifoldSpec:
    kind: Kind
    major_radius: float = 2.0
    minor_radius: float = 1.0
    cap_angle: float = np.pi / 2

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.TORUS and not 0 < self.minor_radius < self.major_radius:
            raise DomainError(
                f"torus needs 0 < r < R, got R={self.major_radius}, r={self.minor_radius}"
            )
        if self.kind is Kind.HEMISPHERE and not 0 < self.cap_angle <= np.pi / 2:
            # caps wider than a hemisphere are not geodesically convex
            raise DomainError(f"cap angle must lie in (0, pi/2], got {self.cap_angle}")

    @classmethod
    def sphere(cls) -> ManifoldSpec:
        return cls(Kind.SPHERE)

    @classmethod
    def torus(cls, major_radius: float = 2.0, minor_radius: float = 1.0) -> ManifoldSpec:
        return cls(Kind.TORUS, major_radius=major_radius, minor_radius=minor_radius)

    @classmethod
    def spd(cls) -> ManifoldSpec:
        return cls(Kind.SPD)

    @classmethod
    def hemisphere(cls, cap_angle: float = np.pi / 2) -> ManifoldSpec:
        return cls(Kind.HEMISPHERE, cap_angle=cap_angle)

    @property
    def ambient_dim(self) -> int:
        return 3

    @property
    def intrinsic_dim(self) -> int:
        return 3 if self.kind is Kind.SPD else 2

    @property
    def has_boundary(self) -> bool:
        return self.kind is Kind.HEMISPHERE

    @property
    def total_volume(self) -> float | None:
        """Closed-form d'-volume, or None when the manifold is unbounded."""
        if self.kind is Kind.SPHERE:
            return 4 * np.pi
        if self.kind is Kind.HEMISPHERE:
            return TWO_PI * (1 - np.cos(self.cap_angle))
        if self.kind is Kind.TORUS:
            return 4 * np.pi**2 * self.major_radius * self.minor_radius
        return None

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is Kind.TORUS:
            out.update(R=self.major_radius, r=self.minor_radius)
        if self.kind is Kind.HEMISPHERE:
            out.update(cap_angle=self.cap_angle)
        return out


# ----------------------------------------------------------------------------
# charts


def _as_rows(u, width: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(u, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != width:
        raise DomainError(f"expected coordinates of length {width}, got shape {arr.shape}")
    return arr, single


def embed(spec: ManifoldSpec, u) -> np.ndarray:
    """Map intrinsic coordinates (one point or an (n, d') array) into R^3."""
    u, single = _as_rows(u, spec.intrinsic_dim)
    if spec.kind is Kind.SPD:
        a, b, c = u.T
        if np.any(a <= 0) or np.any(a * c - b * b <= 0):
            raise DomainError("(a, b, c) is not a positive-definite matrix")
        x = u.copy()
    else:
        theta, phi = u.T
        if np.any((theta < 0) | (theta >= TWO_PI)):
            raise DomainError("theta outside [0, 2pi)")
        if spec.kind is Kind.TORUS:
            if np.any((phi < 0) | (phi >= TWO_PI)):
                raise DomainError("phi outside [0, 2pi)")
            R, r = spec.major_radius, spec.minor_radius
            rho = R + r * np.cos(phi)
            x = np.column_stack([rho * np.cos(theta), rho * np.sin(theta), r * np.sin(phi)])
        else:
            top = np.pi if spec.kind is Kind.SPHERE else spec.cap_angle
            if np.any((phi < 0) | (phi > top)):
                raise DomainError(f"phi outside [0, {top}]")
            s = np.sin(phi)
            x = np.column_stack([s * np.cos(theta), s * np.sin(theta), np.cos(phi)])
    return x[0] if single else x


def chart(spec: ManifoldSpec, x) -> np.ndarray:
    """Inverse of :func:`embed` (angles reduced to [0, 2pi))."""
    x, single = _as_rows(x, 3)
    if spec.kind is Kind.SPD:
        u = x.copy()
    elif spec.kind is Kind.TORUS:
        theta = np.mod(np.arctan2(x[:, 1], x[:, 0]), TWO_PI)
        rho = np.hypot(x[:, 0], x[:, 1])
        phi = np.mod(np.arctan2(x[:, 2], rho - spec.major_radius), TWO_PI)
        u = np.column_stack([theta, phi])
    else:
        theta = np.mod(np.arctan2(x[:, 1], x[:, 0]), TWO_PI)
        phi = np.arccos(np.clip(x[:, 2], -1.0, 1.0))
        u = np.column_stack([theta, phi])
    return u[0] if single else u


def chart_jacobian(spec: ManifoldSpec, u) -> np.ndarray:
    """Volume element of the chart: d'-volume per unit of coordinate volume."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if spec.kind is Kind.TORUS:
        return spec.minor_radius * (spec.major_radius + spec.minor_radius * np.cos(u[:, 1]))
    if spec.kind is Kind.SPD:
        return np.ones(len(u))
    return np.sin(u[:, 1])


def on_manifold_residual(spec: ManifoldSpec, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if spec.kind is Kind.TORUS:
        rho = np.hypot(x[:, 0], x[:, 1])
        return np.abs((rho - spec.major_radius) ** 2 + x[:, 2] ** 2 - spec.minor_radius**2)
    if spec.kind is Kind.SPD:
        a, b, c = x.T
        ok = (a > 0) & (a * c - b * b > 0)
        return np.where(ok, 0.0, np.inf)
    res = np.abs(np.linalg.norm(x, axis=1) - 1.0)
    if spec.kind is Kind.HEMISPHERE:
        res = np.maximum(res, np.clip(np.cos(spec.cap_angle) - x[:, 2], 0, None))
    return res


def check_on_manifold(spec: ManifoldSpec, x, tol: float = ON_MANIFOLD_TOL) -> None:
    res = on_manifold_residual(spec, x)
    if np.any(~(res <= tol)):
        worst = int(np.argmax(res))
        raise DomainError(f"point {worst} is off the {spec.kind.value} (residual {res[worst]:.3g})")


# ----------------------------------------------------------------------------
# SPD(2) closed forms


def spd_eigh(a, b, c):
    """Eigen-decomposition of [[a, b], [b, c]], vectorised.

    Returns ``(lam_max, lam_min, angle)`` where the eigenvector of ``lam_max``
    is ``(cos(angle), sin(angle))``.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    mean = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    lam1 = mean + rad
    with np.errstate(divide="ignore", invalid="ignore"):
        lam2 = np.where(lam1 > 0, (a * c - b * b) / lam1, mean - rad)
    angle = 0.5 * np.arctan2(2 * b, a - c)
    return lam1, lam2, angle


def _spd_apply(a, b, c, fn):
    lam1, lam2, t = spd_eigh(a, b, c)
    if np.any(~(lam2 > SPD_EIG_FLOOR)):
        raise DomainError(f"matrix is not positive definite (eigenvalue <= {SPD_EIG_FLOOR})")
    f1, f2 = fn(lam1), fn(lam2)
    cs, sn = np.cos(t), np.sin(t)
    return (
        f1 * cs * cs + f2 * sn * sn,
        (f1 - f2) * cs * sn,
        f1 * sn * sn + f2 * cs * cs,
    )


def spd_logm(a, b, c):
    return _spd_apply(a, b, c, np.log)


def spd_inv_sqrtm(a, b, c):
    return _spd_apply(a, b, c, lambda v: 1.0 / np.sqrt(v))


def spd_distance(x, y) -> np.ndarray:
    """Affine-invariant distance ``||log(A^-1/2 B A^-1/2)||_F`` between rows of x and y.

    x and y broadcast against each other; both hold (a, b, c) in the last axis.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p, q, s = spd_inv_sqrtm(x[..., 0], x[..., 1], x[..., 2])
    a, b, c = y[..., 0], y[..., 1], y[..., 2]
    # W B W with W = A^{-1/2} = [[p, q], [q, s]]
    m11 = p * (p * a + q * b) + q * (p * b + q * c)
    m12 = p * (q * a + s * b) + q * (q * b + s * c)
    m22 = q * (q * a + s * b) + s * (q * b + s * c)
    lam1, lam2, _ = spd_eigh(m11, m12, m22)
    if np.any(~(lam2 > SPD_EIG_FLOOR)):
        raise DomainError(f"matrix is not positive definite (eigenvalue <= {SPD_EIG_FLOOR})")
    return np.hypot(np.log(lam1), np.log(lam2))


# ----------------------------------------------------------------------------
# distances


def sphere_distance(x, y) -> np.ndarray:
    """Great-circle distance between unit vectors.

    Equal to ``arccos(<x, y>)``; the atan2 form keeps full precision for
    nearly coincident and nearly antipodal pairs.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    cross = np.linalg.norm(np.cross(x, y), axis=-1)
    return np.arctan2(cross, np.sum(x * y, axis=-1))


def geodesic_distance(spec: ManifoldSpec, x, y, graph: GeodesicGraph | None = None):
    """Geodesic distance between x and y (single points or broadcastable rows).

    Torus distances come from a k-NN shortest-path graph; pass ``graph`` to
    control its resolution, otherwise a cached 96x96 lattice graph is used.
    """
    check_on_manifold(spec, x)
    check_on_manifold(spec, y)
    if spec.kind in (Kind.SPHERE, Kind.HEMISPHERE):
        # caps are restricted to <= pi/2, which keeps them geodesically convex
        return sphere_distance(x, y)
    if spec.kind is Kind.SPD:
        return spd_distance(x, y)
    if graph is None:
        graph = _default_torus_graph(spec)
    xs, ys = np.atleast_2d(x), np.atleast_2d(y)
    xs, ys = np.broadcast_arrays(xs, ys)
    out = np.array([graph.point_distance(p, q) for p, q in zip(xs, ys)])
    return out[0] if np.ndim(x) == 1 and np.ndim(y) == 1 else out


@functools.lru_cache(maxsize=8)
def _default_torus_graph(spec: ManifoldSpec) -> GeodesicGraph:
    return geodesic_graph_build(make_grid(spec, (96, 96)), k=8)


def boundary_distance(spec: ManifoldSpec, x) -> np.ndarray | float:
    """Geodesic distance to the manifold boundary; ``inf`` when there is none."""
    check_on_manifold(spec, x)
    x = np.asarray(x, dtype=float)
    if spec.kind is not Kind.HEMISPHERE:
        return np.inf if x.ndim == 1 else np.full(len(x), np.inf)
    polar = np.arccos(np.clip(np.atleast_2d(x)[:, 2], -1.0, 1.0))
    b = np.clip(spec.cap_angle - polar, 0.0, None)
    return float(b[0]) if x.ndim == 1 else b


# ----------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class EvaluationGrid:
    spec: ManifoldSpec
    points: np.ndarray
    intrinsic: np.ndarray
    weights: np.ndarray
    adjacency: sparse.csr_matrix
    spacing: float
    shape: tuple[int, ...] | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    @property
    def total_volume(self) -> float:
        return float(self.weights.sum())

    def boundary_distances(self) -> np.ndarray:
        return boundary_distance(self.spec, self.points)

    def chart_weights(self) -> np.ndarray:
        """Coordinate-volume weights (weights divided by the chart Jacobian)."""
        return self.weights / chart_jacobian(self.spec, self.intrinsic)

    def to_csv(self, path) -> None:
        d1, d = self.intrinsic.shape[1], self.points.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["idx"] + [f"u{i + 1}" for i in range(d1)] + [f"x{i + 1}" for i in range(d)] + ["weight"])
            for i in range(len(self)):
                w.writerow([i, *map(repr, self.intrinsic[i]), *map(repr, self.points[i]), repr(self.weights[i])])

    def adjacency_to_csv(self, path) -> None:
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j"])
            for k in order:
                w.writerow([int(coo.row[k]), int(coo.col[k])])


def _adjacency_from_pairs(n: int, i: np.ndarray, j: np.ndarray) -> sparse.csr_matrix:
    keep = i != j
    i, j = i[keep], j[keep]
    data = np.ones(2 * len(i), dtype=bool)
    adj = sparse.coo_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n)).tocsr()
    adj.sum_duplicates()
    adj.data[:] = True
    return adj


def _knn_adjacency(points: np.ndarray, k: int) -> sparse.csr_matrix:
    _, idx = cKDTree(points).query(points, k=k + 1)
    rows = np.repeat(np.arange(len(points)), k)
    return _adjacency_from_pairs(len(points), rows, idx[:, 1:].ravel())


def _cap_lattice(spec: ManifoldSpec, n_theta: int, n_phi: int, top: float) -> EvaluationGrid:
    dtheta, dphi = TWO_PI / n_theta, top / n_phi
    theta = np.arange(n_theta) * dtheta
    edges = np.arange(n_phi + 1) * dphi
    phi = 0.5 * (edges[:-1] + edges[1:])
    # exact area of each lattice cell
    band = dtheta * (np.cos(edges[:-1]) - np.cos(edges[1:]))
    T, P = np.meshgrid(theta, phi, indexing="ij")
    u = np.column_stack([T.ravel(), P.ravel()])
    weights = np.tile(band, n_theta)
    idx = np.arange(n_theta * n_phi).reshape(n_theta, n_phi)
    pairs = [
        (idx.ravel(), np.roll(idx, -1, axis=0).ravel()),
        (idx[:, :-1].ravel(), idx[:, 1:].ravel()),
        # across the north pole
        (idx[:, 0], np.roll(idx[:, 0], n_theta // 2)),
    ]
    if spec.kind is Kind.SPHERE:
        pairs.append((idx[:, -1], np.roll(idx[:, -1], n_theta // 2)))
    i = np.concatenate([p[0] for p in pairs])
    j = np.concatenate([p[1] for p in pairs])
    return EvaluationGrid(
        spec=spec,
        points=embed(spec, u),
        intrinsic=u,
        weights=weights,
        adjacency=_adjacency_from_pairs(len(u), i, j),
        spacing=max(dtheta, dphi),
        shape=(n_theta, n_phi),
        meta={"layout": "lattice"},
    )


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    theta = np.mod(np.pi * (3 - np.sqrt(5)) * i, TWO_PI)
    s = np.sqrt(1 - z * z)
    return np.column_stack([s * np.cos(theta), s * np.sin(theta), z])


DEFAULT_SPD_BOX = ((0.0, 10.0), (-5.0, 5.0), (0.0, 10.0))


def make_grid(
    spec: ManifoldSpec,
    resolution,
    layout: str = "lattice",
    box=None,
    knn: int = 6,
) -> EvaluationGrid:
    """Discretise ``spec``.

    ``resolution`` holds one count per intrinsic dimension (a single integer
    for the Fibonacci sphere). ``box`` bounds the SPD lattice as
    ``((a_lo, a_hi), (b_lo, b_hi), (c_lo, c_hi))``.
    """
    res = tuple(int(v) for v in np.atleast_1d(resolution))
    if layout == "fibonacci":
        if spec.kind is not Kind.SPHERE:
            raise DomainError("the Fibonacci layout is only defined on the sphere")
        n = res[0]
        if n < 8:
            raise DomainError("resolution must be at least 8")
        pts = fibonacci_sphere(n)
        return EvaluationGrid(
            spec=spec,
            points=pts,
            intrinsic=chart(spec, pts),
            weights=np.full(n, 4 * np.pi / n),
            adjacency=_knn_adjacency(pts, knn),
            spacing=float(np.sqrt(4 * np.pi / n)),
            meta={"layout": "fibonacci"},
        )
    if layout != "lattice":
        raise ValueError(f"unknown grid layout {layout!r}")
    if len(res) != spec.intrinsic_dim or min(res) < 8:
        raise DomainError(f"need {spec.intrinsic_dim} counts of at least 8, got {res}")

    if spec.kind is Kind.SPHERE:
        return _cap_lattice(spec, res[0], res[1], np.pi)
    if spec.kind is Kind.HEMISPHERE:
        return _cap_lattice(spec, res[0], res[1], spec.cap_angle)
    if spec.kind is Kind.TORUS:
        n1, n2 = res
        d1, d2 = TWO_PI / n1, TWO_PI / n2
        T, P = np.meshgrid(np.arange(n1) * d1, np.arange(n2) * d2, indexing="ij")
        u = np.column_stack([T.ravel(), P.ravel()])
        idx = np.arange(n1 * n2).reshape(n1, n2)
        i = np.r_[idx.ravel(), idx.ravel()]
        j = np.r_[np.roll(idx, -1, axis=0).ravel(), np.roll(idx, -1, axis=1).ravel()]
        return EvaluationGrid(
            spec=spec,
            points=embed(spec, u),
            intrinsic=u,
            weights=chart_jacobian(spec, u) * d1 * d2,
            adjacency=_adjacency_from_pairs(len(u), i, j),
            spacing=max(d1 * (spec.major_radius + spec.minor_radius), d2 * spec.minor_radius),
            shape=(n1, n2),
            meta={"layout": "lattice"},
        )

    box = np.asarray(DEFAULT_SPD_BOX if box is None else box, dtype=float)
    steps = (box[:, 1] - box[:, 0]) / np.asarray(res)
    axes = [lo + (np.arange(n) + 0.5) * st for (lo, _), n, st in zip(box, res, steps)]
    A, B, C = np.meshgrid(*axes, indexing="ij")
    full = np.column_stack([A.ravel(), B.ravel(), C.ravel()])
    keep = (full[:, 0] > 0) & (full[:, 0] * full[:, 2] - full[:, 1] ** 2 > 0)
    if not keep.any():
        raise DomainError("the SPD box contains no positive-definite lattice point")
    lattice = np.full(full.shape[0], -1)
    lattice[keep] = np.arange(keep.sum())
    lattice = lattice.reshape(res)
    pairs_i, pairs_j = [], []
    for axis in range(3):
        lo = np.take(lattice, np.arange(res[axis] - 1), axis=axis).ravel()
        hi = np.take(lattice, np.arange(1, res[axis]), axis=axis).ravel()
        both = (lo >= 0) & (hi >= 0)
        pairs_i.append(lo[both])
        pairs_j.append(hi[both])
    pts = full[keep]
    return EvaluationGrid(
        spec=spec,
        points=pts,
        intrinsic=pts.copy(),
        weights=np.full(len(pts), float(np.prod(steps))),
        adjacency=_adjacency_from_pairs(len(pts), np.concatenate(pairs_i), np.concatenate(pairs_j)),
        spacing=float(steps.max()),
        shape=res,
        meta={"layout": "lattice", "box": box.tolist()},
    )


# ----------------------------------------------------------------------------
# k-NN shortest-path geodesics


class GeodesicGraph:
    """k-nearest-neighbour graph over grid points with Euclidean edge lengths.

    Shortest paths approximate geodesics from above; the error shrinks as
    the grid is refined. Arbitrary points are attached to their ``k``
    nearest nodes for queries.
    """

    def __init__(self, points: np.ndarray, k: int):
        self.points = np.asarray(points, dtype=float)
        self.k = k
        self.tree = cKDTree(self.points)
        n = len(self.points)
        kk = min(k, n - 1)
        dist, idx = self.tree.query(self.points, k=kk + 1)
        rows = np.repeat(np.arange(n), kk)
        cols = idx[:, 1:].ravel()
        w = dist[:, 1:].ravel()
        g = sparse.coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
        self.matrix = g.maximum(g.T).tocsr()
        ncomp, labels = csgraph.connected_components(self.matrix, directed=False)
        if ncomp > 1:
            sizes = np.bincount(labels)
            small = int(np.argmin(sizes))
            members = np.flatnonzero(labels == small)
            raise GraphDisconnectedError(
                f"k-NN graph (k={k}) has {ncomp} components; smallest is component "
                f"{small} with {sizes[small]} node(s), e.g. indices {members[:10].tolist()}"
            )

    def __len__(self) -> int:
        return len(self.points)

    def distances_from(self, sources, limit: float = np.inf) -> np.ndarray:
        """Distance from the nearest of ``sources`` (node indices) to every node."""
        src = np.atleast_1d(np.asarray(sources, dtype=int))
        return csgraph.dijkstra(self.matrix, directed=False, indices=src, min_only=True, limit=limit)

    def all_pairs(self) -> np.ndarray:
        return csgraph.dijkstra(self.matrix, directed=False)

    def _attach(self, points: np.ndarray) -> sparse.csr_matrix:
        """Graph extended by one virtual source joined to the k nearest nodes of every point."""
        n = len(self.points)
        dist, idx = self.tree.query(points, k=min(self.k, n))
        dist, idx = np.atleast_2d(dist), np.atleast_2d(idx)
        best = np.full(n, np.inf)
        np.minimum.at(best, idx.ravel(), dist.ravel())
        hit = np.flatnonzero(np.isfinite(best))
        # zero-length edges would be dropped by the sparse format
        w = np.maximum(best[hit], 1e-300)
        extra = sparse.coo_matrix((w, (np.full(len(hit), n), hit)), shape=(n + 1, n + 1))
        base = sparse.block_diag([self.matrix, sparse.csr_matrix((1, 1))]).tocsr()
        return (base + extra + extra.T).tocsr()

    def distance_to_points(self, points, limit: float = np.inf) -> np.ndarray:
        """Distance from every node to the nearest of arbitrary ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        g = self._attach(pts)
        d = csgraph.dijkstra(g, directed=False, indices=len(self.points), limit=limit)
        return d[:-1]

    def point_distance(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.array_equal(x, y):
            return 0.0
        dy, iy = self.tree.query(y, k=min(self.k, len(self.points)))
        via = self.distance_to_points(x)[np.atleast_1d(iy)] + np.atleast_1d(dy)
        return float(via.min())


def geodesic_graph_build(grid, k: int = 8) -> GeodesicGraph:
    points = grid.points if isinstance(grid, EvaluationGrid) else np.asarray(grid, dtype=float)
    if len(points) == 0:
        raise ValueError("cannot build a graph over an empty grid")
    d1 = grid.spec.intrinsic_dim if isinstance(grid, EvaluationGrid) else 1
    if k < min(d1 + 1, len(points) - 1):
        raise ValueError(f"k must be at least d'+1 = {d1 + 1}")
    return GeodesicGraph(points, k)


def write_grid(grid: EvaluationGrid, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g, a = out / "grid.csv", out / "adjacency.csv"
    grid.to_csv(g)
    grid.adjacency_to_csv(a)
    return g, a
