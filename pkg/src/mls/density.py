"""Gaussian-kernel density estimation on embedded manifolds.

Two estimators share one kernel sum over ambient Euclidean distances:

    uncorrected(x) = 1 / (n h^d') * sum_i K(|x - X_i| / h)
    corrected(x)   = uncorrected(x) / m0(x)

with ``K(t) = pi^(-d'/2) exp(-t^2)`` and ``m0(x) = (1 + erf(b_x / h)) / 2``,
where ``b_x`` is the geodesic distance from x to the manifold boundary.
Points far from the rim (or on boundaryless manifolds) have ``m0 = 1``.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import erf

from .geometry import EvaluationGrid, ManifoldSpec, boundary_distance, chart_jacobian, check_on_manifold

# exp(-64) ~ 1.6e-28 relative to the kernel peak
KERNEL_CUTOFF = 8.0

PROVENANCES = ("true-density", "kde-corrected", "kde-uncorrected")
MEASURES = ("volume", "chart")


def gaussian_kernel(t, dim: int):
    t = np.asarray(t, dtype=float)
    return np.pi ** (-dim / 2) * np.exp(-t * t)


def m0(b_x, h: float):
    """Kernel mass kept inside the manifold at boundary distance ``b_x``."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    b = np.asarray(b_x, dtype=float)
    out = np.where(np.isinf(b), 1.0, 0.5 * (1.0 + erf(np.where(np.isinf(b), 0.0, b) / h)))
    return float(out) if out.ndim == 0 else out


def bias_coefficient_m1(b_x, h: float):
    """Leading boundary-bias coefficient ``exp(-b_x^2 / h^2) / (2 sqrt(pi))``."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    b = np.asarray(b_x, dtype=float)
    out = np.exp(-((b / h) ** 2)) / (2 * np.sqrt(np.pi))
    return float(out) if out.ndim == 0 else out


def default_bandwidth(points: np.ndarray, intrinsic_dim: int) -> float:
    """``n^(-1/(d'+4))`` scaled by a quarter of the sample diameter."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diameter = float(np.linalg.norm(hi - lo))
    if diameter == 0:
        diameter = 1.0
    return n ** (-1.0 / (intrinsic_dim + 4)) * diameter / 4


def _sample_points(sample) -> np.ndarray:
    pts = getattr(sample, "points", sample)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[0] == 0 or pts.size == 0:
        raise ValueError("the sample is empty")
    return pts


def _kernel_sums(
    queries: np.ndarray,
    data: np.ndarray,
    h: float,
    tree: cKDTree | None = None,
    threads: int = 1,
) -> np.ndarray:
    """sum_i exp(-|q - X_i|^2 / h^2) for every query row.

    Queries are bucketed into cubes of side ``4h``; each bucket only sees
    data points within the cutoff of its bounding ball. Bucket membership is
    fixed by the query coordinates alone, so results do not depend on
    ``threads``.
    """
    if tree is None:
        tree = cKDTree(data)
    side = 4.0 * h
    keys = np.floor(queries / side).astype(np.int64)
    order = np.lexsort(keys.T[::-1])
    sk = keys[order]
    starts = np.flatnonzero(np.r_[True, np.any(sk[1:] != sk[:-1], axis=1)])
    stops = np.r_[starts[1:], len(order)]
    out = np.zeros(len(queries))
    reach = KERNEL_CUTOFF * h + side * np.sqrt(queries.shape[1]) / 2

    def bucket(span):
        lo, hi = span
        idx = order[lo:hi]
        q = queries[idx]
        centre = (sk[lo] + 0.5) * side
        near = tree.query_ball_point(centre, reach)
        if not near:
            return idx, np.zeros(len(idx))
        near = np.sort(np.asarray(near))
        # centring keeps the subtraction well conditioned far from the origin
        diff = (q - centre)[:, None, :] - (data[near] - centre)[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff) / (h * h)
        return idx, np.exp(-d2).sum(axis=1)

    spans = list(zip(starts, stops))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(bucket, spans))
    else:
        results = map(bucket, spans)
    for idx, vals in results:
        out[idx] = vals
    return out


def evaluate_points(
    x,
    sample,
    h: float,
    spec: ManifoldSpec,
    corrected: bool = True,
    threads: int = 1,
    check: bool = True,
) -> np.ndarray:
    """Estimator values at arbitrary points (rows of ``x``) on the manifold."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    data = _sample_points(sample)
    q = np.atleast_2d(np.asarray(x, dtype=float))
    if check:
        check_on_manifold(spec, q)
    dim = spec.intrinsic_dim
    # a canonical data order makes the sums invariant under sample permutation
    data = data[np.lexsort(data.T[::-1])]
    sums = _kernel_sums(q, data, h, threads=threads)
    values = sums * np.pi ** (-dim / 2) / (len(data) * h**dim)
    if corrected and spec.has_boundary:
        values = values / m0(boundary_distance(spec, q), h)
    return values


def kde_uncorrected(x, sample, h: float, spec: ManifoldSpec) -> float:
    x = np.asarray(x, dtype=float)
    check_on_manifold(spec, x)
    data = _sample_points(sample)
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    dim = spec.intrinsic_dim
    t = np.linalg.norm(data - x, axis=1) / h
    return float(gaussian_kernel(t, dim).sum() / (len(data) * h**dim))


def kde_corrected(x, sample, h: float, spec: ManifoldSpec) -> float:
    """Boundary-corrected estimate at a single point ``x``."""
    raw = kde_uncorrected(x, sample, h, spec)
    return raw / m0(boundary_distance(spec, np.asarray(x, dtype=float)), h)


@dataclass(frozen=True, eq=False)
class DensityField:
    grid: EvaluationGrid
    values: np.ndarray
    provenance: str
    h: float | None = None
    measure: str = "volume"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        if len(self.values) != len(self.grid):
            raise ValueError("field length does not match the grid")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("density values must be finite and nonnegative")

    def mass(self) -> float:
        w = self.grid.weights if self.measure == "volume" else self.grid.chart_weights()
        return float(np.dot(self.values, w))

    def to_csv(self, path, sidecar: bool = True) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["idx", "value"])
            for i, v in enumerate(self.values):
                w.writerow([i, repr(float(v))])
        if sidecar:
            meta = {"provenance": self.provenance, "h": self.h, "measure": self.measure, **self.meta}
            path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def to_measure(values: np.ndarray, grid: EvaluationGrid, measure: str) -> np.ndarray:
    """Convert volume densities into densities per unit of chart coordinates."""
    if measure == "volume":
        return values
    if measure == "chart":
        return values * chart_jacobian(grid.spec, grid.intrinsic)
    raise ValueError(f"unknown measure {measure!r}")


def evaluate_field(
    sample,
    h: float,
    grid: EvaluationGrid,
    spec: ManifoldSpec | None = None,
    corrected: bool = True,
    measure: str = "volume",
    threads: int = 1,
) -> DensityField:
    spec = grid.spec if spec is None else spec
    if spec != grid.spec:
        raise ValueError("sample manifold and grid manifold differ")
    values = evaluate_points(grid.points, sample, h, spec, corrected=corrected, threads=threads, check=False)
    meta = {}
    n = getattr(sample, "n", None)
    if n is not None:
        meta.update(n=n, seed=getattr(sample, "seed", None))
    else:
        meta.update(n=len(_sample_points(sample)))
    return DensityField(
        grid=grid,
        values=to_measure(values, grid, measure),
        provenance="kde-corrected" if corrected else "kde-uncorrected",
        h=h,
        measure=measure,
        meta=meta,
    )


def sup_error(estimate: DensityField, truth: DensityField, mask=None) -> float:
    if estimate.grid is not truth.grid:
        raise ValueError("fields live on different grids")
    if estimate.measure != truth.measure:
        raise ValueError("fields use different reference measures")
    m = np.ones(len(truth.grid), dtype=bool) if mask is None else np.asarray(getattr(mask, "mask", mask), dtype=bool)
    if not m.any():
        raise ValueError("sup_error over an empty mask")
    return float(np.max(np.abs(estimate.values[m] - truth.values[m])))

