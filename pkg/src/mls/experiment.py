"""Configuration-driven simulation runner.

A config is a JSON object; unknown keys are rejected. Example::

    {
      "name": "torus-unimodal",
      "manifold": {"kind": "torus", "R": 2.0, "r": 1.0},
      "law": {"kind": "mvm", "mu": [1.5708, 0.0], "kappa": [20, 20],
              "delta": [[0, 1], [1, 0]]},
      "n": 2000, "h": 0.2, "level": 0.8,
      "grid": {"resolution": [128, 128]},
      "measure": "chart", "distance": "boundaries", "metric": "chart"
    }

See ``CONFIG_FIELDS`` for every key and its default.
"""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .density import DensityField, evaluate_field, evaluate_points, sup_error
from .geometry import Kind, ManifoldSpec, chart, chart_jacobian, geodesic_graph_build, make_grid
from .samplers import SamplePointSet, sample_law
from .setops import (
    FinitePointSet,
    GridSubset,
    boundary_of,
    distance_in_measure,
    hausdorff,
    level_set,
    r_convex_hull,
    sample_filter,
    stereographic,
)
from .truth import law_from_dict, law_to_dict, truth_field

log = logging.getLogger(__name__)

DISTANCES = ("regions", "boundaries", "hull-vs-levelset")
METRICS = ("ambient", "geodesic", "chart")
MEASURES = ("volume", "chart")
RESULT_COLUMNS = ("replication", "seed", "d_H", "d_mu", "sup_error", "seconds")
MAX_SEED = 2**64 - 1

CONFIG_FIELDS = {
    "name": "experiment",
    "description": "",
    "manifold": None,
    "law": None,
    "n": None,
    "h": None,
    "level": None,
    "hull_radius": None,
    "grid": None,
    "replications": 20,
    "seed": 0,
    "distance": "regions",
    "metric": "ambient",
    "measure": "volume",
    "corrected": True,
    "projection": None,
    "graph_k": 8,
    "output": None,
}
REQUIRED = ("manifold", "law", "n", "level", "grid")


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[tuple[str, str]]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(f"{p}: {m}" for p, m in diagnostics))


# ----------------------------------------------------------------------------
# presets

_TORUS = {"kind": "torus", "R": 2.0, "r": 1.0}
_DELTA1 = [[0.0, 1.0], [1.0, 0.0]]
_MVM1 = {"kind": "mvm", "mu": [math.pi / 2, 0.0], "kappa": [20.0, 20.0], "delta": _DELTA1}
_MVM3 = {"kind": "mvm", "mu": [math.pi / 2, math.pi / 4], "kappa": [20.0, 20.0], "delta": _DELTA1}
_WISHART_GRID = {"resolution": [70, 70, 70], "box": [[0.0, 7.0], [-3.5, 3.5], [0.0, 7.0]]}


def _wishart(name, n, h, level, sigma, description):
    return {
        "name": name,
        "description": description,
        "manifold": {"kind": "spd"},
        "law": {"kind": "wishart", "sigma": [[sigma, 0.0], [0.0, sigma]], "dof": 10},
        "n": n,
        "h": h,
        "level": level,
        "grid": copy.deepcopy(_WISHART_GRID),
        "distance": "regions",
        "metric": "ambient",
    }


PRESETS: dict[str, dict] = {
    **{
        f"wishart-table1-{n}": _wishart(
            f"wishart-table1-{n}", n, h, 0.06, 0.25, f"Wishart m=10, Sigma=I/4, n={n}, h={h}, level 0.06; region d_H in R^3"
        )
        for n, h in ((1000, 0.20), (5000, 0.15), (10000, 0.10), (20000, 0.05))
    },
    "wishart-figure": _wishart(
        "wishart-figure", 10000, 0.10, 0.06, 0.25, "Wishart m=10, Sigma=I/4, n=10000, h=0.1, level 0.06"
    ),
    "wishart-table1-caption": _wishart(
        "wishart-table1-caption",
        10000,
        0.30,
        0.5,
        0.5,
        "Wishart m=10, Sigma=I/2, h=0.3, level 0.5 (alternate settings; the level exceeds the density maximum)",
    ),
    "torus-unimodal": {
        "name": "torus-unimodal",
        "description": "MVM(mu=(pi/2,0), kappa=(20,20), Delta12=1), n=2000, h=0.2, level 0.8 on angle density",
        "manifold": dict(_TORUS),
        "law": copy.deepcopy(_MVM1),
        "n": 2000,
        "h": 0.2,
        "level": 0.8,
        "hull_radius": 0.4,
        "grid": {"resolution": [128, 128]},
        "measure": "chart",
        "distance": "boundaries",
        "metric": "chart",
    },
    "torus-mixture": {
        "name": "torus-mixture",
        "description": "0.4 MVM(mu=(pi/2,0)) + 0.6 MVM(mu=(pi/2,pi/4)), n=2000, h=0.2, level 0.8 on angle density",
        "manifold": dict(_TORUS),
        "law": {"kind": "mixture", "weights": [0.4, 0.6], "components": [copy.deepcopy(_MVM1), copy.deepcopy(_MVM3)]},
        "n": 2000,
        "h": 0.2,
        "level": 0.8,
        "hull_radius": 0.4,
        "grid": {"resolution": [128, 128]},
        "measure": "chart",
        "distance": "boundaries",
        "metric": "chart",
    },
    "sphere-mixture": {
        "name": "sphere-mixture",
        "description": "0.5 vMF((-1,-1/4,0),40) + 0.5 vMF((-1,1/4,0),40), n=500, h=0.1, level 1.0; stereographic d_H",
        "manifold": {"kind": "sphere"},
        "law": {
            "kind": "mixture",
            "weights": [0.5, 0.5],
            "components": [
                {"kind": "vmf", "mu": [-1.0, -0.25, 0.0], "kappa": 40.0},
                {"kind": "vmf", "mu": [-1.0, 0.25, 0.0], "kappa": 40.0},
            ],
        },
        "n": 500,
        "h": 0.1,
        "level": 1.0,
        "hull_radius": 0.2,
        "grid": {"resolution": [512, 256]},
        "distance": "boundaries",
        "metric": "ambient",
        "projection": {"pole": [1.0, 0.0, 0.0]},
    },
}


def list_presets() -> list[tuple[str, str]]:
    return [(name, p.get("description", "")) for name, p in PRESETS.items()]


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return copy.deepcopy(PRESETS[name])


# ----------------------------------------------------------------------------
# validation


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_law(law, path: str, out: list) -> str | None:
    """Validate a law dict; returns its manifold kind name."""
    if not isinstance(law, dict):
        out.append((path, "must be an object"))
        return None
    kind = law.get("kind")
    allowed = {
        "wishart": {"kind", "sigma", "dof"},
        "mvm": {"kind", "mu", "kappa", "delta"},
        "vmf": {"kind", "mu", "kappa"},
        "uniform": {"kind", "manifold"},
        "mixture": {"kind", "weights", "components"},
    }
    if kind not in allowed:
        out.append((f"{path}.kind", f"must be one of {sorted(allowed)}"))
        return None
    for key in sorted(set(law) - allowed[kind]):
        out.append((f"{path}.{key}", "unknown key"))
    for key in sorted(allowed[kind] - set(law) - {"manifold"}):
        out.append((f"{path}.{key}", "missing"))
    if kind == "wishart":
        s = law.get("sigma")
        try:
            arr = np.asarray(s, dtype=float)
            ok = arr.shape == (2, 2) and np.allclose(arr, arr.T) and arr[0, 0] > 0 and np.linalg.det(arr) > 0
        except (TypeError, ValueError):
            ok = False
        if "sigma" in law and not ok:
            out.append((f"{path}.sigma", "must be a symmetric positive-definite 2x2 matrix"))
        dof = law.get("dof")
        if "dof" in law and not (isinstance(dof, int) and dof >= 2):
            out.append((f"{path}.dof", "must be an integer >= 2"))
        return "spd"
    if kind == "mvm":
        for key in ("mu", "kappa"):
            v = law.get(key)
            if key in law and not (isinstance(v, list) and len(v) == 2 and all(_is_number(x) for x in v)):
                out.append((f"{path}.{key}", "must be two numbers"))
        if isinstance(law.get("kappa"), list) and any(_is_number(k) and k < 0 for k in law["kappa"]):
            out.append((f"{path}.kappa", "must be nonnegative"))
        d = law.get("delta")
        if "delta" in law and not _is_number(d):
            try:
                arr = np.asarray(d, dtype=float)
                ok = arr.shape == (2, 2) and arr[0, 0] == 0 and arr[1, 1] == 0 and arr[0, 1] == arr[1, 0]
            except (TypeError, ValueError):
                ok = False
            if not ok:
                out.append((f"{path}.delta", "must be a symmetric 2x2 matrix with zero diagonal"))
        return "torus"
    if kind == "vmf":
        mu = law.get("mu")
        if "mu" in law and not (
            isinstance(mu, list) and len(mu) == 3 and all(_is_number(x) for x in mu) and any(x != 0 for x in mu)
        ):
            out.append((f"{path}.mu", "must be a nonzero 3-vector"))
        k = law.get("kappa")
        if "kappa" in law and not (_is_number(k) and k >= 0):
            out.append((f"{path}.kappa", "must be a nonnegative number"))
        return "sphere"
    if kind == "uniform":
        return law.get("manifold", "hemisphere")
    weights, comps = law.get("weights"), law.get("components")
    if not (isinstance(weights, list) and all(_is_number(w) for w in weights)):
        out.append((f"{path}.weights", "must be a list of numbers"))
        weights = None
    if not (isinstance(comps, list) and comps):
        out.append((f"{path}.components", "must be a nonempty list"))
        return None
    if weights is not None:
        if len(weights) != len(comps):
            out.append((f"{path}.weights", "need one weight per component"))
        if any(w < 0 for w in weights):
            out.append((f"{path}.weights", "must be nonnegative"))
        if abs(sum(weights) - 1) > 1e-12:
            out.append((f"{path}.weights", f"must sum to 1 (sum is {sum(weights)!r})"))
    kinds = {_check_law(c, f"{path}.components[{i}]", out) for i, c in enumerate(comps)}
    if len(kinds) > 1:
        out.append((f"{path}.components", "components live on different manifolds"))
    return kinds.pop() if len(kinds) == 1 else None


def validate_config(cfg) -> list[tuple[str, str]]:
    """Every invariant violation as ``(field path, message)``; empty when valid."""
    out: list[tuple[str, str]] = []
    if not isinstance(cfg, dict):
        return [("$", "config must be a JSON object")]
    for key in sorted(set(cfg) - set(CONFIG_FIELDS)):
        out.append((key, "unknown key"))
    for key in REQUIRED:
        if cfg.get(key) is None:
            out.append((key, "missing"))

    man = cfg.get("manifold")
    man_kind = None
    if isinstance(man, dict):
        man_kind = man.get("kind")
        keys = {"sphere": {"kind"}, "spd": {"kind"}, "torus": {"kind", "R", "r"}, "hemisphere": {"kind", "cap_angle"}}
        if man_kind not in keys:
            out.append(("manifold.kind", f"must be one of {sorted(keys)}"))
        else:
            for key in sorted(set(man) - keys[man_kind]):
                out.append((f"manifold.{key}", "unknown key"))
            if man_kind == "torus":
                R, r = man.get("R", 2.0), man.get("r", 1.0)
                if not (_is_number(R) and _is_number(r) and 0 < r < R):
                    out.append(("manifold", "torus needs 0 < r < R"))
            if man_kind == "hemisphere":
                cap = man.get("cap_angle", math.pi / 2)
                if not (_is_number(cap) and 0 < cap <= math.pi / 2):
                    out.append(("manifold.cap_angle", "must lie in (0, pi/2]"))
    elif man is not None:
        out.append(("manifold", "must be an object"))

    if cfg.get("law") is not None:
        law_kind = _check_law(cfg["law"], "law", out)
        if law_kind and man_kind and law_kind != man_kind:
            if not (law_kind in ("hemisphere", "sphere", "torus") and cfg["law"].get("kind") == "uniform"):
                out.append(("law", f"a {law_kind} law cannot be sampled on a {man_kind}"))

    n = cfg.get("n")
    if n is not None and not (isinstance(n, int) and not isinstance(n, bool) and n >= 1):
        out.append(("n", "must be a positive integer"))
    h = cfg.get("h")
    if h is not None and not (_is_number(h) and h > 0):
        out.append(("h", "must be a positive number"))
    level = cfg.get("level")
    if level is not None and not (_is_number(level) and level > 0):
        out.append(("level", "must be a positive number"))
    r = cfg.get("hull_radius")
    if r is not None and not (_is_number(r) and r > 0):
        out.append(("hull_radius", "must be a positive number"))
    reps = cfg.get("replications", 20)
    if not (isinstance(reps, int) and not isinstance(reps, bool) and reps >= 1):
        out.append(("replications", "must be an integer >= 1"))
    seed = cfg.get("seed", 0)
    if not (isinstance(seed, int) and not isinstance(seed, bool) and 0 <= seed <= MAX_SEED):
        out.append(("seed", "must be an unsigned 64-bit integer"))
    for key, allowed in (("distance", DISTANCES), ("metric", METRICS), ("measure", MEASURES)):
        if key in cfg and cfg[key] not in allowed:
            out.append((key, f"must be one of {list(allowed)}"))
    if cfg.get("distance") == "hull-vs-levelset" and cfg.get("hull_radius") is None:
        out.append(("hull_radius", "required when distance is hull-vs-levelset"))
    if "corrected" in cfg and not isinstance(cfg["corrected"], bool):
        out.append(("corrected", "must be true or false"))
    k = cfg.get("graph_k", 8)
    if not (isinstance(k, int) and k >= 3):
        out.append(("graph_k", "must be an integer >= 3"))
    if cfg.get("measure") == "chart" and man_kind not in (None, "torus", "spd"):
        out.append(("measure", "chart densities are only supported on the torus and the SPD cone"))
    if cfg.get("metric") == "chart" and man_kind not in (None, "torus", "spd"):
        out.append(("metric", "the chart metric is only defined on the torus and the SPD cone"))

    grid = cfg.get("grid")
    if isinstance(grid, dict):
        for key in sorted(set(grid) - {"resolution", "layout", "box"}):
            out.append((f"grid.{key}", "unknown key"))
        layout = grid.get("layout", "lattice")
        if layout not in ("lattice", "fibonacci"):
            out.append(("grid.layout", "must be 'lattice' or 'fibonacci'"))
        res = grid.get("resolution")
        want = 1 if layout == "fibonacci" else (3 if man_kind == "spd" else 2)
        res_list = res if isinstance(res, list) else [res]
        if not (len(res_list) == want and all(isinstance(v, int) and v >= 8 for v in res_list)):
            out.append(("grid.resolution", f"need {want} integer count(s) of at least 8"))
        if "box" in grid:
            box = grid["box"]
            ok = (
                isinstance(box, list)
                and len(box) == 3
                and all(isinstance(b, list) and len(b) == 2 and all(_is_number(v) for v in b) and b[0] < b[1] for b in box)
            )
            if not ok or man_kind != "spd":
                out.append(("grid.box", "must be three [lo, hi] pairs on the spd manifold"))
    elif grid is not None:
        out.append(("grid", "must be an object"))

    proj = cfg.get("projection")
    if proj is not None:
        pole = proj.get("pole") if isinstance(proj, dict) else None
        if not (isinstance(pole, list) and len(pole) == 3 and all(_is_number(v) for v in pole) and any(pole)):
            out.append(("projection.pole", "must be a nonzero 3-vector"))
        if isinstance(proj, dict):
            for key in sorted(set(proj) - {"pole"}):
                out.append((f"projection.{key}", "unknown key"))
        if man_kind not in (None, "sphere", "hemisphere"):
            out.append(("projection", "stereographic projection needs the sphere"))
    return out


# ----------------------------------------------------------------------------
# config object


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    raw: dict
    spec: ManifoldSpec
    law: object

    @classmethod
    def from_dict(cls, cfg: dict) -> ExperimentConfig:
        diags = validate_config(cfg)
        if diags:
            raise ConfigError(diags)
        full = {**copy.deepcopy(CONFIG_FIELDS), **copy.deepcopy(cfg)}
        man = full["manifold"]
        spec = ManifoldSpec(
            man["kind"],
            major_radius=float(man.get("R", 2.0)),
            minor_radius=float(man.get("r", 1.0)),
            cap_angle=float(man.get("cap_angle", math.pi / 2)),
        )
        return cls(raw=full, spec=spec, law=law_from_dict(full["law"]))

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([("$", f"invalid JSON: {exc}")]) from exc
        return cls.from_dict(data)

    def with_overrides(self, **kw) -> ExperimentConfig:
        data = copy.deepcopy(self.raw)
        data.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig.from_dict(data)

    def __getattr__(self, item):
        raw = self.__dict__.get("raw")
        if raw is not None and item in raw:
            return raw[item]
        raise AttributeError(item)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def replication_seed(self, rep: int) -> int:
        return (int(self.seed) ^ rep) & MAX_SEED


# ----------------------------------------------------------------------------
# running


@dataclass
class Row:
    replication: int
    seed: int
    d_H: float = math.nan
    d_mu: float = math.nan
    sup_error: float = math.nan
    seconds: float = 0.0
    error: str | None = None


@dataclass
class Artifacts:
    sample: SamplePointSet
    truth: DensityField
    estimate: DensityField
    true_set: GridSubset
    est_set: GridSubset
    hull: GridSubset | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[Row]
    artifacts: Artifacts | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok_rows(self) -> list[Row]:
        return [r for r in self.rows if r.error is None]

    @property
    def failed(self) -> int:
        return sum(r.error is not None for r in self.rows)

    def aggregate(self, columns=("d_H", "d_mu", "sup_error", "seconds")) -> dict:
        out = {}
        for col in columns:
            vals = [getattr(r, col) for r in self.ok_rows]
            out[col] = {
                "mean": float(sum(vals) / len(vals)) if vals else math.nan,
                "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else math.nan,
            }
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RESULT_COLUMNS)
            for r in self.rows:
                w.writerow([r.replication, r.seed, repr(r.d_H), repr(r.d_mu), repr(r.sup_error), f"{r.seconds:.3f}"])

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "replications": len(self.rows),
            "failed": self.failed,
            "errors": {r.replication: r.error for r in self.rows if r.error},
            # timings stay in results.csv so the summary is reproducible byte for byte
            "aggregate": self.aggregate(("d_H", "d_mu", "sup_error")),
        }


class Context:
    """Everything shared by replications: grid, truth, level set, graph."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        g = config.grid
        self.grid = make_grid(config.spec, g["resolution"], layout=g.get("layout", "lattice"), box=g.get("box"))
        self.truth = truth_field(config.law, self.grid, config.measure)
        self.true_set = level_set(self.truth, config.level)
        if not self.true_set.mask.any():
            top = float(self.truth.values.max())
            raise ConfigError([("level", f"{config.level} exceeds the largest true density on the grid ({top:.4g})")])
        needs_graph = config.spec.kind is Kind.TORUS and (
            config.metric == "geodesic" or config.hull_radius is not None
        )
        self.graph = geodesic_graph_build(self.grid, k=config.graph_k) if needs_graph else None

    def bandwidth(self, sample: SamplePointSet) -> float:
        if self.config.h is not None:
            return float(self.config.h)
        from .density import default_bandwidth

        return default_bandwidth(sample.points, self.config.spec.intrinsic_dim)

    def point_set(self, subset: GridSubset) -> FinitePointSet:
        cfg = self.config
        g = self.grid
        pts = g.points[subset.mask]
        if cfg.projection is not None:
            return FinitePointSet(stereographic(pts, cfg.projection["pole"]), "ambient")
        return FinitePointSet(pts, cfg.metric, g.spec, g.intrinsic[subset.mask])

    def evaluator(self, sample: SamplePointSet, h: float):
        cfg = self.config

        def fn(x):
            vals = evaluate_points(x, sample, h, cfg.spec, corrected=cfg.corrected)
            if cfg.measure == "chart":
                vals = vals * chart_jacobian(cfg.spec, chart(cfg.spec, x))
            return vals

        return fn

    def hull(self, sample: SamplePointSet, h: float) -> GridSubset:
        cfg = self.config
        a = sample_filter(sample, self.evaluator(sample, h), cfg.level)
        return r_convex_hull(a, self.grid, cfg.hull_radius, graph=self.graph)


def run_replication(ctx: Context, rep: int, keep_artifacts: bool = False) -> tuple[Row, Artifacts | None]:
    cfg = ctx.config
    seed = cfg.replication_seed(rep)
    row = Row(replication=rep, seed=seed)
    start = time.perf_counter()
    arts = None
    try:
        sample = sample_law(cfg.law, cfg.n, seed, cfg.spec)
        h = ctx.bandwidth(sample)
        est = evaluate_field(sample, h, ctx.grid, cfg.spec, corrected=cfg.corrected, measure=cfg.measure)
        est_set = level_set(est, cfg.level)
        row.d_mu = distance_in_measure(ctx.true_set, est_set)
        row.sup_error = sup_error(est, ctx.truth)
        hull = None
        if cfg.distance == "regions":
            row.d_H = hausdorff(ctx.point_set(ctx.true_set), ctx.point_set(est_set), ctx.graph)
        elif cfg.distance == "boundaries":
            row.d_H = hausdorff(
                ctx.point_set(boundary_of(ctx.true_set)), ctx.point_set(boundary_of(est_set)), ctx.graph
            )
        else:
            hull = ctx.hull(sample, h)
            row.d_H = hausdorff(ctx.point_set(ctx.true_set), ctx.point_set(hull), ctx.graph)
        if keep_artifacts:
            if hull is None and cfg.hull_radius is not None:
                hull = ctx.hull(sample, h)
            arts = Artifacts(sample, ctx.truth, est, ctx.true_set, est_set, hull)
    except Exception as exc:  # any module error fails only this replication
        log.warning("replication %d failed: %s", rep, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    row.seconds = time.perf_counter() - start
    return row, arts


class RunFailed(RuntimeError):
    pass


def run_experiment(config: ExperimentConfig, threads: int = 1, keep_artifacts: bool = True) -> ExperimentResult:
    ctx = Context(config)
    reps = range(int(config.replications))

    def job(rep):
        return run_replication(ctx, rep, keep_artifacts=keep_artifacts and rep == 0)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(job, reps))
    else:
        outcomes = [job(rep) for rep in reps]
    rows = [o[0] for o in outcomes]
    rows.sort(key=lambda r: r.replication)
    result = ExperimentResult(config, rows, outcomes[0][1] if outcomes else None)
    if result.failed * 2 > len(rows):
        first = next(r.error for r in rows if r.error)
        raise RunFailed(f"{result.failed} of {len(rows)} replications failed; first error: {first}")
    return result


# ----------------------------------------------------------------------------
# output


def _write_points(path: Path, header: list[str], table: np.ndarray) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in table:
            w.writerow([repr(float(v)) for v in row])
    return path


def _subset_table(ctx_cfg: ExperimentConfig, subset: GridSubset) -> tuple[list[str], np.ndarray]:
    g = subset.grid
    idx = subset.indices
    header = ["idx", "x1", "x2", "x3"]
    cols = [idx[:, None].astype(float), g.points[idx]]
    if g.spec.kind is not Kind.SPD:
        header += ["u1", "u2"]
        cols.append(g.intrinsic[idx])
    if ctx_cfg.projection is not None:
        header += ["p1", "p2"]
        cols.append(stereographic(g.points[idx], ctx_cfg.projection["pole"]))
    return header, np.hstack(cols) if len(idx) else np.empty((0, len(header)))


def emit_plot_data(result: ExperimentResult, out_dir) -> list[Path]:
    """CSV point files for replication 0: sample, both boundaries and the hull."""
    arts = result.artifacts
    if arts is None:
        raise ValueError("result carries no replication-0 artifacts")
    cfg = result.config
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        projected = None
        if cfg.projection is not None:
            projected = stereographic(arts.sample.points, cfg.projection["pole"])
        path = out / "sample.csv"
        arts.sample.to_csv(path, projected=projected)
        written.append(path)
        for name, subset in (
            ("true_boundary.csv", boundary_of(arts.true_set)),
            ("estimated_boundary.csv", boundary_of(arts.est_set)),
        ):
            header, table = _subset_table(cfg, subset)
            written.append(_write_points(out / name, header, table))
        if arts.hull is not None:
            header, table = _subset_table(cfg, arts.hull)
            written.append(_write_points(out / "hull.csv", header, table))
    except OSError as exc:
        raise OSError(f"could not write plot data under {out}: {exc}") from exc
    return written


def write_results(result: ExperimentResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    result.to_csv(csv_path)
    summary = out / "summary.json"
    summary.write_text(json.dumps(result.summary(), indent=2, sort_keys=True, default=float) + "\n")
    return [csv_path, summary]


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "PRESETS",
    "RunFailed",
    "emit_plot_data",
    "law_to_dict",
    "list_presets",
    "preset",
    "run_experiment",
    "validate_config",
    "write_results",
]
