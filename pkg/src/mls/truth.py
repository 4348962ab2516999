"""Closed-form target densities for the simulation scenarios."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .density import DensityField, to_measure
from .geometry import DomainError, EvaluationGrid, Kind, ManifoldSpec, chart, chart_jacobian
from .setops import GridSubset, level_set

log = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12


# ----------------------------------------------------------------------------
# von Mises-Fisher on S^2


def _vmf_log_const(kappa: float) -> float:
    """log C(kappa) - kappa, i.e. the log-density at x = mu is 0 after adding kappa."""
    if kappa == 0:
        return -np.log(4 * np.pi)
    # C(k) e^k = k / (2 pi (1 - e^{-2k}))
    return np.log(kappa) - np.log(2 * np.pi) - np.log(-np.expm1(-2 * kappa))


def vmf_density(x, mu, kappa: float):
    """``C(kappa) exp(kappa mu.x)`` with ``C(kappa) = kappa / (4 pi sinh kappa)``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(np.atleast_2d(x), axis=1)
    if np.any(np.abs(norms - 1) > 1e-9):
        raise DomainError("vMF density needs unit vectors")
    mu = _unit(mu)
    if kappa == 0:
        out = np.full(norms.shape, 1 / (4 * np.pi))
    else:
        out = np.exp(_vmf_log_const(kappa) + kappa * (np.atleast_2d(x) @ mu - 1.0))
    return float(out[0]) if x.ndim == 1 else out


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise DomainError("mean direction must be nonzero")
    return v / n


# ----------------------------------------------------------------------------
# sine-model bivariate von Mises on T^2


def _mvm_exponent(theta, mu, kappa, coupling: float) -> np.ndarray:
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    d = theta - np.asarray(mu, dtype=float)
    c, s = np.cos(d), np.sin(d)
    # s^T Delta s / 2 with zero diagonal = coupling * s1 * s2
    return kappa[0] * c[:, 0] + kappa[1] * c[:, 1] + coupling * s[:, 0] * s[:, 1]


def _coupling(delta) -> float:
    d = np.asarray(delta, dtype=float)
    if d.ndim == 0:
        return float(d)
    if d.shape != (2, 2) or d[0, 0] != 0 or d[1, 1] != 0 or d[0, 1] != d[1, 0]:
        raise DomainError("Delta must be a symmetric 2x2 matrix with zero diagonal")
    return float(d[0, 1])


def mvm_log_normalizer(kappa, delta, resolution: int = 128, max_resolution: int = 8192, rtol: float = 1e-6) -> float:
    """log Z by the periodic trapezoidal rule, doubled until it settles."""
    kappa = np.asarray(kappa, dtype=float)
    coupling = _coupling(delta)
    if resolution < 128:
        raise ValueError("quadrature resolution must be at least 128")
    shift = kappa.sum() + abs(coupling)

    def log_z(m: int) -> float:
        g = np.arange(m) * (2 * np.pi / m)
        t1, t2 = np.meshgrid(g, g, indexing="ij")
        e = _mvm_exponent(np.column_stack([t1.ravel(), t2.ravel()]), (0.0, 0.0), kappa, coupling)
        return shift + np.log(np.exp(e - shift).sum() * (2 * np.pi / m) ** 2)

    prev = log_z(resolution)
    m = resolution
    while m < max_resolution:
        m *= 2
        cur = log_z(m)
        if abs(np.expm1(cur - prev)) < rtol:
            return cur
        prev = cur
    raise RuntimeError(f"normalizer did not converge by resolution {max_resolution}")


def mvm_normalizer(kappa, delta, resolution: int = 128) -> float:
    return float(np.exp(mvm_log_normalizer(kappa, delta, resolution)))


def mvm_density(theta, mu, kappa, delta, log_z: float | None = None):
    """Angle density ``exp{kappa.c + s^T Delta s / 2} / Z`` on [0, 2pi)^2."""
    kappa = np.asarray(kappa, dtype=float)
    coupling = _coupling(delta)
    if log_z is None:
        log_z = mvm_log_normalizer(kappa, delta)
    out = np.exp(_mvm_exponent(theta, mu, kappa, coupling) - log_z)
    return float(out[0]) if np.ndim(theta) == 1 else out


# ----------------------------------------------------------------------------
# Wishart on SPD(2)


def wishart_density(S, sigma, dof: float):
    """Wishart W_2(sigma, dof) density in (a, b, c) Lebesgue coordinates."""
    sigma = np.asarray(sigma, dtype=float)
    S = np.asarray(S, dtype=float)
    rows = np.atleast_2d(S)
    a, b, c = rows.T
    det = a * c - b * b
    if np.any(det < 0) or np.any(a < 0) or np.any(c < 0):
        raise DomainError("S is not positive semidefinite")
    if dof <= 1:
        raise ValueError("degrees of freedom must exceed 1")
    sdet = np.linalg.det(sigma)
    if sigma[0, 0] <= 0 or sdet <= 0:
        raise DomainError("sigma is not positive definite")
    inv = np.linalg.inv(sigma)
    trace = inv[0, 0] * a + 2 * inv[0, 1] * b + inv[1, 1] * c
    log_gamma2 = 0.5 * np.log(np.pi) + gammaln(dof / 2) + gammaln(dof / 2 - 0.5)
    log_norm = dof * np.log(2) + dof / 2 * np.log(sdet) + log_gamma2
    with np.errstate(divide="ignore"):
        log_det = np.log(det)
    expo = (dof - 3) / 2
    out = np.where(det > 0, np.exp(expo * log_det - trace / 2 - log_norm), 0.0 if expo > 0 else np.inf)
    return float(out[0]) if S.ndim == 1 else out


# ----------------------------------------------------------------------------
# laws


@dataclass(frozen=True)
class Wishart2:
    sigma: tuple
    dof: int

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.shape != (2, 2) or not np.allclose(s, s.T) or s[0, 0] <= 0 or np.linalg.det(s) <= 0:
            raise DomainError("sigma must be a 2x2 SPD matrix")
        object.__setattr__(self, "sigma", tuple(map(tuple, s.tolist())))

    kind = "wishart"
    manifold = Kind.SPD

    def density(self, points, spec: ManifoldSpec) -> np.ndarray:
        return wishart_density(points, self.sigma, self.dof)


@dataclass(frozen=True)
class MultivariateVonMises:
    mu: tuple
    kappa: tuple
    delta: float

    kind = "mvm"
    manifold = Kind.TORUS

    def __post_init__(self):
        object.__setattr__(self, "delta", _coupling(self.delta))
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "kappa", tuple(float(v) for v in self.kappa))
        if len(self.mu) != 2 or len(self.kappa) != 2:
            raise DomainError("mu and kappa need two components")
        if min(self.kappa) < 0:
            raise DomainError("kappa must be nonnegative")

    def log_normalizer(self) -> float:
        return _cached_log_z(self.kappa, self.delta)

    def angle_density(self, theta) -> np.ndarray:
        return np.atleast_1d(mvm_density(theta, self.mu, self.kappa, self.delta, self.log_normalizer()))

    def density(self, points, spec: ManifoldSpec) -> np.ndarray:
        """Density per unit surface area of the embedded torus."""
        u = np.atleast_2d(chart(spec, points))
        return self.angle_density(u) / chart_jacobian(spec, u)


_LOG_Z_CACHE: dict = {}


def _cached_log_z(kappa, coupling) -> float:
    key = (tuple(kappa), coupling)
    if key not in _LOG_Z_CACHE:
        _LOG_Z_CACHE[key] = mvm_log_normalizer(kappa, coupling)
    return _LOG_Z_CACHE[key]


@dataclass(frozen=True)
class VonMisesFisher:
    mu: tuple
    kappa: float

    kind = "vmf"
    manifold = Kind.SPHERE

    def __post_init__(self):
        raw = np.asarray(self.mu, dtype=float)
        unit = _unit(raw)
        if abs(np.linalg.norm(raw) - 1) > 1e-12:
            log.info("normalising vMF mean %s to %s", raw.tolist(), unit.tolist())
        object.__setattr__(self, "mu", tuple(unit.tolist()))
        if self.kappa < 0:
            raise DomainError("kappa must be nonnegative")

    def density(self, points, spec: ManifoldSpec) -> np.ndarray:
        return np.atleast_1d(vmf_density(points, self.mu, self.kappa))


@dataclass(frozen=True)
class UniformLaw:
    """Uniform law over a manifold of finite volume."""

    manifold: Kind = Kind.HEMISPHERE
    kind = "uniform"

    def density(self, points, spec: ManifoldSpec) -> np.ndarray:
        vol = spec.total_volume
        if vol is None:
            raise DomainError(f"no uniform law on the unbounded {spec.kind.value}")
        return np.full(len(np.atleast_2d(points)), 1.0 / vol)


@dataclass(frozen=True)
class Mixture:
    weights: tuple
    components: tuple

    kind = "mixture"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.components) or len(w) == 0:
            raise DomainError("one weight per component is required")
        if np.any(w < 0) or abs(w.sum() - 1) > WEIGHT_TOL:
            raise DomainError(f"mixture weights must be nonnegative and sum to 1, got {w.sum()!r}")
        kinds = {c.manifold for c in self.components}
        if len(kinds) != 1:
            raise DomainError("mixture components live on different manifolds")
        object.__setattr__(self, "weights", tuple(w.tolist()))
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def manifold(self) -> Kind:
        return self.components[0].manifold

    def density(self, points, spec: ManifoldSpec) -> np.ndarray:
        total = 0.0
        for w, comp in zip(self.weights, self.components):
            if w > 0:
                total = total + w * comp.density(points, spec)
        return np.atleast_1d(total) * np.ones(len(np.atleast_2d(points)))

    def angle_density(self, theta) -> np.ndarray:
        return sum(w * c.angle_density(theta) for w, c in zip(self.weights, self.components))


def vmf_mixture_density(x, weights=(0.5, 0.5), means=((-1, -0.25, 0), (-1, 0.25, 0)), kappa: float = 40.0):
    """Two-component vMF mixture; means are normalised onto the sphere first."""
    law = Mixture(weights, tuple(VonMisesFisher(m, kappa) for m in means))
    out = law.density(x, ManifoldSpec.sphere())
    return float(out[0]) if np.ndim(x) == 1 else out


def truth_field(law, grid: EvaluationGrid, measure: str = "volume") -> DensityField:
    """Exact density of ``law`` on every grid point."""
    if law.manifold is not grid.spec.kind and not (
        law.kind == "uniform" and grid.spec.total_volume is not None
    ):
        raise DomainError(f"{law.kind} law does not live on a {grid.spec.kind.value}")
    values = law.density(grid.points, grid.spec)
    return DensityField(
        grid=grid,
        values=to_measure(values, grid, measure),
        provenance="true-density",
        measure=measure,
        meta={"law": law_to_dict(law)},
    )


def true_level_set(field: DensityField, level: float) -> GridSubset:
    return level_set(field, level)


# ----------------------------------------------------------------------------
# (de)serialisation


def law_to_dict(law) -> dict:
    if isinstance(law, Wishart2):
        return {"kind": "wishart", "sigma": [list(r) for r in law.sigma], "dof": law.dof}
    if isinstance(law, MultivariateVonMises):
        return {"kind": "mvm", "mu": list(law.mu), "kappa": list(law.kappa), "delta": [[0.0, law.delta], [law.delta, 0.0]]}
    if isinstance(law, VonMisesFisher):
        return {"kind": "vmf", "mu": list(law.mu), "kappa": law.kappa}
    if isinstance(law, UniformLaw):
        return {"kind": "uniform", "manifold": law.manifold.value}
    if isinstance(law, Mixture):
        return {"kind": "mixture", "weights": list(law.weights), "components": [law_to_dict(c) for c in law.components]}
    raise TypeError(f"not a law: {law!r}")


def law_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "wishart":
        return Wishart2(d["sigma"], int(d["dof"]))
    if kind == "mvm":
        return MultivariateVonMises(d["mu"], d["kappa"], d["delta"])
    if kind == "vmf":
        return VonMisesFisher(d["mu"], float(d["kappa"]))
    if kind == "uniform":
        return UniformLaw(Kind(d.get("manifold", "hemisphere")))
    if kind == "mixture":
        return Mixture(d["weights"], tuple(law_from_dict(c) for c in d["components"]))
    raise DomainError(f"unknown law kind {kind!r}")
