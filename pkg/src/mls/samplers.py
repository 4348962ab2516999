"""Seeded samplers for the target laws.

Every sampler draws from ``numpy.random.Generator(PCG64(seed))``; PCG64 is a
published 128-bit-state generator, and numpy's normal and uniform transforms
are deterministic, so ``(law, n, seed)`` fixes the output bit for bit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import TWO_PI, Kind, ManifoldSpec, chart, embed
from .truth import (
    Mixture,
    MultivariateVonMises,
    UniformLaw,
    VonMisesFisher,
    Wishart2,
    _coupling,
    _mvm_exponent,
    law_to_dict,
)

MIN_ACCEPTANCE = 1e-6
PROPOSAL_BATCH = 1 << 16


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


@dataclass(frozen=True, eq=False)
class SamplePointSet:
    points: np.ndarray
    law: object
    seed: int
    spec: ManifoldSpec
    intrinsic: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path, projected: np.ndarray | None = None, sidecar: bool = True) -> None:
        path = Path(path)
        header = ["x1", "x2", "x3"]
        cols = [self.points]
        if self.intrinsic is not None and self.spec.kind is not Kind.SPD:
            header += ["u1", "u2"]
            cols.append(self.intrinsic)
        if projected is not None:
            header += ["p1", "p2"]
            cols.append(projected)
        table = np.hstack(cols)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in table:
                w.writerow([repr(float(v)) for v in row])
        if sidecar:
            meta = {"law": law_to_dict(self.law), "n": self.n, "seed": self.seed, "manifold": self.spec.to_dict()}
            path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------------------
# raw draws from a shared generator


def _draw_wishart(rng, sigma, dof: int, n: int) -> np.ndarray:
    chol = np.linalg.cholesky(np.asarray(sigma, dtype=float))
    z = rng.standard_normal((n, dof, 2)) @ chol.T
    a = np.einsum("nk,nk->n", z[:, :, 0], z[:, :, 0])
    b = np.einsum("nk,nk->n", z[:, :, 0], z[:, :, 1])
    c = np.einsum("nk,nk->n", z[:, :, 1], z[:, :, 1])
    return np.column_stack([a, b, c])


def _draw_mvm_angles(rng, mu, kappa, delta, n: int) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    coupling = _coupling(delta)
    if np.any(kappa < 0):
        raise ValueError("kappa must be nonnegative")
    # |c_i| <= 1 and |s1 s2 coupling| <= |coupling|
    envelope = kappa.sum() + abs(coupling)
    out = np.empty((n, 2))
    filled = 0
    first = True
    while filled < n:
        prop = rng.uniform(0.0, TWO_PI, size=(PROPOSAL_BATCH, 2))
        u = rng.uniform(size=PROPOSAL_BATCH)
        keep = np.log(u) < _mvm_exponent(prop, mu, kappa, coupling) - envelope
        if first and keep.mean() < MIN_ACCEPTANCE:
            raise RuntimeError(
                f"rejection sampler acceptance {keep.mean():.2e} is below {MIN_ACCEPTANCE}; check kappa and Delta"
            )
        first = False
        acc = prop[keep][: n - filled]
        out[filled : filled + len(acc)] = acc
        filled += len(acc)
    return out


def _rotation_to(mu: np.ndarray) -> np.ndarray:
    """Rotation matrix taking the north pole (0, 0, 1) to ``mu``."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(z @ mu)
    if c > 1 - 1e-15:
        return np.eye(3)
    if c < -1 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    v = np.cross(z, mu)
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1 + c)


def _draw_vmf(rng, mu, kappa: float, n: int) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    mu = mu / np.linalg.norm(mu)
    u = rng.uniform(size=n)
    if kappa == 0:
        w = 2 * u - 1
    else:
        # inverse CDF of the cosine to mu: w = 1 + log(u + (1 - u) e^{-2k}) / k
        w = 1 + np.log(u + (1 - u) * np.exp(-2 * kappa)) / kappa
    w = np.clip(w, -1.0, 1.0)
    ang = rng.uniform(0.0, TWO_PI, size=n)
    s = np.sqrt(1 - w * w)
    north = np.column_stack([s * np.cos(ang), s * np.sin(ang), w])
    x = north @ _rotation_to(mu).T
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _draw_uniform_cap(rng, cap: float, n: int) -> np.ndarray:
    z = rng.uniform(np.cos(cap), 1.0, size=n)
    ang = rng.uniform(0.0, TWO_PI, size=n)
    s = np.sqrt(1 - z * z)
    return np.column_stack([s * np.cos(ang), s * np.sin(ang), z])


def _draw(rng, law, n: int, spec: ManifoldSpec) -> np.ndarray:
    """Ambient coordinates of n draws of ``law`` on ``spec``."""
    if n == 0:
        return np.empty((0, spec.ambient_dim))
    if isinstance(law, Wishart2):
        return _draw_wishart(rng, law.sigma, law.dof, n)
    if isinstance(law, MultivariateVonMises):
        return embed(spec, _draw_mvm_angles(rng, law.mu, law.kappa, law.delta, n))
    if isinstance(law, VonMisesFisher):
        return _draw_vmf(rng, law.mu, law.kappa, n)
    if isinstance(law, UniformLaw):
        if spec.kind is Kind.SPHERE:
            return _draw_uniform_cap(rng, np.pi, n)
        if spec.kind is Kind.HEMISPHERE:
            return _draw_uniform_cap(rng, spec.cap_angle, n)
        if spec.kind is Kind.TORUS:
            # volume-uniform: accept phi with probability proportional to R + r cos(phi)
            R, r = spec.major_radius, spec.minor_radius
            out = []
            while sum(len(o) for o in out) < n:
                phi = rng.uniform(0.0, TWO_PI, size=2 * n)
                keep = rng.uniform(size=2 * n) * (R + r) < R + r * np.cos(phi)
                out.append(phi[keep])
            phi = np.concatenate(out)[:n]
            theta = rng.uniform(0.0, TWO_PI, size=n)
            return embed(spec, np.column_stack([theta, phi]))
        raise ValueError(f"no uniform law on the {spec.kind.value}")
    if isinstance(law, Mixture):
        labels = rng.choice(len(law.weights), size=n, p=np.asarray(law.weights))
        out = np.empty((n, spec.ambient_dim))
        for k, comp in enumerate(law.components):
            sel = labels == k
            out[sel] = _draw(rng, comp, int(sel.sum()), spec)
        return out
    raise TypeError(f"no sampler for {law!r}")


def _default_spec(law) -> ManifoldSpec:
    kind = law.manifold
    return {
        Kind.SPD: ManifoldSpec.spd(),
        Kind.TORUS: ManifoldSpec.torus(),
        Kind.SPHERE: ManifoldSpec.sphere(),
        Kind.HEMISPHERE: ManifoldSpec.hemisphere(),
    }[kind]


def sample_law(law, n: int, seed: int, spec: ManifoldSpec | None = None) -> SamplePointSet:
    spec = _default_spec(law) if spec is None else spec
    pts = _draw(make_rng(seed), law, int(n), spec)
    intrinsic = None if spec.kind is Kind.SPD else chart(spec, pts) if len(pts) else np.empty((0, 2))
    return SamplePointSet(points=pts, law=law, seed=int(seed), spec=spec, intrinsic=intrinsic)


def sample_wishart(sigma, dof: int, n: int, seed: int) -> SamplePointSet:
    return sample_law(Wishart2(sigma, dof), n, seed, ManifoldSpec.spd())


def sample_mvm(mu, kappa, delta, n: int, seed: int, spec: ManifoldSpec | None = None) -> SamplePointSet:
    return sample_law(MultivariateVonMises(mu, kappa, delta), n, seed, spec or ManifoldSpec.torus())


def sample_vmf(mu, kappa: float, n: int, seed: int) -> SamplePointSet:
    return sample_law(VonMisesFisher(mu, kappa), n, seed, ManifoldSpec.sphere())


def sample_mixture(weights, components, n: int, seed: int, spec: ManifoldSpec | None = None) -> SamplePointSet:
    return sample_law(Mixture(tuple(weights), tuple(components)), n, seed, spec)
