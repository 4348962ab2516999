"""Acceptance criteria.

Every test prints one ``PASS``/``FAIL`` line (collected again in the
terminal summary by ``conftest.py``) and then asserts the same verdict.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from oracles import HULL_MANIFOLDS, hull_case, sampler_chi_square

from mls.density import evaluate_field, sup_error
from mls.experiment import ExperimentConfig, preset, run_experiment
from mls.geometry import ManifoldSpec, boundary_distance, make_grid
from mls.samplers import sample_law
from mls.truth import Mixture, MultivariateVonMises, UniformLaw, VonMisesFisher, Wishart2, truth_field

pytestmark = pytest.mark.slow

REPORT: list[str] = []
TESTS = Path(__file__).parent


def verdict(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
    REPORT.append(line)
    print(line)
    assert ok, line


def preset_means(name, replications=20, **overrides):
    cfg = ExperimentConfig.from_dict({**preset(name), "replications": replications, **overrides})
    res = run_experiment(cfg, keep_artifacts=False)
    return res.aggregate(("d_H",))["d_H"]["mean"], res


# reference means of d_H for the Wishart rows, n -> value
TABLE = {1000: 0.732, 5000: 0.6, 10000: 0.56, 20000: 0.4}


def test_wishart_table_trend():
    t0 = time.perf_counter()
    means = {n: preset_means(f"wishart-table1-{n}")[0] for n in TABLE}
    elapsed = time.perf_counter() - t0
    ns = sorted(means)
    decreasing = all(means[a] > means[b] for a, b in zip(ns, ns[1:]))
    close = {n: abs(means[n] - TABLE[n]) <= 0.15 for n in ns}
    detail = ", ".join(f"n={n} mean={means[n]:.3f} (ref {TABLE[n]})" for n in ns)
    detail += f"; decreasing={decreasing}; within 0.15: {sum(close.values())}/4; {elapsed:.0f}s of 1800s"
    verdict(1, "Wishart d_H trend", decreasing and all(close.values()) and elapsed <= 1800, detail)


def test_torus_curves():
    t0 = time.perf_counter()
    uni, _ = preset_means("torus-unimodal")
    mix, _ = preset_means("torus-mixture")
    elapsed = time.perf_counter() - t0
    ok = 0.02 <= uni <= 0.13 and 0.05 <= mix <= 0.20 and elapsed <= 300
    detail = f"unimodal {uni:.4f} in [0.02, 0.13], mixture {mix:.4f} in [0.05, 0.20]; {elapsed:.0f}s of 300s"
    verdict(2, "torus boundary curves", ok, detail)


def test_sphere_curve():
    t0 = time.perf_counter()
    mean, _ = preset_means("sphere-mixture")
    elapsed = time.perf_counter() - t0
    ok = 0.005 <= mean <= 0.04 and elapsed <= 120
    verdict(3, "sphere projected curve", ok, f"mean d_H {mean:.4f} in [0.005, 0.04]; {elapsed:.0f}s of 120s")


def test_sup_error_decreases():
    spec = ManifoldSpec.sphere()
    grid = make_grid(spec, (128, 64))
    law = Mixture((0.5, 0.5), (VonMisesFisher((-1, -0.25, 0), 40.0), VonMisesFisher((-1, 0.25, 0), 40.0)))
    truth = truth_field(law, grid)
    hits = 0
    for seed in range(10):
        errs = [sup_error(evaluate_field(sample_law(law, n, seed, spec), n ** (-1 / 6), grid), truth) for n in (500, 2000, 8000)]
        hits += errs[0] > errs[1] > errs[2]
    verdict(4, "sup error decreases in n", hits >= 8, f"strictly decreasing in {hits}/10 seeds (need 8)")


def test_boundary_correction():
    spec = ManifoldSpec.hemisphere()
    grid = make_grid(spec, (128, 32))
    truth = truth_field(UniformLaw(), grid).values
    h = 0.2
    near = boundary_distance(spec, grid.points) < h
    hits = 0
    for seed in range(10):
        s = sample_law(UniformLaw(), 5000, seed, spec)
        corrected = np.abs(evaluate_field(s, h, grid).values - truth)[near].mean()
        plain = np.abs(evaluate_field(s, h, grid, corrected=False).values - truth)[near].mean()
        hits += corrected < plain
    detail = f"corrected MAE below uncorrected in {hits}/10 seeds (need 8), h={h}, {near.sum()} points"
    verdict(5, "boundary correction", hits >= 8, detail)


def test_hull_oracle():
    mismatches = []
    for manifold in HULL_MANIFOLDS:
        for case in range(10):
            hull, ref = hull_case(manifold, case)
            if len(hull) > 500 or not np.array_equal(hull, ref):
                mismatches.append(f"{manifold}#{case}")
    verdict(6, "hull equals brute force", not mismatches, f"{40 - len(mismatches)}/40 cases identical" + (f", differing: {mismatches}" if mismatches else ""))


LAWS = {
    "wishart": (Wishart2([[0.25, 0.0], [0.0, 0.25]], 10), ManifoldSpec.spd()),
    "mvm": (MultivariateVonMises((np.pi / 2, 0.0), (20.0, 20.0), 1.0), ManifoldSpec.torus()),
    "vmf": (VonMisesFisher((-1, -0.25, 0), 40.0), ManifoldSpec.sphere()),
    "vmf-mixture": (
        Mixture((0.5, 0.5), (VonMisesFisher((-1, -0.25, 0), 40.0), VonMisesFisher((-1, 0.25, 0), 40.0))),
        ManifoldSpec.sphere(),
    ),
}


@pytest.mark.parametrize("name", sorted(LAWS))
def test_sampler_chi_square(name):
    law, spec = LAWS[name]
    p, stat, dof, mass = sampler_chi_square(sample_law(law, 100_000, 2024, spec), law, spec)
    verdict(6, f"chi-square {name}", p > 0.001, f"p={p:.4f} (alpha 0.001), stat={stat:.1f}, dof={dof}, mass={mass:.5f}")


PROPERTY_MODULES = ["test_geometry.py", "test_density.py", "test_truth.py", "test_samplers.py", "test_setops.py"]


def test_property_suites():
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_MODULES],
        cwd=TESTS,
        capture_output=True,
        text=True,
    )
    elapsed = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()
    ok = proc.returncode == 0 and elapsed <= 300
    verdict(7, "property suites", ok, f"{tail}; {elapsed:.0f}s of 300s")
