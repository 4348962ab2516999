import mpmath
import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components
from scipy.special import comb, ive

from mls.geometry import DomainError, ManifoldSpec, embed, make_grid
from mls.truth import (
    Mixture,
    MultivariateVonMises,
    UniformLaw,
    VonMisesFisher,
    Wishart2,
    law_from_dict,
    law_to_dict,
    mvm_density,
    mvm_log_normalizer,
    mvm_normalizer,
    true_level_set,
    truth_field,
    vmf_density,
    vmf_mixture_density,
    wishart_density,
)

SPHERE = ManifoldSpec.sphere()
TORUS = ManifoldSpec.torus()
SPD = ManifoldSpec.spd()


def sine_model_z(k1, k2, lam, terms=60):
    """Series for the sine-model normaliser in products of Bessel functions."""
    total = 0.0
    for m in range(terms):
        # ive carries exp(-k); restore it at the end
        total += comb(2 * m, m) * (lam * lam / (4 * k1 * k2)) ** m * ive(m, k1) * ive(m, k2)
    return 4 * np.pi**2 * total * np.exp(k1 + k2)


def vmf_oracle(dot, kappa):
    k = mpmath.mpf(kappa)
    return float(k / (4 * mpmath.pi * mpmath.sinh(k)) * mpmath.exp(k * dot))


class TestVmf:
    def test_uniform(self):
        x = np.array([0.6, 0.0, 0.8])
        assert vmf_density(x, [0, 0, 1], 0.0) == pytest.approx(1 / (4 * np.pi), rel=1e-15)

    def test_at_mean(self):
        mu = np.array([0.0, 0.0, 1.0])
        assert vmf_density(mu, mu, 1.0) == pytest.approx(np.e / (4 * np.pi * np.sinh(1.0)), rel=1e-14)
        assert vmf_density(mu, mu, 1.0) == pytest.approx(0.18407, abs=5e-6)

    def test_orthogonal_large_kappa(self):
        val = vmf_density(np.array([1.0, 0.0, 0.0]), [0, 0, 1], 40.0)
        assert val == pytest.approx(vmf_oracle(0.0, 40.0), rel=1e-12)
        assert 0 < val < 1e-16

    def test_huge_kappa_stays_finite(self):
        assert np.isfinite(vmf_density(np.array([0.0, 0.0, 1.0]), [0, 0, 1], 2000.0))

    @pytest.mark.parametrize("kappa", [0.0, 1.0, 4.0, 40.0])
    def test_mass(self, kappa):
        g = make_grid(SPHERE, (256, 128))
        mass = np.dot(vmf_density(g.points, [0.3, 0.4, -0.5], kappa), g.weights)
        assert mass == pytest.approx(1.0, rel=5e-3)

    def test_non_unit_input(self):
        with pytest.raises(DomainError):
            vmf_density(np.array([0.0, 0.0, 1.1]), [0, 0, 1], 2.0)

    def test_rotational_symmetry(self):
        mu = np.array([1.0, 2.0, 2.0]) / 3
        rng = np.random.default_rng(0)
        base = np.array([0.0, 0.6, 0.8])
        ref = vmf_density(base, mu, 7.0)
        # rotate base about mu by random angles (Rodrigues)
        for t in rng.uniform(0, 2 * np.pi, 50):
            rot = base * np.cos(t) + np.cross(mu, base) * np.sin(t) + mu * (mu @ base) * (1 - np.cos(t))
            rot /= np.linalg.norm(rot)
            assert vmf_density(rot, mu, 7.0) == pytest.approx(ref, rel=1e-12)

    def test_mean_is_normalised(self):
        law = VonMisesFisher((-1.0, 0.25, 0.0), 40.0)
        assert np.linalg.norm(law.mu) == pytest.approx(1.0, abs=1e-15)


class TestVmfMixture:
    def test_symmetry_plane(self):
        x = np.array([-0.8, 0.0, 0.6])
        a = vmf_density(x, (-1, -0.25, 0), 40)
        b = vmf_density(x, (-1, 0.25, 0), 40)
        assert a == pytest.approx(b, rel=1e-12)
        assert vmf_mixture_density(x) == pytest.approx(0.5 * a + 0.5 * b, rel=1e-14)

    def test_mass(self):
        g = make_grid(SPHERE, (512, 256))
        assert np.dot(vmf_mixture_density(g.points), g.weights) == pytest.approx(1.0, rel=5e-3)

    def test_contrast(self):
        p = np.array([-1.0, -0.25, 0.0])
        p /= np.linalg.norm(p)
        assert vmf_mixture_density(p) > 1e10 * vmf_mixture_density(np.array([1.0, 0.0, 0.0]))


class TestMvm:
    def test_uniform_normaliser(self):
        assert mvm_normalizer([0, 0], 0.0) == pytest.approx(4 * np.pi**2, rel=1e-12)

    @pytest.mark.parametrize("kappa, lam", [((20, 20), 1.0), ((3, 5), -2.0), ((1, 0.5), 0.4)])
    def test_normaliser_series(self, kappa, lam):
        z = mvm_normalizer(kappa, [[0, lam], [lam, 0]])
        assert z == pytest.approx(sine_model_z(kappa[0], kappa[1], lam), rel=1e-8)

    def test_regression_fixture(self):
        z = mvm_normalizer([20, 20], [[0, 1], [1, 0]])
        assert np.isfinite(z) and z > 0
        assert z == pytest.approx(7.4992e16, rel=1e-4)

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            mvm_log_normalizer([1, 1], 0.0, resolution=64)

    def test_non_convergence(self):
        with pytest.raises(RuntimeError):
            mvm_log_normalizer([2000, 2000], 0.0, max_resolution=256)

    def test_bad_delta(self):
        with pytest.raises(DomainError):
            mvm_density([0.0, 0.0], [0, 0], [1, 1], [[1, 1], [1, 0]])
        with pytest.raises(DomainError):
            mvm_density([0.0, 0.0], [0, 0], [1, 1], [[0, 1], [2, 0]])

    def test_at_mean(self):
        mu = (np.pi / 2, 0.0)
        log_z = mvm_log_normalizer([20, 20], 1.0)
        assert mvm_density(np.array(mu), mu, [20, 20], 1.0) == pytest.approx(np.exp(40 - log_z), rel=1e-13)

    @pytest.mark.parametrize("mu", [(0.0, 0.0), (np.pi / 2, 0.0), (1.0, 4.0)])
    def test_integrates_to_one(self, mu):
        m = 512
        g = np.arange(m) * 2 * np.pi / m
        t1, t2 = np.meshgrid(g, g, indexing="ij")
        th = np.column_stack([t1.ravel(), t2.ravel()])
        total = mvm_density(th, mu, [20, 20], 1.0).sum() * (2 * np.pi / m) ** 2
        assert abs(total - 1) < 1e-12

    def test_unimodal_argmax(self):
        m = 256
        g = np.arange(m) * 2 * np.pi / m
        t1, t2 = np.meshgrid(g, g, indexing="ij")
        th = np.column_stack([t1.ravel(), t2.ravel()])
        vals = mvm_density(th, (np.pi / 2, 0.0), [20, 20], 1.0)
        np.testing.assert_allclose(th[np.argmax(vals)], [np.pi / 2, 0.0], atol=1e-12)

    def test_periodicity(self):
        rng = np.random.default_rng(1)
        th = rng.uniform(0, 2 * np.pi, (100, 2))
        base = mvm_density(th, (1.0, 2.0), [3, 4], 1.5)
        for shift in ([2 * np.pi, 0], [0, 2 * np.pi], [-2 * np.pi, 4 * np.pi]):
            np.testing.assert_allclose(mvm_density(th + shift, (1.0, 2.0), [3, 4], 1.5), base, rtol=1e-12)

    def test_surface_and_chart_densities(self):
        law = MultivariateVonMises((1.0, 2.0), (3.0, 4.0), 1.5)
        u = np.array([[0.5, 2.5], [3.0, 0.1]])
        x = embed(TORUS, u)
        jac = 1.0 * (2.0 + np.cos(u[:, 1]))
        np.testing.assert_allclose(law.density(x, TORUS) * jac, law.angle_density(u), rtol=1e-13)

    def test_negative_kappa(self):
        with pytest.raises(DomainError):
            MultivariateVonMises((0, 0), (-1, 1), 0.0)


class TestWishart:
    sigma = np.eye(2) / 2

    def test_rotation_invariance(self):
        S = np.array([[6.0, 1.0], [1.0, 4.0]])
        ref = wishart_density([S[0, 0], S[0, 1], S[1, 1]], self.sigma, 10)
        assert ref > 0
        for t in np.linspace(0, np.pi, 7):
            R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
            T = R @ S @ R.T
            assert wishart_density([T[0, 0], T[0, 1], T[1, 1]], self.sigma, 10) == pytest.approx(ref, rel=1e-12)

    def test_at_mean_positive(self):
        assert wishart_density([5.0, 0.0, 5.0], self.sigma, 10) > 0

    def test_against_scipy(self):
        from scipy.stats import wishart

        rng = np.random.default_rng(2)
        sig = np.array([[0.5, 0.1], [0.1, 0.3]])
        for _ in range(20):
            m = rng.normal(size=(2, 2))
            S = m @ m.T + 0.2 * np.eye(2)
            # scipy uses the same Lebesgue measure on the upper triangle
            ref = wishart.pdf(S, df=7, scale=sig)
            assert wishart_density([S[0, 0], S[0, 1], S[1, 1]], sig, 7) == pytest.approx(ref, rel=1e-10)

    def test_singular_boundary(self):
        assert wishart_density([1.0, 1.0, 1.0], self.sigma, 10) == 0.0

    def test_not_psd(self):
        with pytest.raises(DomainError):
            wishart_density([1.0, 2.0, 1.0], self.sigma, 10)

    def test_monte_carlo_mass(self):
        rng = np.random.default_rng(3)
        n = 1_000_000
        box = np.array([[0.0, 20.0], [-10.0, 10.0], [0.0, 20.0]])
        u = rng.uniform(box[:, 0], box[:, 1], size=(n, 3))
        inside = u[:, 0] * u[:, 2] - u[:, 1] ** 2 > 0
        vals = np.zeros(n)
        vals[inside] = wishart_density(u[inside], self.sigma, 10)
        vol = np.prod(box[:, 1] - box[:, 0])
        est = vals.mean() * vol
        se = vals.std() * vol / np.sqrt(n)
        assert abs(est - 1) < 0.02 and se < 0.01

    def test_argmax_near_mode(self):
        # the Lebesgue density peaks at (m - 3) Sigma
        law = Wishart2(self.sigma, 10)
        prev = None
        for res in (40, 80):
            g = make_grid(SPD, (res, res, res), box=((0, 8), (-4, 4), (0, 8)))
            arg = g.points[np.argmax(law.density(g.points, SPD))]
            np.testing.assert_allclose(arg, [3.5, 0.0, 3.5], atol=8 / res)
            if prev is not None:
                assert np.linalg.norm(arg - prev) <= 8 / 40
            prev = arg


class TestLaws:
    def test_mixture_weights(self):
        comp = VonMisesFisher((0, 0, 1), 1.0)
        with pytest.raises(DomainError):
            Mixture((0.5, 0.4), (comp, comp))
        with pytest.raises(DomainError):
            Mixture((1.2, -0.2), (comp, comp))
        with pytest.raises(DomainError):
            Mixture((0.5, 0.5), (comp, MultivariateVonMises((0, 0), (1, 1), 0.0)))

    def test_round_trip(self):
        laws = [
            Wishart2([[0.25, 0.0], [0.0, 0.25]], 10),
            MultivariateVonMises((1.0, 2.0), (3.0, 4.0), 0.5),
            VonMisesFisher((0.0, 0.6, 0.8), 3.0),
            UniformLaw(),
            Mixture((0.4, 0.6), (VonMisesFisher((1, 0, 0), 2.0), VonMisesFisher((0, 1, 0), 5.0))),
        ]
        for law in laws:
            assert law_from_dict(law_to_dict(law)) == law

    def test_uniform_hemisphere(self):
        g = make_grid(ManifoldSpec.hemisphere(), (32, 16))
        f = truth_field(UniformLaw(), g)
        assert f.mass() == pytest.approx(1.0, rel=1e-3)

    def test_manifold_mismatch(self):
        with pytest.raises(DomainError):
            truth_field(VonMisesFisher((0, 0, 1), 1.0), make_grid(TORUS, (16, 16)))


class TestTrueLevelSet:
    def setup_method(self):
        self.grid = make_grid(SPHERE, (128, 64))
        self.field = truth_field(VonMisesFisher((0.0, 0.6, 0.8), 40.0), self.grid)

    def test_extremes(self):
        top = self.field.values.max()
        assert len(true_level_set(self.field, top * 1.0001)) == 0
        assert len(true_level_set(self.field, 1e-300)) == len(self.grid)

    def test_disk(self):
        sub = true_level_set(self.field, 0.8 * self.field.values.max())
        assert sub.mask[np.argmax(self.field.values)]
        adj = self.grid.adjacency[sub.mask][:, sub.mask]
        assert connected_components(adj, directed=False)[0] == 1

    def test_level_must_be_positive(self):
        with pytest.raises(ValueError):
            true_level_set(self.field, 0.0)
