import numpy as np
import pytest

from phiyamabe import (
    ConformalFactor,
    build_grid,
    build_manifold,
    conformal_laplacian,
    laplacian_phi,
    scal_conformal,
    scal_phi,
    yamabe_residual,
)
from phiyamabe.checks import conformal_laplacian_oracle


class TestScalConformal:
    def test_identity_factor_gives_model_curvature(self, man_inhomog, grid_small):
        sf = scal_conformal(man_inhomog, grid_small, np.ones(grid_small.n))
        np.testing.assert_allclose(sf.values, scal_phi(man_inhomog, grid_small.nodes),
                                   rtol=1e-14)
        assert sf.sup == pytest.approx(-3.0 - 2 * 0.05**2)
        assert sf.inf == pytest.approx(-5.0)

    def test_constant_factor_scaling(self, man_inhomog, grid_small):
        sf = scal_conformal(man_inhomog, grid_small, np.full(grid_small.n, 4.0))
        want = 0.25 * scal_phi(man_inhomog, grid_small.nodes)
        np.testing.assert_allclose(sf.values, want, rtol=1e-14)

    def test_separable_solution_curve(self, man_homog):
        # u = 1 + t solves the unnormalized flow when the model curvature
        # is identically -1 and eta = 1; its curvature is -1/(1+t)
        grid = build_grid(man_homog, 32, 0.2, 1.0)
        for t in (0.0, 0.5, 2.0):
            sf = scal_conformal(man_homog, grid, np.full(grid.n, 1.0 + t))
            np.testing.assert_allclose(sf.values, -1.0 / (1.0 + t), rtol=1e-14)

    def test_extremes_are_node_extremes(self, man_inhomog, grid_small, rng):
        u = rng.uniform(0.5, 2.0, grid_small.n)
        sf = scal_conformal(man_inhomog, grid_small, u)
        assert sf.sup == sf.values.max()
        assert sf.inf == sf.values.min()
        assert sf.gap == sf.sup - sf.inf

    def test_rejects_nonpositive_factor(self, man_inhomog, grid_small):
        u = np.ones(grid_small.n)
        u[3] = 0.0
        with pytest.raises(ValueError, match="positive"):
            scal_conformal(man_inhomog, grid_small, u)
        with pytest.raises(ValueError, match="positive"):
            ConformalFactor(u)

    def test_scaling_law_exact(self, man_inhomog, grid_small, rng):
        # scal(c u) = c^(-1/eta) scal(u) holds exactly in the discrete algebra
        base = scal_conformal(man_inhomog, grid_small, np.ones(grid_small.n)).values
        for c in (0.25, 0.5, 2.0, 7.0):
            got = scal_conformal(man_inhomog, grid_small,
                                 np.full(grid_small.n, c)).values
            assert np.abs(got - c ** (-1.0) * base).max() <= 1e-12 * man_inhomog.a1
        u = rng.uniform(0.5, 2.0, grid_small.n)
        su = scal_conformal(man_inhomog, grid_small, u).values
        s3u = scal_conformal(man_inhomog, grid_small, 3.0 * u).values
        np.testing.assert_allclose(s3u, su / 3.0, rtol=1e-12)


class TestConformalLaplacian:
    def test_identity_factor(self, man_inhomog, grid_small, rng):
        f = rng.uniform(-1, 1, grid_small.n)
        got = conformal_laplacian(man_inhomog, grid_small, np.ones(grid_small.n), f)
        np.testing.assert_allclose(got, laplacian_phi(man_inhomog, grid_small, f),
                                   rtol=1e-13, atol=1e-13)

    def test_kills_constants(self, man_inhomog, grid_small, rng):
        u = rng.uniform(0.5, 2.0, grid_small.n)
        got = conformal_laplacian(man_inhomog, grid_small, u,
                                  np.full(grid_small.n, 2.5))
        assert np.abs(got).max() == 0.0

    def test_constant_factor_scaling(self, man_inhomog, grid_small, rng):
        f = rng.uniform(-1, 1, grid_small.n)
        got = conformal_laplacian(man_inhomog, grid_small,
                                  np.full(grid_small.n, 2.0), f)
        want = 0.5 * laplacian_phi(man_inhomog, grid_small, f)
        np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-14)

    @pytest.mark.parametrize("m,b", [(6, 2), (4, 1)])
    def test_matches_direct_discretization_to_second_order(self, m, b, rng):
        man = build_manifold(m, b, -1.0, -2.0, 1.0)
        for _ in range(50):
            fcoef = rng.uniform(-1, 1, 4)
            ucoef = rng.uniform(-0.3, 0.3, 3)
            errs = []
            for N in (64, 128):
                grid = build_grid(man, N, 0.05, 1.0)
                x = grid.nodes
                f = np.polyval(fcoef, x)
                u = 1.5 + np.polyval(ucoef, x)
                got = conformal_laplacian(man, grid, u, f)
                want = conformal_laplacian_oracle(man, grid, u, f)
                errs.append(np.abs(got - want)[1:-1].max())
            assert errs[0] / errs[1] >= 3.6


class TestYamabeResidual:
    def test_model_metric_is_stationary_when_homogeneous(self, man_homog):
        grid = build_grid(man_homog, 32, 0.2, 1.0)
        r = yamabe_residual(man_homog, grid, np.ones(grid.n), -1.0)
        assert np.abs(r).max() <= 1e-13

    def test_rescaled_homogeneous_solution(self, man_homog):
        grid = build_grid(man_homog, 32, 0.2, 1.0)
        c = 2.5
        r = yamabe_residual(man_homog, grid, np.full(grid.n, c), -1.0 / c)
        assert np.abs(r).max() <= 1e-12

    def test_equals_curvature_defect_identity(self, man_inhomog, grid_small, rng):
        # residual = -(scal(u) - S*) u^(1+1/eta), an exact rearrangement
        for _ in range(20):
            u = rng.uniform(0.5, 2.0, grid_small.n)
            s_star = float(rng.uniform(-6, -1))
            got = yamabe_residual(man_inhomog, grid_small, u, s_star)
            sf = scal_conformal(man_inhomog, grid_small, u)
            want = -(sf.values - s_star) * u ** 2.0
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)
