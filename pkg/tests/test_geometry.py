import numpy as np
import pytest

from phiyamabe import build_grid, build_manifold, laplacian_phi, scal_phi
from phiyamabe.geometry import PhiPoint, phi_distance


class TestBuildManifold:
    def test_derived_constants(self):
        man = build_manifold(6, 2, -4.0, -3.0, 1.0)
        assert man.eta == 1.0
        assert man.fdim == 3
        assert man.a1 == 5.0
        assert man.a2 == 3.0

    def test_constant_curvature_fiber_only(self):
        man = build_manifold(3, 0, 0.0, -1.0, 1.0)
        assert man.eta == 0.25
        assert man.a1 == man.a2 == 1.0
        assert scal_phi(man, 0.3) == -1.0

    def test_rejects_positive_curvature_at_outer_edge(self):
        # scal(1) = 1*(2 + 2) - 1 = +3
        with pytest.raises(ValueError, match="negative"):
            build_manifold(6, 2, 2.0, -1.0, 1.0)

    def test_rejects_nonnegative_fiber_curvature(self):
        with pytest.raises(ValueError, match="negative"):
            build_manifold(6, 2, -4.0, 1.0, 1.0)
        with pytest.raises(ValueError, match="negative"):
            build_manifold(6, 2, -4.0, 0.0, 1.0)

    @pytest.mark.parametrize("m,b,x_max", [(2, 0, 1.0), (6, 6, 1.0), (6, 2, -1.0)])
    def test_rejects_bad_dimensions(self, m, b, x_max):
        with pytest.raises(ValueError):
            build_manifold(m, b, -4.0, -3.0, x_max)

    def test_extremes_attained_at_endpoints(self, rng):
        for _ in range(50):
            m = int(rng.integers(3, 9))
            b = int(rng.integers(0, m - 1))
            scalY = float(rng.uniform(-5, 5))
            scalZ = float(rng.uniform(-6, -0.5))
            x_max = float(rng.uniform(0.3, 1.5))
            if x_max**2 * (scalY + b * (b - 1)) + scalZ >= 0:
                continue
            man = build_manifold(m, b, scalY, scalZ, x_max)
            ends = np.abs([scal_phi(man, 0.0), scal_phi(man, x_max)])
            assert man.a1 == pytest.approx(ends.max(), rel=1e-15)
            assert man.a2 == pytest.approx(ends.min(), rel=1e-15)
            assert 0 < man.a2 <= man.a1


class TestScalPhi:
    def test_point_values(self, man_inhomog):
        assert scal_phi(man_inhomog, 0.0) == -3.0
        assert scal_phi(man_inhomog, 1.0) == -5.0
        assert scal_phi(man_inhomog, 0.5) == -3.5

    def test_vectorized(self, man_inhomog):
        x = np.array([0.0, 0.5, 1.0])
        np.testing.assert_allclose(scal_phi(man_inhomog, x), [-3.0, -3.5, -5.0])


class TestBuildGrid:
    def test_uniform_partition(self, man_inhomog):
        grid = build_grid(man_inhomog, 4, 0.2, 1.0)
        np.testing.assert_allclose(grid.nodes, [0.2, 0.4, 0.6, 0.8, 1.0])
        assert grid.h == pytest.approx(0.2)

    def test_volume_weights_b0(self):
        man = build_manifold(3, 0, 0.0, -1.0, 1.0)
        grid = build_grid(man, 16, 0.2, 1.0)
        inner = grid.nodes[1:-1] ** (-2.0) * grid.h
        np.testing.assert_allclose(grid.vol_weights[1:-1], inner, rtol=1e-14)
        # boundary cells have half width
        assert grid.vol_weights[0] == pytest.approx(0.2**-2 * grid.h / 2)
        assert np.all(grid.vol_weights > 0)

    def test_rejects_degenerate_inner_edge(self, man_inhomog):
        with pytest.raises(ValueError, match="positive"):
            build_grid(man_inhomog, 16, 0.0, 1.0)

    def test_rejects_empty_interval(self, man_inhomog):
        with pytest.raises(ValueError):
            build_grid(man_inhomog, 16, 0.5, 0.5)


class TestLaplacian:
    def test_kills_constants(self, man_inhomog, grid_small):
        u = np.full(grid_small.n, 3.7)
        assert np.abs(laplacian_phi(man_inhomog, grid_small, u)).max() == 0.0

    def test_quadratic_b2_exact_inside(self, man_inhomog, grid_small):
        # for b = 2 the face coefficient is constant, so the second
        # difference of x^2 reproduces 2 x^4 up to roundoff at inner nodes
        x = grid_small.nodes
        lap = laplacian_phi(man_inhomog, grid_small, x**2)
        np.testing.assert_allclose(lap[1:-1], 2.0 * x[1:-1] ** 4, rtol=1e-11)

    def test_quadratic_b0_second_order(self):
        # x^4 u'' + 2 x^3 u' = 6 x^4 for u = x^2; inner-node error is O(h^2)
        man = build_manifold(3, 0, 0.0, -1.0, 1.0)
        errs = []
        for N in (64, 128):
            grid = build_grid(man, N, 0.1, 1.0)
            x = grid.nodes
            lap = laplacian_phi(man, grid, x**2)
            errs.append(np.abs(lap - 6.0 * x**4)[1:-1].max())
        assert errs[0] / errs[1] >= 3.6

    @pytest.mark.parametrize("m,b", [(6, 2), (3, 0), (5, 1), (7, 3)])
    def test_weighted_sum_vanishes(self, m, b, rng):
        man = build_manifold(m, b, -7.0, -2.0, 1.0)
        grid = build_grid(man, 80, 0.05, 1.0)
        for _ in range(20):
            u = rng.uniform(0.1, 3.0, grid.n)
            total = abs(np.dot(laplacian_phi(man, grid, u), grid.vol_weights))
            assert total <= 1e-12 * np.abs(u).max() * grid.vol_weights.sum()

    def test_shape_mismatch(self, man_inhomog, grid_small):
        with pytest.raises(ValueError, match="match"):
            laplacian_phi(man_inhomog, grid_small, np.ones(3))


class TestPhiDistance:
    def test_identity(self):
        p = PhiPoint(0.3, (1.0,), (2.0,))
        assert phi_distance(p, p) == 0.0

    def test_fiber_only_displacement(self):
        p = PhiPoint(0.3, (1.0,), (0.0, 0.0))
        q = PhiPoint(0.3, (1.0,), (3.0, 4.0))
        assert phi_distance(p, q) == pytest.approx(5.0)

    def test_radial_displacement(self):
        p = PhiPoint(0.2)
        q = PhiPoint(0.4)
        assert phi_distance(p, q) == pytest.approx(0.2 / 0.36)

    def test_positive_unless_equal(self, rng):
        for _ in range(50):
            a = PhiPoint(rng.uniform(0.05, 1), tuple(rng.uniform(-1, 1, 2)))
            b = PhiPoint(rng.uniform(0.05, 1), tuple(rng.uniform(-1, 1, 2)))
            d = phi_distance(a, b)
            assert d >= 0
            if (a.x, a.y, a.z) != (b.x, b.y, b.z):
                assert d > 0

    def test_symmetry(self, rng):
        for _ in range(200):
            a = PhiPoint(rng.uniform(0.05, 1), tuple(rng.uniform(-1, 1, 2)),
                         tuple(rng.uniform(-1, 1, 2)))
            b = PhiPoint(rng.uniform(0.05, 1), tuple(rng.uniform(-1, 1, 2)),
                         tuple(rng.uniform(-1, 1, 2)))
            assert phi_distance(a, b) == phi_distance(b, a)

    def test_triangle_inequality_on_local_triples(self, rng):
        # the collar expression is a local form of the induced distance;
        # the inequality genuinely fails for far-apart triples (for example
        # x = (0.1, 1.0, 0.99) radially), so sampling is restricted to
        # triples with pairwise distance below 0.5
        checked = 0
        while checked < 300:
            x0 = rng.uniform(0.1, 0.9)
            y0 = rng.uniform(-1, 1, 2)
            z0 = rng.uniform(-1, 1, 2)
            pts = [
                PhiPoint(x0 + rng.uniform(-1, 1) * x0**2,
                         tuple(y0 + rng.uniform(-0.4, 0.4, 2) * x0),
                         tuple(z0 + rng.uniform(-0.2, 0.2, 2)))
                for _ in range(3)
            ]
            dab = phi_distance(pts[0], pts[1])
            dbc = phi_distance(pts[1], pts[2])
            dac = phi_distance(pts[0], pts[2])
            if max(dab, dbc, dac) > 0.5:
                continue
            checked += 1
            assert dac <= dab + dbc + 1e-12
            assert dab <= dac + dbc + 1e-12
            assert dbc <= dab + dac + 1e-12

    def test_rejects_nonpositive_x(self):
        with pytest.raises(ValueError):
            PhiPoint(0.0)
