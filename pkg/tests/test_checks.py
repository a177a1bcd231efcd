import numpy as np
import pytest

from phiyamabe import build_grid, run_identity_suites


@pytest.fixture(scope="module")
def suite_grid(man_inhomog):
    return build_grid(man_inhomog, 100, 0.05, 1.0)


def bad_laplacian(M, grid, u):
    # plain second difference without the divergence weights: consistent
    # in the interior but not mass conserving
    out = np.zeros_like(np.asarray(u, dtype=float))
    out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / grid.h**2 * grid.nodes[1:-1] ** 4
    return out


class TestIdentitySuites:
    def test_all_pass(self, man_inhomog, suite_grid):
        results = run_identity_suites(man_inhomog, suite_grid, seed=0)
        names = [r.name for r in results]
        assert names == ["conformal_laplacian", "mass_conservation",
                         "curvature_scaling", "holder_equivalence"]
        for r in results:
            assert r.passed, f"{r.name}: {r.detail}"

    def test_bad_stencil_fails_mass_suite(self, man_inhomog, suite_grid):
        results = run_identity_suites(man_inhomog, suite_grid, seed=0,
                                      laplacian=bad_laplacian)
        by_name = {r.name: r for r in results}
        assert not by_name["mass_conservation"].passed
        assert by_name["curvature_scaling"].passed

    def test_verdicts_seed_stable(self, man_inhomog, suite_grid):
        verdicts = set()
        for seed in range(10):
            results = run_identity_suites(man_inhomog, suite_grid, seed=seed)
            verdicts.add(tuple(r.passed for r in results))
        assert verdicts == {(True, True, True, True)}
