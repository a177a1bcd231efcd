"""Identity suites: structural checks runnable on any configured model.

Each suite verifies an exact or order-accurate identity of the discrete
operators against an independent formulation:

  conformal_laplacian   transformation rule against a direct divergence-form
                        discretization of the rescaled metric, second order
  mass_conservation     volume-weighted sum of the Laplacian telescopes to 0
  curvature_scaling     constant factors scale the curvature by c^(-1/eta)
  holder_equivalence    local/global seminorm inequality with constant 1+2/delta

run_identity_suites returns one SuiteResult per suite; the laplacian
argument exists so tests can inject a broken stencil as a negative control.
"""

from dataclasses import dataclass

import numpy as np

from .conformal import conformal_laplacian, scal_conformal
from .geometry import laplacian_phi
from .holder import SampledField, holder_seminorm, local_holder_seminorm

__all__ = ["SuiteResult", "run_identity_suites", "conformal_laplacian_oracle"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def conformal_laplacian_oracle(M, grid, u, f):
    """Laplacian of the rescaled metric, discretized directly.

    In radial coordinates the rescaled metric gives

        Lap~ f = u^-(2+1/eta) x^(2+b) d/dx ( u^2 x^(2-b) df/dx )

    (the inner exponent (m-2)/(2 eta) is always 2).  Face coefficients use
    midpoint-averaged u, zero flux at the ends.
    """
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    uface = 0.5 * (u[:-1] + u[1:])
    flux = uface**2 * grid.face_coef * (f[1:] - f[:-1])
    div = np.empty_like(f)
    div[0] = flux[0]
    div[1:-1] = flux[1:] - flux[:-1]
    div[-1] = -flux[-1]
    return div * grid.xpref * u ** (-(2.0 + 1.0 / M.eta))


def _random_poly(rng, x, degree, lo=-1.0, hi=1.0):
    coef = rng.uniform(lo, hi, degree + 1)
    return np.polyval(coef, x), coef


def _conformal_laplacian_suite(M, grid_fine, grid_coarse, rng, n_fields=50):
    """Order check of the transformation rule at interior nodes."""
    worst_order = np.inf
    for _ in range(n_fields):
        errs = []
        fcoef = rng.uniform(-1, 1, 4)
        ucoef = rng.uniform(-0.3, 0.3, 3)
        for grid in (grid_coarse, grid_fine):
            x = grid.nodes
            f = np.polyval(fcoef, x)
            u = 1.5 + np.polyval(ucoef, x)
            got = conformal_laplacian(M, grid, u, f)
            want = conformal_laplacian_oracle(M, grid, u, f)
            errs.append(np.abs(got - want)[1:-1].max())
        if errs[1] == 0 and errs[0] == 0:
            continue
        order = np.log2(errs[0] / errs[1])
        worst_order = min(worst_order, order)
    passed = worst_order >= 1.9
    return SuiteResult(
        "conformal_laplacian",
        bool(passed),
        f"worst observed order {worst_order:.3f} (need >= 1.9)",
    )


def _mass_conservation_suite(M, grid, rng, laplacian, n_fields=50):
    worst = 0.0
    wsum = grid.vol_weights.sum()
    for _ in range(n_fields):
        u = rng.uniform(0.5, 2.0, grid.n)
        total = abs(float(np.dot(laplacian(M, grid, u), grid.vol_weights)))
        rel = total / (np.abs(u).max() * wsum)
        worst = max(worst, rel)
    passed = worst <= 1e-12
    return SuiteResult(
        "mass_conservation",
        bool(passed),
        f"worst weighted sum {worst:.3e} relative (need <= 1e-12)",
    )


def _curvature_scaling_suite(M, grid, rng, n_fields=50):
    worst = 0.0
    base = scal_conformal(M, grid, np.ones(grid.n)).values
    for _ in range(n_fields):
        c = rng.uniform(0.2, 5.0)
        got = scal_conformal(M, grid, np.full(grid.n, c)).values
        want = c ** (-1.0 / M.eta) * base
        worst = max(worst, float(np.abs(got - want).max()))
    passed = worst <= 1e-12 * M.a1
    return SuiteResult(
        "curvature_scaling",
        bool(passed),
        f"worst deviation {worst:.3e} (need <= {1e-12 * M.a1:.1e})",
    )


def _holder_equivalence_suite(grid, rng, n_fields=100, alpha=0.5, delta=0.5):
    # small sampled fields keep the pair enumeration exhaustive
    times = np.linspace(0.0, 1.0, 6)
    n_keep = min(grid.n, 20)
    idx = np.linspace(0, grid.n - 1, n_keep).astype(int)
    sub = _Subgrid(grid.nodes[idx])
    worst = -np.inf
    for _ in range(n_fields):
        vals = rng.standard_normal((times.size, n_keep))
        s = SampledField(sub, times, vals)
        sup = float(np.abs(vals).max())
        full = sup + holder_seminorm(s, alpha)
        local = sup + local_holder_seminorm(s, alpha, delta)
        if not (local <= full * (1 + 1e-12)):
            return SuiteResult("holder_equivalence", False,
                               "local norm exceeded the full norm")
        excess = full - (1.0 + 2.0 / delta) * local
        worst = max(worst, excess)
    passed = worst <= 1e-12
    return SuiteResult(
        "holder_equivalence",
        bool(passed),
        f"worst inequality excess {worst:.3e} (need <= 0)",
    )


class _Subgrid:
    """Just enough of the grid interface for sampled-field seminorms."""

    def __init__(self, nodes):
        self.nodes = np.asarray(nodes, dtype=float)
        self.n = self.nodes.size


def run_identity_suites(M, grid, seed=0, laplacian=None):
    """Run all suites; returns a list of SuiteResult."""
    if laplacian is None:
        laplacian = laplacian_phi
    rng = np.random.default_rng(seed)
    x_min = float(grid.nodes[0])
    x_max = float(grid.nodes[-1])
    from .geometry import build_grid

    # the order probe needs resolutions inside the asymptotic regime,
    # independent of the configured run grid; random draws with a small
    # leading error constant keep the observed order below 1.9 on grids
    # coarser than these
    grid_coarse = build_grid(M, 384, x_min, x_max)
    grid_fine = build_grid(M, 768, x_min, x_max)
    return [
        _conformal_laplacian_suite(M, grid_fine, grid_coarse, rng),
        _mass_conservation_suite(M, grid, rng, laplacian),
        _curvature_scaling_suite(M, grid, rng),
        _holder_equivalence_suite(grid, rng),
    ]
