"""Model fibered-boundary manifold, radial grid and discrete operators.

The model metric near the boundary face is

    dx^2/x^4 + g_Y/x^2 + g_Z

on a collar in the boundary-defining coordinate x, with a trivial fibration,
constant base curvature scal(g_Y) and constant fiber curvature scal(g_Z).
All computations live on a radial grid in x; fields carry one value per
node.  The grid stores the radial volume factor x^-(2+b) dx so that
volume-weighted sums of the discrete Laplacian telescope to zero exactly
(the discrete form of mass conservation for the heat semigroup).
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelPhiManifold",
    "RadialGrid",
    "PhiPoint",
    "build_manifold",
    "scal_phi",
    "build_grid",
    "laplacian_phi",
    "phi_distance",
]


@dataclass(frozen=True)
class ModelPhiManifold:
    """Product-type model manifold with constant curvature pieces.

    m      total dimension (m >= 3)
    b      base dimension
    fdim   fiber dimension, m - 1 - b
    scalY  scalar curvature of the base metric
    scalZ  scalar curvature of the fiber metric (must be negative)
    x_max  outer edge of the collar the constants a1, a2 refer to
    eta    conformal exponent (m - 2)/4
    a1     sup of |scal| of the model metric over [0, x_max]
    a2     inf of |scal| of the model metric over [0, x_max]
    """

    m: int
    b: int
    fdim: int
    scalY: float
    scalZ: float
    x_max: float
    eta: float
    a1: float
    a2: float


def build_manifold(m, b, scalY, scalZ, x_max):
    """Validate parameters and compute the derived constants.

    Raises ValueError when the fiber curvature is not negative or when the
    model scalar curvature fails to be strictly negative on (0, x_max].
    """
    m = int(m)
    b = int(b)
    if m < 3:
        raise ValueError(f"total dimension must be >= 3, got m={m}")
    if b < 0:
        raise ValueError(f"base dimension must be >= 0, got b={b}")
    fdim = m - 1 - b
    if fdim < 0:
        raise ValueError(f"fiber dimension m-1-b = {fdim} is negative")
    if x_max <= 0:
        raise ValueError(f"x_max must be positive, got {x_max}")
    scalY = float(scalY)
    scalZ = float(scalZ)
    if scalZ >= 0:
        raise ValueError(
            f"fiber scalar curvature must be negative, got scalZ={scalZ}"
        )
    # scal(x) = x^2 (scalY + b(b-1)) + scalZ is monotone in x^2, so
    # negativity on (0, x_max] reduces to the endpoint x = x_max.
    s_outer = x_max**2 * (scalY + b * (b - 1)) + scalZ
    if s_outer >= 0:
        raise ValueError(
            "model scalar curvature must stay negative on the collar: "
            f"scal({x_max}) = {s_outer}"
        )
    # extremes over [0, x_max] sit at the endpoints
    lo, hi = sorted((abs(scalZ), abs(s_outer)))
    return ModelPhiManifold(
        m=m,
        b=b,
        fdim=fdim,
        scalY=scalY,
        scalZ=scalZ,
        x_max=float(x_max),
        eta=(m - 2) / 4.0,
        a1=hi,
        a2=lo,
    )


def scal_phi(M, x):
    """Scalar curvature of the model metric at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    out = x**2 * (M.scalY + M.b * (M.b - 1)) + M.scalZ
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid on [x_min, x_max] with volume quadrature.

    nodes        grid nodes, strictly increasing, all positive
    h            node spacing
    cell         dual-cell widths (h inside, h/2 at both ends)
    vol_weights  x^-(2+b) * cell, the radial volume measure per node
    """

    nodes: np.ndarray
    h: float
    cell: np.ndarray
    vol_weights: np.ndarray
    # stencil coefficients: flux per interior face and per-node prefactor
    face_coef: np.ndarray = field(repr=False)
    xpref: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.nodes.size


def build_grid(M, N, x_min, x_max):
    """Uniform grid with N intervals (N+1 nodes) on [x_min, x_max].

    The quadrature weights are the midpoint rule for x^-(2+b) dx on the
    dual cells; the end cells have half width, which is exactly what makes
    the zero-flux Laplacian conserve the weighted sum.
    """
    N = int(N)
    if x_min <= 0:
        raise ValueError(
            f"x_min must be positive (coordinate degenerates at 0), got {x_min}"
        )
    if x_max <= x_min:
        raise ValueError(f"need x_min < x_max, got [{x_min}, {x_max}]")
    if N < 2:
        raise ValueError(f"need at least 2 intervals, got N={N}")
    nodes = np.linspace(x_min, x_max, N + 1)
    h = (x_max - x_min) / N
    cell = np.full(N + 1, h)
    cell[0] = cell[-1] = h / 2.0
    vol_weights = nodes ** (-(2.0 + M.b)) * cell
    faces = 0.5 * (nodes[:-1] + nodes[1:])
    face_coef = faces ** (2.0 - M.b) / h
    xpref = nodes ** (2.0 + M.b) / cell
    for arr in (nodes, cell, vol_weights, face_coef, xpref):
        arr.flags.writeable = False
    return RadialGrid(
        nodes=nodes,
        h=h,
        cell=cell,
        vol_weights=vol_weights,
        face_coef=face_coef,
        xpref=xpref,
    )


def laplacian_phi(M, grid, u, out=None):
    """Laplacian of the model metric on a radial field.

    Divergence form of x^(2+b) d/dx ( x^(2-b) du/dx ) with face fluxes and
    zero flux through both ends.  The weighted sum of the result vanishes
    identically for every field.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != grid.nodes.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {grid.nodes.shape}")
    flux = grid.face_coef * (u[1:] - u[:-1])
    if out is None:
        out = np.empty_like(u)
    out[0] = flux[0]
    out[1:-1] = flux[1:] - flux[:-1]
    out[-1] = -flux[-1]
    out *= grid.xpref
    return out


@dataclass(frozen=True)
class PhiPoint:
    """Point in collar coordinates (x, y, z), x > 0."""

    x: float
    y: tuple = ()
    z: tuple = ()

    def __post_init__(self):
        if self.x <= 0:
            raise ValueError(f"x must be positive, got {self.x}")
        object.__setattr__(self, "y", tuple(self.y))
        object.__setattr__(self, "z", tuple(self.z))


def phi_distance(p, q):
    """Distance expression of the model geometry in collar coordinates.

    d = sqrt( ((x-x')/(x+x')^2)^2 + (|y-y'|/(x+x'))^2 + |z-z'|^2 )

    Symmetric, nonnegative and zero exactly for equal coordinates.  This is
    a local expression: it is equivalent to the induced distance only for
    nearby points, and it is used accordingly (see the Hoelder module).
    """
    if p.x <= 0 or q.x <= 0:
        raise ValueError("points must have positive x")
    s = p.x + q.x
    dy = np.linalg.norm(np.subtract(p.y, q.y)) if (p.y or q.y) else 0.0
    dz = np.linalg.norm(np.subtract(p.z, q.z)) if (p.z or q.z) else 0.0
    return float(np.sqrt(((p.x - q.x) / s**2) ** 2 + (dy / s) ** 2 + dz**2))
