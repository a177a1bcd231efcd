"""Time reparametrization between the unnormalized and normalized flows.

From an unnormalized run with curvature supremum S(t), the pair

    f(t) = exp( integral_0^t eta S(theta) dtheta ),   F' = f^(1/eta),  F(0) = 0

turns u into u~(tau) = (f u)(F^-1(tau)), which solves the increasing
curvature-normalized flow in the new time tau.  Note the exponent in F':
rescaling the metric by the spatial constant f^(1/eta) divides its scalar
curvature by f^(1/eta), so matching the normalized equation forces
dF/dt = f^(1/eta) (all exponents coincide for m = 6).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .conformal import scal_conformal
from .flow import FlowTrace

__all__ = [
    "ReparamMap",
    "NonmonotoneF",
    "OutOfRange",
    "InsufficientSamples",
    "build_reparam",
    "apply_reparam",
    "verify_cyf",
]


class NonmonotoneF(Exception):
    """Numerical F failed strict monotonicity; the source trace is corrupt."""


class OutOfRange(Exception):
    """Requested tau outside the range covered by the map."""


class InsufficientSamples(Exception):
    pass


@dataclass(frozen=True)
class ReparamMap:
    """Sampled monotone time maps f(t), F(t) and the inverse of F."""

    t: np.ndarray
    f: np.ndarray
    F: np.ndarray
    eta: float
    _F_of_t: PchipInterpolator = field(repr=False)
    _t_of_tau: PchipInterpolator = field(repr=False)
    _f_of_t: PchipInterpolator = field(repr=False)

    @property
    def tau_max(self):
        return float(self.F[-1])

    def F_of_t(self, t):
        return self._F_of_t(t)

    def f_of_t(self, t):
        return self._f_of_t(t)

    def t_of_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < -1e-12) or np.any(tau > self.tau_max * (1 + 1e-12)):
            raise OutOfRange(
                f"tau outside [0, {self.tau_max:.6g}]"
            )
        return self._t_of_tau(np.clip(tau, 0.0, self.tau_max))


def build_reparam(trace):
    """Build the time maps from the records of an unnormalized run.

    f comes from trapezoidal quadrature of eta * S_sup followed by
    exponentiation, F from trapezoidal quadrature of f^(1/eta).
    """
    t = np.asarray(trace.t, dtype=float)
    if t.size < 2:
        raise InsufficientSamples("need at least 2 records to build the map")
    eta = trace.manifold.eta
    integral = cumulative_trapezoid(eta * trace.s_sup, t, initial=0.0)
    f = np.exp(integral)
    F = cumulative_trapezoid(f ** (1.0 / eta), t, initial=0.0)
    if np.any(np.diff(F) <= 0):
        raise NonmonotoneF("F is not strictly increasing")
    return ReparamMap(
        t=t,
        f=f,
        F=F,
        eta=eta,
        _F_of_t=PchipInterpolator(t, F),
        _t_of_tau=PchipInterpolator(F, t),
        _f_of_t=PchipInterpolator(t, f),
    )


def _interp_rows(snap_t, snap_u, t_query):
    """Linear interpolation of snapshot rows at query times."""
    t_query = np.atleast_1d(np.asarray(t_query, dtype=float))
    idx = np.clip(np.searchsorted(snap_t, t_query) - 1, 0, snap_t.size - 2)
    t0 = snap_t[idx]
    t1 = snap_t[idx + 1]
    w = (t_query - t0) / (t1 - t0)
    return (1.0 - w)[:, None] * snap_u[idx] + w[:, None] * snap_u[idx + 1]


def apply_reparam(trace, rmap, taus=None):
    """Reparametrize an unnormalized trace into normalized time.

    With taus=None the native snapshot times are used, tau_k = F(t_k), and
    no interpolation of u takes place.  Otherwise u is interpolated
    linearly between snapshots at t = F^-1(tau); tau beyond the map raises
    OutOfRange.  Returns a trace in the tau time variable whose monitor
    rows are recomputed from the reparametrized factor.
    """
    M = trace.manifold
    grid = trace.grid
    if taus is None:
        t_s = np.asarray(trace.snap_t, dtype=float)
        taus = np.asarray(rmap.F_of_t(t_s), dtype=float)
        u_rows = np.asarray(trace.snap_u, dtype=float)
    else:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        t_s = np.asarray(rmap.t_of_tau(taus), dtype=float)
        u_rows = _interp_rows(trace.snap_t, trace.snap_u, t_s)
    f_s = np.asarray(rmap.f_of_t(t_s), dtype=float)
    u_tilde = f_s[:, None] * u_rows

    sup = np.empty(taus.size)
    inf = np.empty(taus.size)
    dtu = np.empty(taus.size)
    for i in range(taus.size):
        sf = scal_conformal(M, grid, u_tilde[i])
        sup[i] = sf.sup
        inf[i] = sf.inf
        dtu[i] = M.eta * float(np.abs((sf.sup - sf.values) * u_tilde[i]).max())
    return FlowTrace(
        variant="cyf_plus",
        manifold=M,
        grid=grid,
        t=taus,
        s_sup=sup,
        s_inf=inf,
        gap=sup - inf,
        u_min=u_tilde.min(axis=1),
        u_max=u_tilde.max(axis=1),
        dtu_norm=dtu,
        snap_t=taus,
        snap_u=u_tilde,
        c1=trace.c1,
        c2=trace.c2,
        time_label="tau",
    )


def verify_cyf(ntrace):
    """Residual of the normalized flow equation along a tau trace.

    Centered (nonuniform) differences of u~ in tau against
    eta (S~_sup - S~) u~.  Returns (interior taus, max-node residual).
    """
    taus = np.asarray(ntrace.snap_t, dtype=float)
    if taus.size < 3:
        raise InsufficientSamples(
            f"need at least 3 tau samples, got {taus.size}"
        )
    M = ntrace.manifold
    grid = ntrace.grid
    u_rows = np.asarray(ntrace.snap_u, dtype=float)
    out_t = []
    out_r = []
    for k in range(1, taus.size - 1):
        h_minus = taus[k] - taus[k - 1]
        h_plus = taus[k + 1] - taus[k]
        denom = h_minus * h_plus * (h_minus + h_plus)
        w_prev = -(h_plus**2) / denom
        w_next = h_minus**2 / denom
        w_mid = -(w_prev + w_next)
        du = w_prev * u_rows[k - 1] + w_mid * u_rows[k] + w_next * u_rows[k + 1]
        sf = scal_conformal(M, grid, u_rows[k])
        rhs_k = M.eta * (sf.sup - sf.values) * u_rows[k]
        out_t.append(float(taus[k]))
        out_r.append(float(np.abs(du - rhs_k).max()))
    return np.asarray(out_t), np.asarray(out_r)
