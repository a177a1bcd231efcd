"""Time integration of the Yamabe flow and its curvature-normalized variants.

The conformal factor u evolves by

    du/dt = (m-1) u^(-1/eta) Lap u - eta scal_model u^(1-1/eta)        (unnormalized)
    du/dt = same + eta S_ext u                                          (normalized)

where S_ext is the running supremum (increasing normalization, "cyf_plus")
or infimum ("cyf_minus") of the scalar curvature of the evolving metric,
recomputed from the current factor at every integrator stage.  Algebra
turns the unnormalized right side into -eta scal u and the normalized one
into eta (S_ext - scal) u, which is how the flow monitors are understood:
the normalized flows freeze exactly on metrics of constant curvature.

Time stepping is explicit midpoint Runge-Kutta under a diffusion CFL bound.
The long-run driver accumulates u with compensated (Kahan) summation so
that late-time gap decay is not floored by the dt-sized update granularity
of plain float64 accumulation.
"""

from dataclasses import dataclass, field

import numpy as np

from .conformal import ConformalFactor, ScalField, scal_conformal, conformal_laplacian, yamabe_residual
from .geometry import scal_phi
from ._kernels import VARIANT_CODE, advance_chunk

__all__ = [
    "VARIANTS",
    "FlowError",
    "PositivityLost",
    "StabilityViolation",
    "InsufficientSnapshots",
    "GapUnderflow",
    "FlowConfig",
    "FlowState",
    "FlowTrace",
    "ConvergenceReport",
    "rhs",
    "cfl_bound",
    "step",
    "run_flow",
    "apriori_bounds",
    "evolve_scal_check",
    "fit_gap_rate",
    "detect_convergence",
]

VARIANTS = ("unnormalized", "cyf_plus", "cyf_minus")


class FlowError(Exception):
    """Base class for integration failures; carries the failure time."""

    def __init__(self, message, t=None):
        self.t = t
        if t is not None:
            message = f"{message} (t={t:.6g})"
        super().__init__(message)


class PositivityLost(FlowError):
    """The factor left the positive cone: dt too large or blow-up."""


class StabilityViolation(FlowError):
    """Requested dt exceeds the diffusion stability bound."""


class InsufficientSnapshots(Exception):
    pass


class GapUnderflow(Exception):
    pass


@dataclass(frozen=True)
class FlowConfig:
    """Integration settings.

    variant        one of VARIANTS
    t_end          final time
    cfl_safety     fraction of the stability bound used as dt, in (0,1)
    tol_step       cap on the relative change of u per step
    tol_converge   tolerance used by convergence detection
    record_every   steps between monitor records
    snapshot_every records between full field snapshots
    """

    variant: str = "cyf_plus"
    t_end: float = 10.0
    cfl_safety: float = 0.8
    tol_step: float = 0.05
    tol_converge: float = 1e-3
    record_every: int = 100
    snapshot_every: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl_safety < 1:
            raise ValueError(f"cfl_safety must be in (0,1), got {self.cfl_safety}")
        if not self.tol_step > 0:
            raise ValueError(f"tol_step must be positive, got {self.tol_step}")
        if not self.tol_converge > 0:
            raise ValueError(f"tol_converge must be positive, got {self.tol_converge}")
        if self.record_every < 1 or self.snapshot_every < 1:
            raise ValueError("record_every and snapshot_every must be >= 1")


@dataclass(frozen=True)
class FlowState:
    """Snapshot of the flow: time, factor, curvature, last time derivative."""

    t: float
    u: ConformalFactor
    scal: ScalField
    dtu_norm: float


@dataclass(frozen=True)
class FlowTrace:
    """Monitor time series plus sparse full snapshots of one run.

    records hold, per record time: sup/inf of the scalar curvature, their
    gap, the factor extremes and the sup-norm of du/dt.  snap_u rows are
    full u fields at snap_t.  c1, c2 are the a-priori envelope computed
    from the initial data.
    """

    variant: str
    manifold: object
    grid: object
    t: np.ndarray
    s_sup: np.ndarray
    s_inf: np.ndarray
    gap: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    dtu_norm: np.ndarray
    snap_t: np.ndarray
    snap_u: np.ndarray
    c1: float = np.nan
    c2: float = np.nan
    time_label: str = "t"

    @property
    def n_records(self):
        return self.t.size

    def final_state(self, M=None, grid=None):
        """FlowState at the last snapshot time."""
        M = M or self.manifold
        grid = grid or self.grid
        u = ConformalFactor(self.snap_u[-1], time=float(self.snap_t[-1]))
        scal = scal_conformal(M, grid, u)
        i = int(np.argmin(np.abs(self.t - self.snap_t[-1])))
        return FlowState(t=float(self.snap_t[-1]), u=u, scal=scal, dtu_norm=float(self.dtu_norm[i]))


def _inv_pow(u, eta, out=None):
    # u^(-1/eta); the common eta = 1 case is a plain divide
    if eta == 1.0:
        return np.divide(1.0, u, out=out)
    return np.power(u, -1.0 / eta, out=out)


class _Kernel:
    """Preallocated right-hand-side evaluation for one (manifold, grid) pair."""

    def __init__(self, M, grid, variant):
        self.M = M
        self.grid = grid
        self.variant = variant
        n = grid.n
        self.s = scal_phi(M, grid.nodes)
        self.eta_s = M.eta * self.s
        self.kappa = (M.m - 1) / M.eta
        self.x4max = float(np.max(grid.nodes) ** 4)
        # buffers
        self.flux = np.zeros(n + 1)
        self.lap = np.empty(n)
        self.invu = np.empty(n)
        self.scal = np.empty(n)
        self.k = np.empty(n)
        self.tmp = np.empty(n)

    def rhs(self, u, k_out, carry=None):
        """Fill k_out with du/dt at u; return (s_sup, s_inf) of the curvature.

        carry, when given, holds the low-order bits of u (represented value
        u - carry) and is differenced through the flux stencil so that the
        curvature is evaluated to full accumulated precision.
        """
        M, grid = self.M, self.grid
        d = self.flux[1:-1]
        np.subtract(u[1:], u[:-1], out=d)
        if carry is not None:
            d -= carry[1:] - carry[:-1]
        d *= grid.face_coef
        np.subtract(self.flux[1:], self.flux[:-1], out=self.lap)
        self.lap *= grid.xpref
        _inv_pow(u, M.eta, out=self.invu)
        # scal = (s u - kappa lap) * invu / u
        np.multiply(self.s, u, out=self.scal)
        np.multiply(self.lap, self.kappa, out=self.tmp)
        self.scal -= self.tmp
        self.scal *= self.invu
        self.scal /= u
        s_sup = float(self.scal.max())
        s_inf = float(self.scal.min())
        # k = (m-1) invu lap - eta s u invu [+ eta S_ext u]
        np.multiply(self.invu, self.lap, out=k_out)
        k_out *= M.m - 1
        np.multiply(u, self.invu, out=self.tmp)
        self.tmp *= self.eta_s
        k_out -= self.tmp
        if self.variant != "unnormalized":
            s_ext = s_sup if self.variant == "cyf_plus" else s_inf
            np.multiply(u, M.eta * s_ext, out=self.tmp)
            k_out += self.tmp
        return s_sup, s_inf

def rhs(M, grid, u, variant):
    """Right-hand side of the flow for factor u (array or ConformalFactor)."""
    vals = u.values if isinstance(u, ConformalFactor) else np.asarray(u, dtype=float)
    if np.any(vals <= 0):
        raise ValueError("conformal factor must be strictly positive")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    kern = _Kernel(M, grid, variant)
    k = np.empty_like(vals)
    kern.rhs(vals, k)
    return k


def cfl_bound(M, grid, u):
    """Largest stable dt for explicit stepping at factor u.

    h^2 / (2 (m-1) max(u^(-1/eta)) x^4), minimized over nodes; the x^4
    factor makes the outer edge of the collar the binding location.
    """
    vals = u.values if isinstance(u, ConformalFactor) else np.asarray(u, dtype=float)
    maxinv = _inv_pow(float(vals.min()), M.eta)
    per_node = grid.h**2 / (2.0 * (M.m - 1) * maxinv * grid.nodes**4)
    return float(per_node.min())


def step(M, grid, state, dt, variant):
    """One explicit midpoint step of length dt from state.

    Raises StabilityViolation when dt exceeds the diffusion bound and
    PositivityLost when the factor leaves the positive cone.
    """
    bound = cfl_bound(M, grid, state.u)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityViolation(
            f"dt={dt:.3e} exceeds stability bound {bound:.3e}", t=state.t
        )
    u = state.u.values
    kern = _Kernel(M, grid, variant)
    k1 = np.empty_like(u)
    kern.rhs(u, k1)
    u_half = u + 0.5 * dt * k1
    if u_half.min() <= 0:
        raise PositivityLost("factor lost positivity at half step", t=state.t)
    k2 = np.empty_like(u)
    kern.rhs(u_half, k2)
    u_new = u + dt * k2
    if u_new.min() <= 0:
        raise PositivityLost("factor lost positivity", t=state.t + dt)
    t_new = state.t + dt
    factor = ConformalFactor(u_new, time=t_new)
    return FlowState(
        t=t_new,
        u=factor,
        scal=scal_conformal(M, grid, factor),
        dtu_norm=float(np.abs(k2).max()),
    )


def apriori_bounds(M, u0):
    """Envelope [c1, c2] containing the factor for all times.

    From the integrated extremum inequalities of the normalized flow:

        c1 = min(u0_min^(1/eta), a2/a1)^eta
        c2 = (u0_max^(1/eta) + a1/a2)^eta
    """
    vals = u0.values if isinstance(u0, ConformalFactor) else np.asarray(u0, dtype=float)
    e = 1.0 / M.eta
    c1 = min(vals.min() ** e, M.a2 / M.a1) ** M.eta
    c2 = (vals.max() ** e + M.a1 / M.a2) ** M.eta
    return float(c1), float(c2)


def run_flow(M, grid, config, u0):
    """Integrate to config.t_end with adaptive dt; return the FlowTrace.

    dt is cfl_safety times the running stability bound, additionally capped
    so no step changes u by more than tol_step relatively.  Monitors are
    recorded every record_every steps (plus t=0 and the final time); every
    snapshot_every-th record also stores the full field.
    """
    u0 = np.asarray(u0.values if isinstance(u0, ConformalFactor) else u0, dtype=float)
    if u0.ndim == 0:
        u0 = np.full(grid.n, float(u0))
    if u0.shape != grid.nodes.shape:
        raise ValueError(f"u0 shape {u0.shape} does not match grid")
    if u0.min() <= 0:
        raise ValueError("u0 must be strictly positive")

    kern = _Kernel(M, grid, config.variant)
    c1, c2 = apriori_bounds(M, u0)

    u = u0.copy()
    carry = np.zeros_like(u)  # Kahan compensation of the u accumulator
    k1 = np.empty_like(u)
    k2 = np.empty_like(u)
    u_half = np.empty_like(u)

    rec_t, rec_sup, rec_inf, rec_umin, rec_umax, rec_dtu = [], [], [], [], [], []
    snap_t, snap_u = [], []

    def record(t, s_sup, s_inf, dtu, n_rec):
        rec_t.append(t)
        rec_sup.append(s_sup)
        rec_inf.append(s_inf)
        rec_umin.append(float(u.min()))
        rec_umax.append(float(u.max()))
        rec_dtu.append(dtu)
        if n_rec % config.snapshot_every == 0:
            snap_t.append(t)
            snap_u.append(u.copy())

    # initial record; du/dt at t=0 comes from one rhs evaluation
    s_sup, s_inf = kern.rhs(u, k1)
    dtu = float(np.abs(k1).max())
    record(0.0, s_sup, s_inf, dtu, 0)

    t = 0.0
    t_carry = 0.0
    n_rec = 1
    t_end = config.t_end
    while t < t_end * (1.0 - 1e-14):
        status, t, t_carry, dtu, steps = advance_chunk(
            u, carry, k1, k2, u_half, kern.flux, kern.lap, kern.invu, kern.scal,
            grid.face_coef, grid.xpref, kern.s, kern.eta_s,
            M.eta, float(M.m - 1), kern.kappa, VARIANT_CODE[config.variant],
            config.cfl_safety, config.tol_step, kern.x4max, grid.h**2,
            t, t_carry, dtu, t_end, config.record_every,
        )
        if status:
            raise PositivityLost("factor lost positivity", t=t)
        s_sup, s_inf = kern.rhs(u, k1, carry)  # monitors at the new time
        record(t, s_sup, s_inf, float(np.abs(k1).max()), n_rec)
        n_rec += 1

    return FlowTrace(
        variant=config.variant,
        manifold=M,
        grid=grid,
        t=np.asarray(rec_t),
        s_sup=np.asarray(rec_sup),
        s_inf=np.asarray(rec_inf),
        gap=np.asarray(rec_sup) - np.asarray(rec_inf),
        u_min=np.asarray(rec_umin),
        u_max=np.asarray(rec_umax),
        dtu_norm=np.asarray(rec_dtu),
        snap_t=np.asarray(snap_t),
        snap_u=np.asarray(snap_u),
        c1=c1,
        c2=c2,
    )


def _dt_weights(h_minus, h_plus):
    # second-order one-sided-free derivative weights on a nonuniform 3-point stencil
    denom = h_minus * h_plus * (h_minus + h_plus)
    w_prev = -(h_plus**2) / denom
    w_next = h_minus**2 / denom
    w_mid = -(w_prev + w_next)
    return w_prev, w_mid, w_next


def evolve_scal_check(M, grid, trace):
    """Cross-validate the curvature evolution equation along a trace.

    At each interior snapshot time, compares the centered time derivative
    of the curvature field against

        (m-1) Lap_g scal + scal (scal - S_ext)

    with S_ext the extremum matching the trace's variant (zero for the
    unnormalized flow).  Returns (times, max-node residual per time).
    """
    if trace.snap_t.size < 3:
        raise InsufficientSnapshots(
            f"need at least 3 snapshots, trace has {trace.snap_t.size}"
        )
    times = trace.snap_t
    scal_fields = [scal_conformal(M, grid, u) for u in trace.snap_u]
    out_t = []
    out_r = []
    for k in range(1, times.size - 1):
        h_minus = times[k] - times[k - 1]
        h_plus = times[k + 1] - times[k]
        w_prev, w_mid, w_next = _dt_weights(h_minus, h_plus)
        dscal = (
            w_prev * scal_fields[k - 1].values
            + w_mid * scal_fields[k].values
            + w_next * scal_fields[k + 1].values
        )
        sk = scal_fields[k]
        if trace.variant == "cyf_plus":
            s_ext = sk.sup
        elif trace.variant == "cyf_minus":
            s_ext = sk.inf
        else:
            s_ext = 0.0
        lap_g = conformal_laplacian(M, grid, trace.snap_u[k], sk.values)
        rhs_k = (M.m - 1) * lap_g + sk.values * (sk.values - s_ext)
        out_t.append(float(times[k]))
        out_r.append(float(np.abs(dscal - rhs_k).max()))
    return np.asarray(out_t), np.asarray(out_r)


def fit_gap_rate(trace, t_lo, t_hi, gap_floor=1e-14):
    """Least-squares fit of log(gap) over records in [t_lo, t_hi].

    Returns (C, rate) with gap ~ C exp(rate t).  Raises GapUnderflow when
    any gap in the window sits at or below gap_floor (shorten the window).
    """
    mask = (trace.t >= t_lo) & (trace.t <= t_hi)
    if mask.sum() < 5:
        raise ValueError(
            f"need at least 5 records in [{t_lo}, {t_hi}], found {int(mask.sum())}"
        )
    gaps = trace.gap[mask]
    if np.any(gaps <= gap_floor):
        raise GapUnderflow(
            f"gap at or below {gap_floor:g} inside the fit window"
        )
    ts = trace.t[mask]
    rate, logc = np.polyfit(ts, np.log(gaps), 1)
    return float(np.exp(logc)), float(rate)


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    s_star: float
    s_star_negative: bool
    s_star_in_initial_bracket: bool
    residual_sup: float
    gap: float
    dtu_norm: float
    tol: float


def detect_convergence(M, grid, state, tol, bracket0=None):
    """Decide convergence of a state and report the limit candidate.

    Converged when the curvature gap is below tol * |S_sup| and the time
    derivative of the factor is below tol.  The candidate constant is the
    bracket midpoint; the report carries its sign, membership in the
    initial bracket (when bracket0=(s_inf0, s_sup0) is given) and the sup
    norm of the stationary-equation residual at the candidate.
    """
    s_sup = state.scal.sup
    s_inf = state.scal.inf
    gap = s_sup - s_inf
    s_star = 0.5 * (s_sup + s_inf)
    converged = (gap <= tol * abs(s_sup)) and (state.dtu_norm <= tol)
    if bracket0 is None:
        in_bracket = True
    else:
        lo, hi = bracket0
        in_bracket = (lo - 1e-12) <= s_star <= (hi + 1e-12)
    resid = float(np.abs(yamabe_residual(M, grid, state.u, s_star)).max())
    return ConvergenceReport(
        converged=bool(converged),
        s_star=float(s_star),
        s_star_negative=bool(s_star < 0),
        s_star_in_initial_bracket=bool(in_bracket),
        residual_sup=resid,
        gap=float(gap),
        dtu_norm=float(state.dtu_norm),
        tol=float(tol),
    )
