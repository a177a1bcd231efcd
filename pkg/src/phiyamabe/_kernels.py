"""Inner time-stepping loop, jitted with numba when available.

Both implementations advance the factor by explicit midpoint steps with
Kahan-compensated accumulation and execute the same per-element arithmetic
in the same order, so the integrator behaves identically whichever path is
active.  A chunk runs at most max_steps steps and never past t_end; the
driver records monitors between chunks.

The compensation vector holds the low-order bits of the factor (the
represented value is u - carry).  Because the Laplacian is linear and is
the one place where rounding gets amplified by 1/h^2, every curvature
evaluation differences (u - carry) through the flux stencil.  Without this
the curvature gap of a converged run floors near
4 eps (m-1)/eta x_max^4 / h^2 instead of decaying to O(eps).

Status codes: 0 chunk completed, 1 positivity lost at the half step,
2 positivity lost after the full step.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


VARIANT_CODE = {"unnormalized": 0, "cyf_plus": 1, "cyf_minus": 2}


@njit(cache=True, nogil=True)
def _rhs_fill(u, carry, k, flux, lap, invu, scal, face_coef, xpref, s, eta_s,
              eta, m1, kappa, vcode):
    n = u.shape[0]
    flux[0] = 0.0
    flux[n] = 0.0
    for i in range(n - 1):
        flux[i + 1] = ((u[i + 1] - u[i]) - (carry[i + 1] - carry[i])) * face_coef[i]
    for i in range(n):
        lap[i] = (flux[i + 1] - flux[i]) * xpref[i]
    if eta == 1.0:
        for i in range(n):
            invu[i] = 1.0 / u[i]
    else:
        p = -1.0 / eta
        for i in range(n):
            invu[i] = u[i] ** p
    s_sup = -np.inf
    s_inf = np.inf
    for i in range(n):
        v = ((s[i] * u[i]) - (lap[i] * kappa)) * invu[i] / u[i]
        scal[i] = v
        if v > s_sup:
            s_sup = v
        if v < s_inf:
            s_inf = v
    if vcode == 0:
        for i in range(n):
            k[i] = (invu[i] * lap[i]) * m1 - (u[i] * invu[i]) * eta_s[i]
    else:
        s_ext = s_sup if vcode == 1 else s_inf
        se = eta * s_ext
        for i in range(n):
            k[i] = ((invu[i] * lap[i]) * m1 - (u[i] * invu[i]) * eta_s[i]) + u[i] * se
    return s_sup, s_inf


@njit(cache=True, nogil=True)
def advance_chunk_numba(u, carry, k1, k2, u1, flux, lap, invu, scal,
                        face_coef, xpref, s, eta_s,
                        eta, m1, kappa, vcode, cfl_safety, tol_step,
                        x4max, h2, t, t_carry, dtu_prev, t_end, max_steps):
    n = u.shape[0]
    steps = 0
    tiny = 1.0 - 1e-14
    while steps < max_steps and t < t_end * tiny:
        u_min = u[0]
        for i in range(1, n):
            if u[i] < u_min:
                u_min = u[i]
        if eta == 1.0:
            maxinv = 1.0 / u_min
        else:
            maxinv = u_min ** (-1.0 / eta)
        dt = cfl_safety * (h2 / ((2.0 * m1) * maxinv * x4max))
        if dtu_prev > 0.0:
            cap = tol_step * u_min / dtu_prev
            if cap < dt:
                dt = cap
        rem = t_end - t
        if rem < dt:
            dt = rem

        _rhs_fill(u, carry, k1, flux, lap, invu, scal, face_coef, xpref, s,
                  eta_s, eta, m1, kappa, vcode)
        hdt = 0.5 * dt
        ok = True
        for i in range(n):
            u1[i] = u[i] + k1[i] * hdt
            if u1[i] <= 0.0:
                ok = False
        if not ok:
            return 1, t, t_carry, dtu_prev, steps
        _rhs_fill(u1, carry, k2, flux, lap, invu, scal, face_coef, xpref, s,
                  eta_s, eta, m1, kappa, vcode)

        ok = True
        dtu = 0.0
        for i in range(n):
            y = k2[i] * dt
            yc = y - carry[i]
            uw = u[i] + yc
            carry[i] = (uw - u[i]) - yc
            u[i] = uw
            if uw <= 0.0:
                ok = False
            a = k2[i] if k2[i] >= 0.0 else -k2[i]
            if a > dtu:
                dtu = a
        dtc = dt - t_carry
        t_new = t + dtc
        t_carry = (t_new - t) - dtc
        t = t_new
        steps += 1
        dtu_prev = dtu
        if not ok:
            return 2, t, t_carry, dtu_prev, steps
    return 0, t, t_carry, dtu_prev, steps


def advance_chunk_numpy(u, carry, k1, k2, u1, flux, lap, invu, scal,
                        face_coef, xpref, s, eta_s,
                        eta, m1, kappa, vcode, cfl_safety, tol_step,
                        x4max, h2, t, t_carry, dtu_prev, t_end, max_steps):
    n = u.shape[0]
    y = np.empty(n)
    yc = np.empty(n)
    uw = np.empty(n)
    tmp = np.empty(n)

    def rhs_fill(uu, k):
        d = flux[1:-1]
        np.subtract(uu[1:], uu[:-1], out=d)
        np.subtract(d, carry[1:] - carry[:-1], out=d)
        np.multiply(d, face_coef, out=d)
        flux[0] = 0.0
        flux[-1] = 0.0
        np.subtract(flux[1:], flux[:-1], out=lap)
        np.multiply(lap, xpref, out=lap)
        if eta == 1.0:
            np.divide(1.0, uu, out=invu)
        else:
            np.power(uu, -1.0 / eta, out=invu)
        np.multiply(s, uu, out=scal)
        np.multiply(lap, kappa, out=tmp)
        np.subtract(scal, tmp, out=scal)
        np.multiply(scal, invu, out=scal)
        np.divide(scal, uu, out=scal)
        s_sup = float(scal.max())
        s_inf = float(scal.min())
        np.multiply(invu, lap, out=k)
        np.multiply(k, m1, out=k)
        np.multiply(uu, invu, out=tmp)
        np.multiply(tmp, eta_s, out=tmp)
        np.subtract(k, tmp, out=k)
        if vcode != 0:
            s_ext = s_sup if vcode == 1 else s_inf
            np.multiply(uu, eta * s_ext, out=tmp)
            np.add(k, tmp, out=k)
        return s_sup, s_inf

    steps = 0
    tiny = 1.0 - 1e-14
    while steps < max_steps and t < t_end * tiny:
        u_min = float(u.min())
        maxinv = 1.0 / u_min if eta == 1.0 else u_min ** (-1.0 / eta)
        dt = cfl_safety * (h2 / ((2.0 * m1) * maxinv * x4max))
        if dtu_prev > 0.0:
            cap = tol_step * u_min / dtu_prev
            if cap < dt:
                dt = cap
        rem = t_end - t
        if rem < dt:
            dt = rem

        rhs_fill(u, k1)
        np.multiply(k1, 0.5 * dt, out=y)
        np.add(u, y, out=u1)
        if u1.min() <= 0.0:
            return 1, t, t_carry, dtu_prev, steps
        rhs_fill(u1, k2)

        np.multiply(k2, dt, out=y)
        np.subtract(y, carry, out=yc)
        np.add(u, yc, out=uw)
        np.subtract(uw, u, out=y)
        np.subtract(y, yc, out=carry)
        u[:] = uw
        dtc = dt - t_carry
        t_new = t + dtc
        t_carry = (t_new - t) - dtc
        t = t_new
        steps += 1
        dtu_prev = float(np.abs(k2, out=tmp).max())
        if u.min() <= 0.0:
            return 2, t, t_carry, dtu_prev, steps
    return 0, t, t_carry, dtu_prev, steps


advance_chunk = advance_chunk_numba if HAVE_NUMBA else advance_chunk_numpy
