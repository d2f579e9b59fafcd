"""Numba kernels: WENO5 reconstruction in characteristic fields and Godunov-type fluxes.

All kernels operate on arrays padded with ``NG`` ghost cells on both sides;
ghost values are filled by :func:`fill_ghosts` before the flux sweep.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NG = 3

BC_PERIODIC = 0
BC_WALL = 1
BC_OUTFLOW = 2

WENO_JS = 0
WENO_Z = 1


@njit(cache=True, inline="always")
def weno5_face(a, b, c, d, e, variant):
    """Value at the right face of cell ``c`` from the stencil a, b, c, d, e."""
    b0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
    q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    q1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    q2 = (2.0 * c + 5.0 * d - e) / 6.0
    if variant == WENO_Z:
        eps = 1e-40
        tau = abs(b0 - b2)
        a0 = 0.1 * (1.0 + tau / (b0 + eps))
        a1 = 0.6 * (1.0 + tau / (b1 + eps))
        a2 = 0.3 * (1.0 + tau / (b2 + eps))
    else:
        eps = 1e-6
        a0 = 0.1 / (eps + b0) ** 2
        a1 = 0.6 / (eps + b1) ** 2
        a2 = 0.3 / (eps + b2) ** 2
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


@njit(cache=True)
def fill_ghosts(q, parity, bc_left, bc_right):
    """Fill ghost cells of a padded 1D field; parity -1 flips sign at walls."""
    n = q.size - 2 * NG
    for g in range(NG):
        # left
        if bc_left == BC_PERIODIC:
            q[NG - 1 - g] = q[NG + n - 1 - g]
        elif bc_left == BC_WALL:
            q[NG - 1 - g] = parity * q[NG + g]
        else:
            q[NG - 1 - g] = q[NG]
        # right
        if bc_right == BC_PERIODIC:
            q[NG + n + g] = q[NG + g]
        elif bc_right == BC_WALL:
            q[NG + n + g] = parity * q[NG + n - 1 - g]
        else:
            q[NG + n + g] = q[NG + n - 1]


@njit(cache=True, inline="always")
def _acoustic_star(pl, ul, zl, pr, ur, zr):
    inv = 1.0 / (zl + zr)
    us = (zl * ul + zr * ur - (pr - pl)) * inv
    ps = (zr * pl + zl * pr - zl * zr * (ur - ul)) * inv
    return us, ps


# --------------------------------------------------------------------------
# Lagrangian Euler: q = (v, u, E) with E specific total energy


@njit(cache=True)
def rhs_lagrangian(v, u, E, gamma, dx, bc_left, bc_right, variant, dv, du, dE):
    """Semi-discrete right-hand side of v_t - u_x = 0, u_t + p_x = 0, E_t + (pu)_x = 0.

    Inputs are padded arrays; ghosts are filled here.  Returns the number of
    faces that fell back to first-order reconstruction (negative if a cell
    state is non-physical).
    """
    fill_ghosts(v, 1.0, bc_left, bc_right)
    fill_ghosts(u, -1.0, bc_left, bc_right)
    fill_ghosts(E, 1.0, bc_left, bc_right)
    m = v.size
    n = m - 2 * NG
    p = np.empty(m)
    for i in range(m):
        p[i] = (gamma - 1.0) * (E[i] - 0.5 * u[i] * u[i]) / v[i]
        if not (p[i] > 0.0 and v[i] > 0.0):
            return -1
    fv = np.empty(n + 1)
    fu = np.empty(n + 1)
    fE = np.empty(n + 1)
    w1 = np.empty(6)
    w2 = np.empty(6)
    w3 = np.empty(6)
    fallbacks = 0
    for f in range(n + 1):
        i = NG - 1 + f  # face between cells i and i+1
        C2 = 0.5 * gamma * (p[i] / v[i] + p[i + 1] / v[i + 1])
        C = np.sqrt(C2)
        for s in range(6):
            j = i - 2 + s
            w1[s] = p[j] - C * u[j]
            w2[s] = p[j] + C2 * v[j]
            w3[s] = p[j] + C * u[j]
        # left state: cell i, stencil i-2..i+2 ; right state: cell i+1 mirrored
        a1 = weno5_face(w1[0], w1[1], w1[2], w1[3], w1[4], variant)
        a2 = weno5_face(w2[0], w2[1], w2[2], w2[3], w2[4], variant)
        a3 = weno5_face(w3[0], w3[1], w3[2], w3[3], w3[4], variant)
        b1 = weno5_face(w1[5], w1[4], w1[3], w1[2], w1[1], variant)
        b2 = weno5_face(w2[5], w2[4], w2[3], w2[2], w2[1], variant)
        b3 = weno5_face(w3[5], w3[4], w3[3], w3[2], w3[1], variant)
        pl = 0.5 * (a1 + a3)
        ul = (a3 - a1) / (2.0 * C)
        vl = (a2 - pl) / C2
        pr = 0.5 * (b1 + b3)
        ur = (b3 - b1) / (2.0 * C)
        vr = (b2 - pr) / C2
        if not (pl > 0.0 and vl > 0.0 and pr > 0.0 and vr > 0.0):
            pl = p[i]
            ul = u[i]
            vl = v[i]
            pr = p[i + 1]
            ur = u[i + 1]
            vr = v[i + 1]
            fallbacks += 1
        # impedances with a two-shock correction for compressive jumps
        comp = ul - ur
        if comp < 0.0:
            comp = 0.0
        zl = np.sqrt(gamma * pl / vl) + 0.5 * (gamma + 1.0) * comp / vl
        zr = np.sqrt(gamma * pr / vr) + 0.5 * (gamma + 1.0) * comp / vr
        us, ps = _acoustic_star(pl, ul, zl, pr, ur, zr)
        fv[f] = -us
        fu[f] = ps
        fE[f] = ps * us
    inv = 1.0 / dx
    for k in range(n):
        dv[k] = -(fv[k + 1] - fv[k]) * inv
        du[k] = -(fu[k + 1] - fu[k]) * inv
        dE[k] = -(fE[k + 1] - fE[k]) * inv
    return fallbacks


# --------------------------------------------------------------------------
# p-system: q = (v, u), p = p* (v*/(K v))^gamma


@njit(cache=True)
def rhs_psystem(v, u, K, gamma, p_star, v_star, dx, bc_left, bc_right, variant, dv, du):
    fill_ghosts(v, 1.0, bc_left, bc_right)
    fill_ghosts(u, -1.0, bc_left, bc_right)
    fill_ghosts(K, 1.0, bc_left, bc_right)
    m = v.size
    n = m - 2 * NG
    p = np.empty(m)
    for i in range(m):
        if not v[i] > 0.0:
            return -1
        p[i] = p_star * (v_star / (K[i] * v[i])) ** gamma
    fv = np.empty(n + 1)
    fu = np.empty(n + 1)
    w1 = np.empty(6)
    w3 = np.empty(6)
    fallbacks = 0
    for f in range(n + 1):
        i = NG - 1 + f
        C = np.sqrt(0.5 * gamma * (p[i] / v[i] + p[i + 1] / v[i + 1]))
        for s in range(6):
            j = i - 2 + s
            w1[s] = p[j] - C * u[j]
            w3[s] = p[j] + C * u[j]
        a1 = weno5_face(w1[0], w1[1], w1[2], w1[3], w1[4], variant)
        a3 = weno5_face(w3[0], w3[1], w3[2], w3[3], w3[4], variant)
        b1 = weno5_face(w1[5], w1[4], w1[3], w1[2], w1[1], variant)
        b3 = weno5_face(w3[5], w3[4], w3[3], w3[2], w3[1], variant)
        pl = 0.5 * (a1 + a3)
        ul = (a3 - a1) / (2.0 * C)
        pr = 0.5 * (b1 + b3)
        ur = (b3 - b1) / (2.0 * C)
        if not (pl > 0.0 and pr > 0.0):
            pl = p[i]
            ul = u[i]
            pr = p[i + 1]
            ur = u[i + 1]
            fallbacks += 1
        # volumes consistent with each side's own K
        vl = v_star / K[i] * (p_star / pl) ** (1.0 / gamma)
        vr = v_star / K[i + 1] * (p_star / pr) ** (1.0 / gamma)
        comp = ul - ur
        if comp < 0.0:
            comp = 0.0
        zl = np.sqrt(gamma * pl / vl) + 0.5 * (gamma + 1.0) * comp / vl
        zr = np.sqrt(gamma * pr / vr) + 0.5 * (gamma + 1.0) * comp / vr
        us, ps = _acoustic_star(pl, ul, zl, pr, ur, zr)
        fv[f] = -us
        fu[f] = ps
    inv = 1.0 / dx
    for k in range(n):
        dv[k] = -(fv[k + 1] - fv[k]) * inv
        du[k] = -(fu[k + 1] - fu[k]) * inv
    return fallbacks


# --------------------------------------------------------------------------
# Eulerian Euler: q = (rho, m, E) with E total energy per volume


@njit(cache=True, inline="always")
def _euler_flux(rho, u, p, E):
    return rho * u, rho * u * u + p, (E + p) * u


@njit(cache=True)
def _hllc(rl, ul, pl, rr, ur, pr, gamma):
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    El = pl / (gamma - 1.0) + 0.5 * rl * ul * ul
    Er = pr / (gamma - 1.0) + 0.5 * rr * ur * ur
    sl = min(ul - cl, ur - cr)
    sr = max(ul + cl, ur + cr)
    f1l, f2l, f3l = _euler_flux(rl, ul, pl, El)
    if sl >= 0.0:
        return f1l, f2l, f3l
    f1r, f2r, f3r = _euler_flux(rr, ur, pr, Er)
    if sr <= 0.0:
        return f1r, f2r, f3r
    sm = (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) / (rl * (sl - ul) - rr * (sr - ur))
    if sm >= 0.0:
        fac = rl * (sl - ul) / (sl - sm)
        s1 = fac
        s2 = fac * sm
        s3 = fac * (El / rl + (sm - ul) * (sm + pl / (rl * (sl - ul))))
        return f1l + sl * (s1 - rl), f2l + sl * (s2 - rl * ul), f3l + sl * (s3 - El)
    fac = rr * (sr - ur) / (sr - sm)
    s1 = fac
    s2 = fac * sm
    s3 = fac * (Er / rr + (sm - ur) * (sm + pr / (rr * (sr - ur))))
    return f1r + sr * (s1 - rr), f2r + sr * (s2 - rr * ur), f3r + sr * (s3 - Er)


@njit(cache=True)
def rhs_eulerian(rho, mom, E, gamma, dx, bc_left, bc_right, variant, drho, dmom, dE):
    fill_ghosts(rho, 1.0, bc_left, bc_right)
    fill_ghosts(mom, -1.0, bc_left, bc_right)
    fill_ghosts(E, 1.0, bc_left, bc_right)
    m = rho.size
    n = m - 2 * NG
    u = np.empty(m)
    p = np.empty(m)
    for i in range(m):
        if not rho[i] > 0.0:
            return -1
        u[i] = mom[i] / rho[i]
        p[i] = (gamma - 1.0) * (E[i] - 0.5 * mom[i] * u[i])
        if not p[i] > 0.0:
            return -1
    f1 = np.empty(n + 1)
    f2 = np.empty(n + 1)
    f3 = np.empty(n + 1)
    w1 = np.empty(6)
    w2 = np.empty(6)
    w3 = np.empty(6)
    fallbacks = 0
    for f in range(n + 1):
        i = NG - 1 + f
        rbar = 0.5 * (rho[i] + rho[i + 1])
        c2 = gamma * 0.5 * (p[i] + p[i + 1]) / rbar
        c = np.sqrt(c2)
        z = rbar * c
        for s in range(6):
            j = i - 2 + s
            w1[s] = p[j] - z * u[j]
            w2[s] = rho[j] - p[j] / c2
            w3[s] = p[j] + z * u[j]
        a1 = weno5_face(w1[0], w1[1], w1[2], w1[3], w1[4], variant)
        a2 = weno5_face(w2[0], w2[1], w2[2], w2[3], w2[4], variant)
        a3 = weno5_face(w3[0], w3[1], w3[2], w3[3], w3[4], variant)
        b1 = weno5_face(w1[5], w1[4], w1[3], w1[2], w1[1], variant)
        b2 = weno5_face(w2[5], w2[4], w2[3], w2[2], w2[1], variant)
        b3 = weno5_face(w3[5], w3[4], w3[3], w3[2], w3[1], variant)
        pl = 0.5 * (a1 + a3)
        ul = (a3 - a1) / (2.0 * z)
        rl = a2 + pl / c2
        pr = 0.5 * (b1 + b3)
        ur = (b3 - b1) / (2.0 * z)
        rr = b2 + pr / c2
        if not (pl > 0.0 and rl > 0.0 and pr > 0.0 and rr > 0.0):
            rl = rho[i]
            ul = u[i]
            pl = p[i]
            rr = rho[i + 1]
            ur = u[i + 1]
            pr = p[i + 1]
            fallbacks += 1
        f1[f], f2[f], f3[f] = _hllc(rl, ul, pl, rr, ur, pr, gamma)
    inv = 1.0 / dx
    for k in range(n):
        drho[k] = -(f1[k + 1] - f1[k]) * inv
        dmom[k] = -(f2[k + 1] - f2[k]) * inv
        dE[k] = -(f3[k + 1] - f3[k]) * inv
    return fallbacks


# --------------------------------------------------------------------------
# wave-speed bounds


@njit(cache=True)
def max_speed_lagrangian(v, u, E, gamma):
    s = 0.0
    for i in range(v.size):
        p = (gamma - 1.0) * (E[i] - 0.5 * u[i] * u[i]) / v[i]
        if not (p > 0.0 and v[i] > 0.0):
            return np.nan
        c = np.sqrt(gamma * p / v[i])
        if c > s:
            s = c
    return s


@njit(cache=True)
def max_speed_psystem(v, K, gamma, p_star, v_star):
    s = 0.0
    for i in range(v.size):
        if not v[i] > 0.0:
            return np.nan
        p = p_star * (v_star / (K[i] * v[i])) ** gamma
        c = np.sqrt(gamma * p / v[i])
        if c > s:
            s = c
    return s


@njit(cache=True)
def max_speed_eulerian(rho, mom, E, gamma):
    s = 0.0
    for i in range(rho.size):
        if not rho[i] > 0.0:
            return np.nan
        u = mom[i] / rho[i]
        p = (gamma - 1.0) * (E[i] - 0.5 * mom[i] * u)
        if not p > 0.0:
            return np.nan
        c = abs(u) + np.sqrt(gamma * p / rho[i])
        if c > s:
            s = c
    return s
