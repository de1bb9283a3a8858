"""numba kernels for the inner loop.

Kept in one module on purpose: numba's on-disk cache is invalidated per
source file, so kernels that inline each other must live together.
"""
import math

import numba
import numpy as np


@numba.njit(cache=True)
def drive_kernel(t, drv):
    return drv[0] * math.sin(drv[2] * t + drv[4]), drv[1] * math.sin(drv[3] * t + drv[5])


@numba.njit(cache=True)
def rhs_into(out, p, e1, e2, c):
    """Write dPi/dt into ``out``; c = (d1, d2, g, gp1, gp2, gr1, gr2, zt1, zt2)."""
    d1 = c[0]
    d2 = c[1]
    g2 = 2.0 * c[2]
    gp1 = c[3]
    gp2 = c[4]
    gr1 = c[5]
    gr2 = c[6]
    gpp = gp1 + gp2

    # 0 0x, 1 0y, 2 0z, 3 x0, 4 xx, 5 xy, 6 xz, 7 y0,
    # 8 yx, 9 yy, 10 yz, 11 z0, 12 zx, 13 zy, 14 zz
    out[0] = d2 * p[1] - gp2 * p[0]
    out[1] = -d2 * p[0] + e2 * p[2] - g2 * p[6] - gp2 * p[1]
    out[2] = -e2 * p[1] + g2 * p[5] - gr2 * (p[2] - c[8])

    out[3] = d1 * p[7] - gp1 * p[3]
    out[7] = -d1 * p[3] + e1 * p[11] - g2 * p[12] - gp1 * p[7]
    out[11] = -e1 * p[7] + g2 * p[8] - gr1 * (p[11] - c[7])

    out[4] = d2 * p[5] + d1 * p[8] - gpp * p[4]
    out[5] = -g2 * p[2] - d2 * p[4] + d1 * p[9] + e2 * p[6] - gpp * p[5]
    # eps1 multiplies Pi_zx here; the commutator with sigma^1_x fixes it.
    out[8] = -g2 * p[11] - d1 * p[4] + d2 * p[9] + e1 * p[12] - gpp * p[8]
    out[6] = g2 * p[1] - e2 * p[5] + d1 * p[10] - (gp1 + gr2) * p[6]
    out[12] = g2 * p[7] - e1 * p[8] + d2 * p[13] - (gp2 + gr1) * p[12]
    out[9] = -d1 * p[5] - d2 * p[8] + e2 * p[10] + e1 * p[13] - gpp * p[9]
    out[10] = -d1 * p[6] - e2 * p[9] + e1 * p[14] - (gp1 + gr2) * p[10]
    out[13] = -d2 * p[12] - e1 * p[9] + e2 * p[14] - (gr1 + gp2) * p[13]
    out[14] = -e1 * p[10] - e2 * p[13] - (gr1 + gr2) * (p[14] - c[7] * c[8])


@numba.njit(cache=True, inline="always")
def neumaier_add(s, c, x):
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@numba.njit(cache=True)
def accumulate_block(s, c, values):
    for i in range(values.shape[0]):
        s, c = neumaier_add(s, c, values[i])
    return s, c


@numba.njit(cache=True)
def accumulate_constant(s, c, value, count):
    for _ in range(count):
        s, c = neumaier_add(s, c, value)
    return s, c


@numba.njit(cache=True)
def euler_into(out, p, t, dt, c, drv, k1):
    e1, e2 = drive_kernel(t, drv)
    rhs_into(k1, p, e1, e2, c)
    for i in range(15):
        out[i] = p[i] + dt * k1[i]


@numba.njit(cache=True)
def heun_into(out, p, t, dt, c, drv, k1, k2, tmp):
    e1, e2 = drive_kernel(t, drv)
    rhs_into(k1, p, e1, e2, c)
    for i in range(15):
        tmp[i] = p[i] + dt * k1[i]
    e1, e2 = drive_kernel(t + dt, drv)
    rhs_into(k2, tmp, e1, e2, c)
    h = 0.5 * dt
    for i in range(15):
        out[i] = p[i] + h * (k1[i] + k2[i])


@numba.njit(cache=True)
def advance(p, k0, nsteps, dt, method, c, drv,
             avg_start, avg_stop, avg_idx, sums, comps, maxabs):
    """Advance ``p`` in place by ``nsteps`` steps starting at step index ``k0``.

    States at step indices avg_start <= k < avg_stop are added to the
    compensated sums. Returns (failed_step or -1, max |Pi| seen).
    """
    k1 = np.empty(15)
    k2 = np.empty(15)
    tmp = np.empty(15)
    nxt = np.empty(15)
    nav = avg_idx.shape[0]
    # drive values at the current step; Heun reuses the end-of-step values
    e1, e2 = drive_kernel(k0 * dt, drv)
    for j in range(nsteps):
        k = k0 + j
        if avg_start <= k < avg_stop:
            for m in range(nav):
                sums[m], comps[m] = neumaier_add(sums[m], comps[m], p[avg_idx[m]])
        rhs_into(k1, p, e1, e2, c)
        if method == 0:
            for i in range(15):
                nxt[i] = p[i] + dt * k1[i]
            e1, e2 = drive_kernel((k + 1) * dt, drv)
        else:
            for i in range(15):
                tmp[i] = p[i] + dt * k1[i]
            e1, e2 = drive_kernel((k + 1) * dt, drv)
            rhs_into(k2, tmp, e1, e2, c)
            h = 0.5 * dt
            for i in range(15):
                nxt[i] = p[i] + h * (k1[i] + k2[i])
        for i in range(15):
            v = nxt[i]
            a = abs(v)
            if not a <= 1e300:
                return k + 1, maxabs
            if a > maxabs:
                maxabs = a
            p[i] = v
    return -1, maxabs
