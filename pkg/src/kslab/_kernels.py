"""Hot inner loops, each in a numba version and a vectorized numpy version.

``advance`` and ``pair_sum`` dispatch on ``_accel.USE_NUMBA``; the explicit
``*_numba`` / ``*_numpy`` names stay importable for tests and benchmarks.
"""

import math

import numpy as np

from . import _accel
from ._accel import njit

# status codes returned by advance
REACHED_T_STOP = 0
CAP_EXCEEDED = 1
DT_COLLAPSE = 2
NON_FINITE = 3
MAX_STEPS = 4

_RESYNC_EVERY = 1024


@njit
def _maxabs4(a):
    # four independent accumulators; a single running max is latency bound
    n = a.size
    m0 = 0.0
    m1 = 0.0
    m2 = 0.0
    m3 = 0.0
    i = 0
    while i + 3 < n:
        x = abs(a[i])
        m0 = x if x > m0 else m0
        x = abs(a[i + 1])
        m1 = x if x > m1 else m1
        x = abs(a[i + 2])
        m2 = x if x > m2 else m2
        x = abs(a[i + 3])
        m3 = x if x > m3 else m3
        i += 4
    while i < n:
        x = abs(a[i])
        m0 = x if x > m0 else m0
        i += 1
    return max(max(m0, m1), max(m2, m3))


@njit
def _minmax4(a):
    n = a.size
    hi0 = a[0]
    hi1 = a[0]
    hi2 = a[0]
    hi3 = a[0]
    lo0 = a[0]
    lo1 = a[0]
    lo2 = a[0]
    lo3 = a[0]
    i = 0
    while i + 3 < n:
        x = a[i]
        hi0 = x if x > hi0 else hi0
        lo0 = x if x < lo0 else lo0
        x = a[i + 1]
        hi1 = x if x > hi1 else hi1
        lo1 = x if x < lo1 else lo1
        x = a[i + 2]
        hi2 = x if x > hi2 else hi2
        lo2 = x if x < lo2 else lo2
        x = a[i + 3]
        hi3 = x if x > hi3 else hi3
        lo3 = x if x < lo3 else lo3
        i += 4
    while i < n:
        x = a[i]
        hi0 = x if x > hi0 else hi0
        lo0 = x if x < lo0 else lo0
        i += 1
    return min(min(lo0, lo1), min(lo2, lo3)), max(max(hi0, hi1), max(hi2, hi3))


@njit
def _advance_numba(rho, M, vol, vol_inv, area, area_dr, ginv, nu, Z, t, t_stop,
                   cfl, dt_diff, hmin, pos_diff, pos_adv, rho_cap, dt_min, max_steps):
    n = rho.size
    v = np.zeros(n + 1)
    F = np.zeros(n + 1)
    steps = 0
    clipped = 0.0
    last_dt = 0.0
    status = REACHED_T_STOP
    rho_max = _minmax4(rho)[1]
    if t >= t_stop:
        return t, steps, status, rho_max, last_dt, clipped
    while True:
        for i in range(1, n):
            v[i] = (Z - M[i]) * ginv[i]
        vmax = _maxabs4(v)
        dt = dt_diff
        if vmax > 0.0:
            dt = min(dt, hmin / vmax)
        dt = cfl * min(dt, 1.0 / (pos_diff + pos_adv * vmax))
        if dt < dt_min:
            status = DT_COLLAPSE
            break
        last_step = False
        if t + dt >= t_stop:
            dt = t_stop - t
            last_step = True
        for i in range(1, n):
            vi = v[i]
            F[i] = area_dr[i] * (rho[i - 1] - rho[i]) + area[i] * (
                max(vi, 0.0) * rho[i - 1] + min(vi, 0.0) * rho[i])
        for i in range(n):
            rho[i] = rho[i] - dt * (F[i + 1] - F[i]) * vol_inv[i]
        for i in range(1, n):
            M[i] -= dt * F[i]
        rho_min, rho_max = _minmax4(rho)
        if rho_min < 0.0:
            for i in range(n):
                if rho[i] < 0.0:
                    clipped -= rho[i] * vol[i]
                    rho[i] = 0.0
        steps += 1
        last_dt = dt
        t = t_stop if last_step else t + dt
        if steps % _RESYNC_EVERY == 0:
            acc = 0.0
            for i in range(n):
                acc += rho[i] * vol[i]
                M[i + 1] = acc
            if not math.isfinite(acc):
                status = NON_FINITE
                break
        if not math.isfinite(rho_max):
            status = NON_FINITE
            break
        if rho_max >= rho_cap:
            status = CAP_EXCEEDED
            break
        if last_step:
            status = REACHED_T_STOP
            break
        if steps >= max_steps:
            status = MAX_STEPS
            break
    if status == NON_FINITE or not np.all(np.isfinite(rho)):
        status = NON_FINITE
    acc = 0.0
    for i in range(n):
        acc += rho[i] * vol[i]
        M[i + 1] = acc
    return t, steps, status, rho_max, last_dt, clipped


def _advance_numpy(rho, M, vol, vol_inv, area, area_dr, ginv, nu, Z, t, t_stop,
                   cfl, dt_diff, hmin, pos_diff, pos_adv, rho_cap, dt_min, max_steps):
    n = rho.size
    F = np.zeros(n + 1)
    steps = 0
    clipped = 0.0
    last_dt = 0.0
    rho_max = 0.0
    status = REACHED_T_STOP
    if t >= t_stop:
        return t, steps, status, float(rho.max()), last_dt, clipped
    a_dr = area_dr[1:n]
    a_in = area[1:n]
    g_in = ginv[1:n]
    while True:
        v = (Z - M[1:n]) * g_in
        vmax = float(np.abs(v).max()) if n > 1 else 0.0
        dt = dt_diff
        if vmax > 0.0:
            dt = min(dt, hmin / vmax)
        dt = cfl * min(dt, 1.0 / (pos_diff + pos_adv * vmax))
        if dt < dt_min:
            status = DT_COLLAPSE
            break
        last_step = False
        if t + dt >= t_stop:
            dt = t_stop - t
            last_step = True
        F[1:n] = a_dr * (rho[:-1] - rho[1:]) + a_in * (
            np.maximum(v, 0.0) * rho[:-1] + np.minimum(v, 0.0) * rho[1:])
        rho -= dt * (F[1:] - F[:-1]) * vol_inv
        neg = rho < 0.0
        if neg.any():
            clipped -= float(np.dot(rho[neg], vol[neg]))
            rho[neg] = 0.0
        M[1:n] -= dt * F[1:n]
        rho_max = float(rho.max())
        steps += 1
        last_dt = dt
        t = t_stop if last_step else t + dt
        if steps % _RESYNC_EVERY == 0:
            M[1:] = np.cumsum(rho * vol)
            if not math.isfinite(M[-1]):
                status = NON_FINITE
                break
        if not math.isfinite(rho_max):
            status = NON_FINITE
            break
        if rho_max >= rho_cap:
            status = CAP_EXCEEDED
            break
        if last_step:
            status = REACHED_T_STOP
            break
        if steps >= max_steps:
            status = MAX_STEPS
            break
    if status == NON_FINITE or not np.all(np.isfinite(rho)):
        status = NON_FINITE
    M[1:] = np.cumsum(rho * vol)
    return t, steps, status, rho_max, last_dt, clipped


@njit
def _pow_half(d, nu):
    # d^{nu/2} for integer nu without a general pow call
    res = 1.0
    for _ in range(nu // 2):
        res *= d
    if nu % 2 == 1:
        res *= math.sqrt(d)
    return res


@njit
def _pair_sum_numba(r, m, w, wt, nu):
    n = r.size
    k = w.size
    total = 0.0
    for i in range(n):
        mi = m[i]
        if mi == 0.0:
            continue
        row = 0.0
        for j in range(i, n):
            mj = m[j]
            if mj == 0.0:
                continue
            tau = r[i] / r[j]
            sq = math.sqrt(tau)
            p = sq - 1.0 / sq
            q = tau ** ((nu - 1) / 2.0) - tau ** (-(nu - 1) / 2.0)
            b = tau ** (nu / 2.0 - 1.0) + tau ** (1.0 - nu / 2.0)
            pq = p * q
            pp = p * p
            acc = 0.0
            for l in range(k):
                wl = w[l]
                acc += wt[l] * (pq + b * wl) / _pow_half(pp + 2.0 * wl, nu)
            if j == i:
                row += mj * acc
            else:
                row += 2.0 * mj * acc
        total += mi * row
    return total


def _pair_sum_numpy(r, m, w, wt, nu):
    n = r.size
    total = 0.0
    half = nu / 2.0
    for i in range(n):
        mi = m[i]
        if mi == 0.0:
            continue
        rj = r[i:]
        mj = m[i:]
        tau = r[i] / rj
        sq = np.sqrt(tau)
        p = sq - 1.0 / sq
        q = tau ** ((nu - 1) / 2.0) - tau ** (-(nu - 1) / 2.0)
        b = tau ** (half - 1.0) + tau ** (1.0 - half)
        num = (p * q)[:, None] + b[:, None] * w[None, :]
        den = ((p * p)[:, None] + 2.0 * w[None, :]) ** half
        acc = (num / den) @ wt
        coeff = 2.0 * mj
        coeff[0] = mj[0]
        total += mi * float(np.dot(coeff, acc))
    return total


def advance(*args):
    if _accel.USE_NUMBA:
        return _advance_numba(*args)
    return _advance_numpy(*args)


def pair_sum(r, m, w, wt, nu):
    if _accel.USE_NUMBA:
        return _pair_sum_numba(r, m, w, wt, nu)
    return _pair_sum_numpy(r, m, w, wt, nu)


advance_numba = _advance_numba
advance_numpy = _advance_numpy
pair_sum_numba = _pair_sum_numba
pair_sum_numpy = _pair_sum_numpy
