"""Compiled trajectory integrator.

This is the hot path: it advances trajectories through the
ramp/settle/sample protocol with the stochastic Heun scheme, generating
Langevin noise inline from the same Philox-4x32-10 + inverse-CDF scheme as
`rng.TrajectoryStream` (key = master seed, counter = trajectory / step /
block / purpose).

Trajectories are integrated in lane groups of LANES at a time with the
complex amplitudes split into separate real/imaginary planes of shape
(modes, lanes), so every inner loop is a contiguous, branch-free float
sweep over the lane axis that the compiler can vectorize.  Lanes never
interact arithmetically: results are bitwise identical to a one-lane run,
and every trajectory writes moment sums into its own output slot, so
results are also bitwise independent of the worker count.

The Python-level `dynamics.step` is the readable reference implementation;
tests pin this kernel against it.
"""

from __future__ import annotations

import math

import numpy as np

from .workers import ensure_thread_cap

ensure_thread_cap()

from numba import njit, prange  # noqa: E402

from .rng import (  # noqa: E402
    ICDF_A, ICDF_B, ICDF_C, ICDF_D, ICDF_P_LOW, split_seed,
)

LANES = 32

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_INV32 = 2.0 ** -32

_A0, _A1, _A2, _A3, _A4, _A5 = ICDF_A
_B0, _B1, _B2, _B3, _B4 = ICDF_B
_C0, _C1, _C2, _C3, _C4, _C5 = ICDF_C
_D0, _D1, _D2, _D3 = ICDF_D
_PLOW = ICDF_P_LOW
_PHIGH = 1.0 - ICDF_P_LOW


@njit(cache=True)
def _fill_normals_lanes(z, n_need, tr0, step, purpose, key0, key1):
    """Fill rows 0..n_need-1 of z (rows, lanes) with standard normals.

    Row i, lane l holds the i-th normal of trajectory tr0+l, in exactly
    the order TrajectoryStream produces them.
    """
    lanes = z.shape[1]
    n_blocks = (n_need + 3) // 4
    for blk in range(n_blocks):
        base = 4 * blk
        for l in range(lanes):
            c0 = np.uint64(tr0 + l)
            c1 = np.uint64(step)
            c2 = np.uint64(blk)
            c3 = np.uint64(purpose)
            k0 = key0
            k1 = key1
            for _ in range(10):
                p0 = _M0 * c0
                p1 = _M1 * c2
                hi0 = p0 >> _SHIFT32
                lo0 = p0 & _MASK32
                hi1 = p1 >> _SHIFT32
                lo1 = p1 & _MASK32
                c0 = hi1 ^ c1 ^ k0
                c1 = lo1
                c2 = hi0 ^ c3 ^ k1
                c3 = lo0
                k0 = (k0 + _W0) & _MASK32
                k1 = (k1 + _W1) & _MASK32
            if base < n_need:
                z[base, l] = (c0 * 1.0 + 0.5) * _INV32
            if base + 1 < n_need:
                z[base + 1, l] = (c1 * 1.0 + 0.5) * _INV32
            if base + 2 < n_need:
                z[base + 2, l] = (c2 * 1.0 + 0.5) * _INV32
            if base + 3 < n_need:
                z[base + 3, l] = (c3 * 1.0 + 0.5) * _INV32
    # central inverse-CDF branch, vectorizable over lanes
    for i in range(n_need):
        for l in range(lanes):
            q = z[i, l] - 0.5
            r = q * q
            num = ((((_A0 * r + _A1) * r + _A2) * r + _A3) * r + _A4) * r + _A5
            den = ((((_B0 * r + _B1) * r + _B2) * r + _B3) * r + _B4) * r + 1.0
            zc = q * num / den
            u = z[i, l]
            z[i, l] = zc
            # rare tail fix (|u - 1/2| beyond the rational branch)
            if u < _PLOW:
                t = math.sqrt(-2.0 * math.log(u))
                v = ((((_C0 * t + _C1) * t + _C2) * t + _C3) * t + _C4) * t + _C5
                z[i, l] = v / ((((_D0 * t + _D1) * t + _D2) * t + _D3) * t + 1.0)
            elif u > _PHIGH:
                t = math.sqrt(-2.0 * math.log(1.0 - u))
                v = ((((_C0 * t + _C1) * t + _C2) * t + _C3) * t + _C4) * t + _C5
                z[i, l] = -v / ((((_D0 * t + _D1) * t + _D2) * t + _D3) * t + 1.0)


@njit(cache=True)
def _conv_lanes(xr, xi, yr, yi, fullr, fulli):
    """Full linear convolution of two Hermitian-symmetric lane blocks.

    Both inputs satisfy X_{-k} = conj(X_k), so the output satisfies
    full(-mu) = conj(full(mu)); only the right half is summed, the left
    half is mirrored.
    """
    n = xr.shape[0]
    lanes = xr.shape[1]
    c = n - 1  # center bin, total momentum zero
    for m in range(c, 2 * n - 1):
        for l in range(lanes):
            fullr[m, l] = 0.0
            fulli[m, l] = 0.0
        lo = m - n + 1
        if lo < 0:
            lo = 0
        hi = m + 1
        if hi > n:
            hi = n
        for j in range(lo, hi):
            mj = m - j
            for l in range(lanes):
                fullr[m, l] += xr[j, l] * yr[mj, l] - xi[j, l] * yi[mj, l]
                fulli[m, l] += xr[j, l] * yi[mj, l] + xi[j, l] * yr[mj, l]
    for m in range(0, c):
        mm = 2 * c - m
        for l in range(lanes):
            fullr[m, l] = fullr[mm, l]
            fulli[m, l] = -fulli[mm, l]


@njit(cache=True)
def _fold_lanes(fullr, fulli, outr, outi, wrap):
    n = outr.shape[0]
    lanes = outr.shape[1]
    m = (n - 1) // 2
    if wrap == 1:
        for j in range(n):
            for l in range(lanes):
                outr[j, l] = 0.0
                outi[j, l] = 0.0
        for i in range(2 * n - 1):
            jj = (i - m) % n
            for l in range(lanes):
                outr[jj, l] += fullr[i, l]
                outi[jj, l] += fulli[i, l]
    else:
        for j in range(n):
            for l in range(lanes):
                outr[j, l] = fullr[j + m, l]
                outi[j, l] = fulli[j + m, l]


@njit(cache=True)
def _drift_lanes(ar, ai, br, bi, omega_c, omega_r, kappa, gamma, gr, g4r, wrap,
                 har, hai, hbr, hbi, fullr, fulli, caar, caai, cbar, cbai,
                 qr, qi, far, fai, fbr, fbi):
    n = ar.shape[0]
    lanes = ar.shape[1]
    for j in range(n):
        jm = n - 1 - j
        for l in range(lanes):
            har[j, l] = ar[j, l] + ar[jm, l]
            hai[j, l] = ai[j, l] - ai[jm, l]
            hbr[j, l] = br[j, l] + br[jm, l]
            hbi[j, l] = bi[j, l] - bi[jm, l]
    if gr != 0.0 or g4r != 0.0:
        _conv_lanes(har, hai, har, hai, fullr, fulli)
        _fold_lanes(fullr, fulli, caar, caai, wrap)
        _conv_lanes(hbr, hbi, har, hai, fullr, fulli)
        _fold_lanes(fullr, fulli, cbar, cbai, wrap)
        _conv_lanes(har, hai, caar, caai, fullr, fulli)
        _fold_lanes(fullr, fulli, qr, qi, wrap)
        for j in range(n):
            wc = omega_c[j]
            wr = omega_r[j]
            for l in range(lanes):
                hr = wc * ar[j, l] + 2.0 * gr * cbar[j, l] + g4r * qr[j, l]
                hi = wc * ai[j, l] + 2.0 * gr * cbai[j, l] + g4r * qi[j, l]
                far[j, l] = hi - kappa * ar[j, l]
                fai[j, l] = -hr - kappa * ai[j, l]
                hr2 = wr * br[j, l] + gr * caar[j, l]
                hi2 = wr * bi[j, l] + gr * caai[j, l]
                fbr[j, l] = hi2
                fbi[j, l] = -hr2 - gamma * bi[j, l]
    else:
        for j in range(n):
            wc = omega_c[j]
            wr = omega_r[j]
            for l in range(lanes):
                far[j, l] = wc * ai[j, l] - kappa * ar[j, l]
                fai[j, l] = -wc * ar[j, l] - kappa * ai[j, l]
                fbr[j, l] = wr * bi[j, l]
                fbi[j, l] = -wr * br[j, l] - gamma * bi[j, l]


@njit(cache=True)
def _integrate_group(tr0, key0, key1, wrap, omega_c, omega_r, g_q, g4_q,
                     kappa, gamma, amp_a, amp_b, init_a, init_b, dt, r_mid,
                     sample_start, stride, n_samples, block_of_sample,
                     sum_e, sum_abs_e2, sum_q, sum_abs_q2, quad0, count,
                     abort_flag, abort_time, abort_field, abort_mode):
    """Integrate LANES trajectories tr0..tr0+LANES-1 in lock-step."""
    n = omega_c.shape[0]
    m = (n - 1) // 2
    lanes = abort_flag.shape[0]
    n_steps = r_mid.shape[0]

    z = np.empty((4 * n, lanes))
    _fill_normals_lanes(z, 4 * n, tr0, 0, 1, key0, key1)
    ar = np.empty((n, lanes))
    ai = np.empty((n, lanes))
    br = np.empty((n, lanes))
    bi = np.empty((n, lanes))
    for j in range(n):
        for l in range(lanes):
            ar[j, l] = init_a[j] * z[j, l]
            ai[j, l] = init_a[j] * z[n + j, l]
            br[j, l] = init_b[j] * z[2 * n + j, l]
            bi[j, l] = init_b[j] * z[3 * n + j, l]

    har = np.empty((n, lanes))
    hai = np.empty((n, lanes))
    hbr = np.empty((n, lanes))
    hbi = np.empty((n, lanes))
    caar = np.empty((n, lanes))
    caai = np.empty((n, lanes))
    cbar = np.empty((n, lanes))
    cbai = np.empty((n, lanes))
    qr = np.empty((n, lanes))
    qi = np.empty((n, lanes))
    fullr = np.empty((2 * n - 1, lanes))
    fulli = np.empty((2 * n - 1, lanes))
    f1ar = np.empty((n, lanes))
    f1ai = np.empty((n, lanes))
    f1br = np.empty((n, lanes))
    f1bi = np.empty((n, lanes))
    f2ar = np.empty((n, lanes))
    f2ai = np.empty((n, lanes))
    f2br = np.empty((n, lanes))
    f2bi = np.empty((n, lanes))
    apr = np.empty((n, lanes))
    api = np.empty((n, lanes))
    bpr = np.empty((n, lanes))
    bpi = np.empty((n, lanes))
    okprobe = np.empty(lanes)

    sample_idx = 0
    for s in range(n_steps):
        if sample_idx < n_samples and s >= sample_start and (s - sample_start) % stride == 0:
            tb = block_of_sample[sample_idx]
            for l in range(lanes):
                for j in range(n):
                    jm = n - 1 - j
                    er = ar[j, l] + ar[jm, l]
                    ei = ai[j, l] - ai[jm, l]
                    qre = br[j, l] + br[jm, l]
                    qim = bi[j, l] - bi[jm, l]
                    sum_e[l, tb, j] += er + 1j * ei
                    sum_abs_e2[l, tb, j] += er * er + ei * ei
                    sum_q[l, tb, j] += qre + 1j * qim
                    sum_abs_q2[l, tb, j] += qre * qre + qim * qim
                x = ar[m, l]
                y = ai[m, l]
                quad0[l, tb, 0] += x
                quad0[l, tb, 1] += y
                quad0[l, tb, 2] += x * x
                quad0[l, tb, 3] += y * y
                quad0[l, tb, 4] += x * y
                count[l, tb] += 1
            sample_idx += 1

        r = r_mid[s]
        gr = r * g_q
        g4r = r * g4_q
        _fill_normals_lanes(z, 3 * n, tr0, s, 0, key0, key1)

        _drift_lanes(ar, ai, br, bi, omega_c, omega_r, kappa, gamma, gr, g4r, wrap,
                     har, hai, hbr, hbi, fullr, fulli, caar, caai, cbar, cbai,
                     qr, qi, f1ar, f1ai, f1br, f1bi)
        for j in range(n):
            aa = amp_a[j]
            ab = amp_b[j]
            for l in range(lanes):
                apr[j, l] = ar[j, l] + dt * f1ar[j, l] + aa * z[j, l]
                api[j, l] = ai[j, l] + dt * f1ai[j, l] + aa * z[n + j, l]
                bpr[j, l] = br[j, l] + dt * f1br[j, l]
                bpi[j, l] = bi[j, l] + dt * f1bi[j, l] + ab * z[2 * n + j, l]
        _drift_lanes(apr, api, bpr, bpi, omega_c, omega_r, kappa, gamma, gr, g4r, wrap,
                     har, hai, hbr, hbi, fullr, fulli, caar, caai, cbar, cbai,
                     qr, qi, f2ar, f2ai, f2br, f2bi)
        for j in range(n):
            aa = amp_a[j]
            ab = amp_b[j]
            for l in range(lanes):
                ar[j, l] += 0.5 * dt * (f1ar[j, l] + f2ar[j, l]) + aa * z[j, l]
                ai[j, l] += 0.5 * dt * (f1ai[j, l] + f2ai[j, l]) + aa * z[n + j, l]
                br[j, l] += 0.5 * dt * (f1br[j, l] + f2br[j, l])
                bi[j, l] += 0.5 * dt * (f1bi[j, l] + f2bi[j, l]) + ab * z[2 * n + j, l]

        # branch-free finiteness probe; NaN poisons the lane's probe value
        for l in range(lanes):
            okprobe[l] = 0.0
        for j in range(n):
            for l in range(lanes):
                okprobe[l] += ar[j, l] * 0.0 + ai[j, l] * 0.0 + br[j, l] * 0.0 + bi[j, l] * 0.0
        for l in range(lanes):
            if not (okprobe[l] == 0.0) and abort_flag[l] == 0:
                abort_flag[l] = 1
                abort_time[l] = (s + 1) * dt
                found = False
                for j in range(n):
                    if not (math.isfinite(ar[j, l]) and math.isfinite(ai[j, l])):
                        abort_field[l] = 0
                        abort_mode[l] = j - m
                        found = True
                        break
                if not found:
                    for j in range(n):
                        if not (math.isfinite(br[j, l]) and math.isfinite(bi[j, l])):
                            abort_field[l] = 1
                            abort_mode[l] = j - m
                            break


@njit(parallel=True, cache=True)
def _run_batch(n_groups, lanes, key0, key1, wrap, omega_c, omega_r, g_q, g4_q,
               kappa, gamma, amp_a, amp_b, init_a, init_b, dt, r_mid,
               sample_start, stride, n_samples, block_of_sample,
               sum_e, sum_abs_e2, sum_q, sum_abs_q2, quad0, count,
               abort_flag, abort_time, abort_field, abort_mode):
    for g in prange(n_groups):
        t0 = g * lanes
        t1 = t0 + lanes
        _integrate_group(t0, key0, key1, wrap, omega_c, omega_r, g_q, g4_q,
                         kappa, gamma, amp_a, amp_b, init_a, init_b, dt, r_mid,
                         sample_start, stride, n_samples, block_of_sample,
                         sum_e[t0:t1], sum_abs_e2[t0:t1], sum_q[t0:t1],
                         sum_abs_q2[t0:t1], quad0[t0:t1], count[t0:t1],
                         abort_flag[t0:t1], abort_time[t0:t1],
                         abort_field[t0:t1], abort_mode[t0:t1])


def integrate_ensemble(n_traj, master_seed, wrap, omega_c, omega_r,
                       g_over_sqrt_n, g4_over_n, kappa, gamma,
                       amp_a, amp_b, init_a, init_b, dt, r_mid,
                       sample_start, stride_steps, n_samples, block_of_sample,
                       n_time_blocks):
    """Allocate outputs and run the compiled batch integrator.

    Trajectory indices are 0..n_traj-1.  Returns a dict of per-trajectory
    moment-sum arrays; rows of aborted trajectories are zeroed so they
    never enter pooled statistics.
    """
    n_traj = int(n_traj)
    n = omega_c.shape[0]
    nb = int(n_time_blocks)
    n_groups = (n_traj + LANES - 1) // LANES
    n_pad = n_groups * LANES

    sum_e = np.zeros((n_pad, nb, n), np.complex128)
    sum_abs_e2 = np.zeros((n_pad, nb, n))
    sum_q = np.zeros((n_pad, nb, n), np.complex128)
    sum_abs_q2 = np.zeros((n_pad, nb, n))
    quad0 = np.zeros((n_pad, nb, 5))
    count = np.zeros((n_pad, nb), np.int64)
    abort_flag = np.zeros(n_pad, np.uint8)
    abort_time = np.zeros(n_pad)
    abort_field = np.full(n_pad, -1, np.int8)
    abort_mode = np.zeros(n_pad, np.int32)

    key0, key1 = split_seed(master_seed)
    _run_batch(n_groups, LANES, np.uint64(key0), np.uint64(key1), np.int64(wrap),
               np.ascontiguousarray(omega_c, dtype=np.float64),
               np.ascontiguousarray(omega_r, dtype=np.float64),
               float(g_over_sqrt_n), float(g4_over_n), float(kappa), float(gamma),
               np.ascontiguousarray(amp_a, dtype=np.float64),
               np.ascontiguousarray(amp_b, dtype=np.float64),
               np.ascontiguousarray(init_a, dtype=np.float64),
               np.ascontiguousarray(init_b, dtype=np.float64),
               float(dt), np.ascontiguousarray(r_mid, dtype=np.float64),
               np.int64(sample_start), np.int64(stride_steps), np.int64(n_samples),
               np.ascontiguousarray(block_of_sample, dtype=np.int64),
               sum_e, sum_abs_e2, sum_q, sum_abs_q2, quad0, count,
               abort_flag, abort_time, abort_field, abort_mode)

    out = {
        "sum_E": sum_e[:n_traj],
        "sum_absE2": sum_abs_e2[:n_traj],
        "sum_Q": sum_q[:n_traj],
        "sum_absQ2": sum_abs_q2[:n_traj],
        "quad0": quad0[:n_traj],
        "count": count[:n_traj],
        "aborted": abort_flag[:n_traj],
        "abort_time": abort_time[:n_traj],
        "abort_field": abort_field[:n_traj],
        "abort_mode": abort_mode[:n_traj],
    }
    bad = out["aborted"] != 0
    if bad.any():
        for name in ("sum_E", "sum_absE2", "sum_Q", "sum_absQ2", "quad0"):
            out[name][bad] = 0
        out["count"][bad] = 0
    return out
