"""Counter-based random streams for reproducible parallel trajectories.

Every normal variate consumed by the simulator is a pure function of
(master_seed, trajectory index, step index, block index, purpose): the
Philox-4x32-10 keyed permutation turns the counter into four 32-bit words,
and each word maps to one standard normal through a rational
inverse-normal-CDF approximation (Acklam's, |relative error| < 1.2e-9,
negligible against Monte Carlo noise).  Streams for different trajectories
are therefore mutually independent, and results cannot depend on how
trajectories are batched across workers.

The transform is odd around u = 1/2 by construction, so the normals have
exactly zero mean over the full counter space.  The numpy path here and
the compiled kernel evaluate the identical operation sequence (tail
branches go through libm on both sides), so Python-level and kernel-level
noise agree bitwise.

Counter layout (one 128-bit counter per 4-word block):
    (trajectory index, step index, block index, purpose)
with purpose 0 for in-step Langevin noise and 1 for initial-state sampling.
Whole 4-normal blocks are always consumed; a request never shifts the
counters of later draws.
"""

from __future__ import annotations

import math

import numpy as np

# Philox-4x32 round multipliers and Weyl key increments (Random123).
PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = np.uint64(0x9E3779B9)
PHILOX_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_ROUNDS = 10

PURPOSE_NOISE = 0
PURPOSE_INIT = 1

_INV_2_32 = 2.0 ** -32

# Acklam's rational approximation to the inverse normal CDF.
ICDF_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
ICDF_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
ICDF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
ICDF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
ICDF_P_LOW = 0.02425


def split_seed(master_seed: int) -> tuple[int, int]:
    """Split a 64-bit master seed into the (lo, hi) 32-bit Philox key."""
    seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
    return seed & 0xFFFFFFFF, seed >> 32


def philox4x32(c0, c1, c2, c3, key0: int, key1: int):
    """Philox-4x32-10 block function, vectorized over counter arrays.

    Inputs are broadcast uint64 arrays holding 32-bit values; returns four
    uint64 arrays of 32-bit words.
    """
    c0 = np.asarray(c0, dtype=np.uint64).copy()
    c1 = np.asarray(c1, dtype=np.uint64).copy()
    c2 = np.asarray(c2, dtype=np.uint64).copy()
    c3 = np.asarray(c3, dtype=np.uint64).copy()
    k0 = np.uint64(key0)
    k1 = np.uint64(key1)
    thirtytwo = np.uint64(32)
    for _ in range(_ROUNDS):
        prod0 = PHILOX_M0 * c0
        prod1 = PHILOX_M1 * c2
        hi0 = prod0 >> thirtytwo
        lo0 = prod0 & _MASK32
        hi1 = prod1 >> thirtytwo
        lo1 = prod1 & _MASK32
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = (k0 + PHILOX_W0) & _MASK32
        k1 = (k1 + PHILOX_W1) & _MASK32
    return c0, c1, c2, c3


def inverse_normal_cdf(u):
    """Standard-normal quantile of u in (0,1), Acklam's approximation.

    The central branch is a pure rational polynomial; the two tail
    branches (|u - 1/2| > 0.47575, about 5% of draws) evaluate
    sqrt(-2 log ...) through scalar libm so the result is bitwise
    reproducible against the compiled kernel.
    """
    u = np.asarray(u, dtype=np.float64)
    q = u - 0.5
    r = q * q
    a = ICDF_A
    b = ICDF_B
    num = ((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]
    den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
    z = q * num / den

    flat_u = np.atleast_1d(u).ravel()
    flat_z = np.atleast_1d(z).ravel()
    lo = np.nonzero(flat_u < ICDF_P_LOW)[0]
    hi = np.nonzero(flat_u > 1.0 - ICDF_P_LOW)[0]
    c = ICDF_C
    d = ICDF_D
    for i in lo:
        t = math.sqrt(-2.0 * math.log(flat_u[i]))
        flat_z[i] = ((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]
        flat_z[i] /= (((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0
    for i in hi:
        t = math.sqrt(-2.0 * math.log(1.0 - flat_u[i]))
        v = ((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]
        v /= (((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0
        flat_z[i] = -v
    return flat_z.reshape(np.shape(u)) if np.shape(u) else float(flat_z[0])


def _block_counters(traj: int, step: int, n_blocks: int, purpose: int):
    blocks = np.arange(n_blocks, dtype=np.uint64)
    c0 = np.full(n_blocks, traj, dtype=np.uint64)
    c1 = np.full(n_blocks, step, dtype=np.uint64)
    c3 = np.full(n_blocks, purpose, dtype=np.uint64)
    return c0, c1, blocks, c3


def normals_from_words(words0, words1, words2, words3) -> np.ndarray:
    """Map 4-word Philox blocks to 4 normals each (word order preserved)."""
    u = np.empty((np.size(words0), 4))
    u[:, 0] = (np.asarray(words0, dtype=np.float64) + 0.5) * _INV_2_32
    u[:, 1] = (np.asarray(words1, dtype=np.float64) + 0.5) * _INV_2_32
    u[:, 2] = (np.asarray(words2, dtype=np.float64) + 0.5) * _INV_2_32
    u[:, 3] = (np.asarray(words3, dtype=np.float64) + 0.5) * _INV_2_32
    return inverse_normal_cdf(u).ravel()


class TrajectoryStream:
    """Keyed normal-variate stream for one trajectory.

    `initial_normals` draws from the initial-condition counter space;
    `step_normals` draws one integration step's noise and advances the
    internal step counter.
    """

    def __init__(self, master_seed: int, traj_index: int):
        self.key0, self.key1 = split_seed(master_seed)
        self.traj_index = int(traj_index)
        self.step_index = 0

    def _draw(self, step: int, n: int, purpose: int) -> np.ndarray:
        n_blocks = (n + 3) // 4
        ctr = _block_counters(self.traj_index, step, n_blocks, purpose)
        words = philox4x32(*ctr, self.key0, self.key1)
        return normals_from_words(*words)[:n]

    def initial_normals(self, n: int) -> np.ndarray:
        return self._draw(0, n, PURPOSE_INIT)

    def step_normals(self, n: int) -> np.ndarray:
        out = self._draw(self.step_index, n, PURPOSE_NOISE)
        self.step_index += 1
        return out


def draw_normals(rng, n: int, purpose: int = PURPOSE_NOISE) -> np.ndarray:
    """Draw n standard normals from either stream flavor.

    Accepts a TrajectoryStream (counter-based, reproducible) or any object
    with numpy's `standard_normal`, e.g. np.random.Generator.
    """
    if isinstance(rng, TrajectoryStream):
        if purpose == PURPOSE_INIT:
            return rng.initial_normals(n)
        return rng.step_normals(n)
    return rng.standard_normal(n)
