import numpy as np
import pytest
from scipy import stats as sps

from ramantwa.rng import (
    PURPOSE_INIT,
    PURPOSE_NOISE,
    TrajectoryStream,
    draw_normals,
    inverse_normal_cdf,
    normals_from_words,
    philox4x32,
    split_seed,
)


class TestPhilox:
    def test_deterministic(self):
        c = np.arange(1000, dtype=np.uint64)
        z = np.zeros_like(c)
        a = philox4x32(c, z, z, z, 11, 22)
        b = philox4x32(c, z, z, z, 11, 22)
        for wa, wb in zip(a, b):
            assert np.array_equal(wa, wb)

    def test_counter_sensitivity(self):
        z = np.zeros(1, dtype=np.uint64)
        base = philox4x32(z, z, z, z, 0, 0)
        bumped = philox4x32(z + 1, z, z, z, 0, 0)
        assert not any(np.array_equal(a, b) for a, b in zip(base, bumped))

    def test_key_sensitivity(self):
        z = np.zeros(1, dtype=np.uint64)
        a = philox4x32(z, z, z, z, 1, 0)
        b = philox4x32(z, z, z, z, 2, 0)
        assert not any(np.array_equal(x, y) for x, y in zip(a, b))

    def test_output_bits_balanced(self):
        c = np.arange(50_000, dtype=np.uint64)
        z = np.zeros_like(c)
        words = philox4x32(c, z, z, z, 123, 456)
        for w in words:
            bits = np.unpackbits(w.astype(np.uint32).view(np.uint8))
            assert abs(bits.mean() - 0.5) < 0.005


class TestInverseCdf:
    def test_matches_scipy_ppf(self):
        u = np.linspace(1e-9, 1 - 1e-9, 100_001)
        z = inverse_normal_cdf(u)
        ref = sps.norm.ppf(u)
        rel = np.abs(z - ref) / np.maximum(np.abs(ref), 1e-8)
        assert rel.max() < 2e-9

    def test_odd_symmetry_exact(self):
        w = np.random.default_rng(5).integers(0, 2**32, 20_000, dtype=np.uint64)
        u = (w.astype(np.float64) + 0.5) * 2.0**-32
        u_mirror = ((2**32 - 1 - w).astype(np.float64) + 0.5) * 2.0**-32
        assert np.array_equal(inverse_normal_cdf(u), -inverse_normal_cdf(u_mirror))

    def test_median_zero(self):
        assert inverse_normal_cdf(0.5) == 0.0


class TestNormalsQuality:
    def test_moments(self):
        c = np.arange(100_000, dtype=np.uint64)
        z = np.zeros_like(c)
        normals = normals_from_words(*philox4x32(c, z, z + 7, z, 99, 7))
        n = normals.size
        assert abs(normals.mean()) < 3.0 / np.sqrt(n)
        assert abs(normals.var() - 1.0) < 3.0 * np.sqrt(2.0 / n)
        kurt = (normals**4).mean() / normals.var() ** 2
        assert abs(kurt - 3.0) < 0.1

    def test_distribution_ks(self):
        c = np.arange(50_000, dtype=np.uint64)
        z = np.zeros_like(c)
        normals = normals_from_words(*philox4x32(c, z + 3, z, z, 2024, 911))
        _, pvalue = sps.kstest(normals, "norm")
        assert pvalue > 1e-4

    def test_streams_uncorrelated(self):
        n = 40_000
        a = TrajectoryStream(42, 0).initial_normals(n)
        b = TrajectoryStream(42, 1).initial_normals(n)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4.0 / np.sqrt(n)

    def test_step_vs_init_independent(self):
        stream = TrajectoryStream(42, 0)
        a = stream.initial_normals(10_000)
        b = stream.step_normals(10_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


class TestStreams:
    def test_reproducible(self):
        s1 = TrajectoryStream(123456789, 17)
        s2 = TrajectoryStream(123456789, 17)
        assert np.array_equal(s1.initial_normals(44), s2.initial_normals(44))
        assert np.array_equal(s1.step_normals(33), s2.step_normals(33))
        assert np.array_equal(s1.step_normals(33), s2.step_normals(33))

    def test_step_counter_advances(self):
        s = TrajectoryStream(1, 0)
        first = s.step_normals(8)
        second = s.step_normals(8)
        assert not np.array_equal(first, second)

    def test_request_size_does_not_shift_counters(self):
        # step noise depends only on the step index, not earlier sizes
        s1 = TrajectoryStream(7, 3)
        s1.step_normals(5)
        later1 = s1.step_normals(12)
        s2 = TrajectoryStream(7, 3)
        s2.step_normals(33)
        later2 = s2.step_normals(12)
        assert np.array_equal(later1, later2)

    def test_distinct_trajectories_distinct_noise(self):
        a = TrajectoryStream(9, 0).step_normals(16)
        b = TrajectoryStream(9, 1).step_normals(16)
        assert not np.array_equal(a, b)

    def test_seed_split_roundtrip(self):
        lo, hi = split_seed(0xDEADBEEF12345678)
        assert lo == 0x12345678
        assert hi == 0xDEADBEEF

    def test_draw_normals_accepts_numpy_generator(self):
        rng = np.random.default_rng(0)
        out = draw_normals(rng, 20, PURPOSE_NOISE)
        assert out.shape == (20,)
        stream = TrajectoryStream(5, 5)
        assert np.array_equal(draw_normals(stream, 8, PURPOSE_INIT),
                              TrajectoryStream(5, 5).initial_normals(8))
