import math

import numpy as np
import pytest

from spde_engine.data.noise import (
    apply_noise,
    dump_path,
    increment,
    load_path,
    sample_path,
    truncation_tail,
    u0_norm,
    zero_path,
)
from spde_engine.models.problem import catalog_problem
from spde_engine.utils.exceptions import DomainError, SpdeEngineError
from tests.fixtures.synthetic_fields import random_field


class TestSamplePath:
    def test_same_key_same_path(self):
        first = sample_path(42, 50, 1e-3, 4, member=3)
        second = sample_path(42, 50, 1e-3, 4, member=3)
        assert np.array_equal(first.increments, second.increments)

    def test_members_and_seeds_are_independent_streams(self):
        base = sample_path(42, 50, 1e-3, 2, member=0).increments
        assert not np.array_equal(base, sample_path(42, 50, 1e-3, 2, member=1).increments)
        assert not np.array_equal(base, sample_path(43, 50, 1e-3, 2, member=0).increments)

    @pytest.mark.parametrize("mode,step", [(1, 0), (1, 3), (2, 4), (3, 37), (4, 49)])
    def test_single_increment_addressing(self, mode, step):
        path = sample_path(9, 50, 2e-3, 4, member=5)
        assert increment(9, 5, mode, step, 2e-3) == path.increments[mode - 1, step]

    def test_longer_path_extends_shorter_one(self):
        short = sample_path(1, 10, 1e-2, 3)
        long = sample_path(1, 25, 1e-2, 3)
        assert np.array_equal(long.increments[:, :10], short.increments)

    def test_increment_variance_is_dt(self):
        dt = 0.01
        values = sample_path(123, 20000, dt, 1).increments[0]
        assert abs(np.mean(values)) < 4.0 * math.sqrt(dt / values.size)
        assert np.var(values) == pytest.approx(dt, rel=0.05)

    def test_increments_are_frozen(self):
        path = sample_path(0, 4, 0.1, 2)
        with pytest.raises(ValueError):
            path.increments[0, 0] = 1.0

    def test_zero_modes_is_empty(self):
        path = sample_path(0, 8, 0.1, 0)
        assert path.increments.shape == (0, 8)
        assert zero_path(8, 0.1).modes == 0

    @pytest.mark.parametrize("steps,dt,K", [(0, 0.1, 1), (5, 0.0, 1), (5, 0.1, -1)])
    def test_invalid_arguments(self, steps, dt, K):
        with pytest.raises(DomainError):
            sample_path(0, steps, dt, K)

    def test_aggregated_and_brownian(self):
        path = sample_path(3, 12, 0.05, 2)
        np.testing.assert_allclose(path.aggregated(2, 7), path.increments[:, 2:7].sum(axis=1))
        assert np.all(path.brownian(0) == 0.0)
        np.testing.assert_allclose(path.brownian(12), path.increments.sum(axis=1))
        with pytest.raises(DomainError):
            path.step_increments(12)


class TestNoiseOperator:
    def test_additive_noise_is_weighted_sum(self, grid_1d):
        spec = catalog_problem("additive-heat", modes=3)
        path = sample_path(5, 4, 0.01, 3)
        noise = apply_noise(grid_1d.zeros(), spec, path, 2)
        expected = float(np.dot([1.0, 0.5, 1.0 / 3.0], path.step_increments(2)))
        np.testing.assert_allclose(noise.values, expected)

    def test_multiplicative_noise_vanishes_at_zero_state(self, grid_1d):
        spec = catalog_problem("degenerate-multiplicative", modes=4)
        path = sample_path(5, 4, 0.01, 4)
        assert np.all(apply_noise(grid_1d.zeros(), spec, path, 0).values == 0.0)

    def test_multiplicative_noise_matches_cellwise_sum(self, grid_1d):
        spec = catalog_problem("degenerate-multiplicative", modes=5)
        noise = spec.noise
        path = sample_path(21, 3, 0.01, 5)
        u = random_field(grid_1d, seed=6)
        weights = path.step_increments(1)
        expected = np.zeros(grid_1d.shape)
        for i in range(grid_1d.points):
            x, xi = i * grid_1d.h, u.values[i]
            for k in range(1, 6):
                c_k = noise.amplitude * k ** (-noise.decay)
                g = c_k * math.sin(2.0 * math.pi * k * x) * noise.scale * xi / (1.0 + xi * xi)
                expected[i] += g * weights[k - 1]
        np.testing.assert_allclose(apply_noise(u, spec, path, 1).values, expected, rtol=1e-12, atol=1e-14)

    def test_harmonic_noise_matches_cellwise_sum_in_two_dimensions(self, grid_2d):
        spec = catalog_problem("harmonic-heat", dim=2, modes=3)
        path = sample_path(22, 2, 0.01, 3)
        u = random_field(grid_2d, seed=7)
        weights = path.step_increments(0)
        expected = np.zeros(grid_2d.shape)
        for index in np.ndindex(*grid_2d.shape):
            xi = u.values[index]
            for k in range(1, 4):
                expected[index] += spec.noise.c / k * (1.0 + abs(xi)) * weights[k - 1]
        np.testing.assert_allclose(apply_noise(u, spec, path, 0).values, expected, rtol=1e-12, atol=1e-14)

    def test_u0_norm_weights_modes(self):
        path = sample_path(8, 6, 0.1, 3)
        beta = path.brownian(6)
        expected = beta[0] ** 2 + beta[1] ** 2 / 4.0 + beta[2] ** 2 / 9.0
        result = u0_norm(path, 6)
        assert result.value == pytest.approx(expected)
        assert result.time == pytest.approx(0.6)

    def test_truncation_tail_decreases_in_k(self):
        spec = catalog_problem("additive-heat", modes=4, noise_decay=1.0)
        tails = [truncation_tail(spec, K) for K in (4, 16, 64)]
        assert tails[0] > tails[1] > tails[2] > 0.0
        assert tails[1] == pytest.approx(math.pi ** 2 / 6.0 - sum(1.0 / k ** 2 for k in range(1, 17)), rel=1e-10)


def _within_standard_errors(samples, expected, k=3.0):
    samples = np.asarray(samples, dtype=float)
    standard_error = np.std(samples, ddof=1) / math.sqrt(samples.size)
    return abs(np.mean(samples) - expected) <= k * standard_error, (np.mean(samples), expected, standard_error)


class TestIncrementStatistics:
    @pytest.mark.parametrize("first,second", [(1, 2), (3, 4), (1, 4)])
    def test_modes_are_uncorrelated(self, first, second):
        dt = 0.01
        table = sample_path(31, 20000, dt, 4).increments
        ok, detail = _within_standard_errors(table[first - 1] * table[second - 1] / dt, 0.0)
        assert ok, detail

    def test_members_are_uncorrelated(self):
        dt = 0.01
        a = sample_path(31, 20000, dt, 1, member=0).increments[0]
        b = sample_path(31, 20000, dt, 1, member=1).increments[0]
        ok, detail = _within_standard_errors(a * b / dt, 0.0)
        assert ok, detail

    def test_variance_grows_linearly_with_the_interval(self):
        dt = 0.01
        path = sample_path(17, 40000, dt, 1)
        single = path.increments[0]
        blocks = single.reshape(-1, 4).sum(axis=1)
        assert blocks[3] == pytest.approx(path.aggregated(12, 16)[0])
        ok, detail = _within_standard_errors(single ** 2, dt)
        assert ok, detail
        ok, detail = _within_standard_errors(blocks ** 2, 4.0 * dt)
        assert ok, detail

    def test_u0_norm_mean_matches_trace(self):
        K, dt, steps = 4, 0.01, 10
        values = [u0_norm(sample_path(5, steps, dt, K, member=m), steps).value for m in range(2000)]
        expected = steps * dt * sum(1.0 / k ** 2 for k in range(1, K + 1))
        ok, detail = _within_standard_errors(values, expected)
        assert ok, detail


class TestDumpLoad:
    def test_dump_then_load_is_identical(self, tmp_path):
        path = sample_path(77, 30, 1e-3, 5, member=2)
        restored = load_path(dump_path(path, tmp_path / "paths" / "member2.bin"))
        assert restored.identity() == path.identity()
        assert np.array_equal(restored.increments, path.increments)

    def test_rejects_foreign_file(self, tmp_path):
        target = tmp_path / "junk.bin"
        target.write_bytes(b"NOTAPATH" + bytes(64))
        with pytest.raises(SpdeEngineError):
            load_path(target)

    def test_rejects_truncated_file(self, tmp_path):
        target = dump_path(sample_path(1, 10, 0.1, 2), tmp_path / "p.bin")
        target.write_bytes(target.read_bytes()[:-8])
        with pytest.raises(SpdeEngineError):
            load_path(target)
