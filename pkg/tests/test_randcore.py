import math

import numpy as np
import pytest
from scipy import stats

from tukeydp.randcore import (SEED_ENV_VAR, EmptySupportError, ParameterError, RandomSource,
                              gaussian_vector, laplace_sample, racing_argmin, unit_sphere_direction)


def test_seeded_streams_reproduce():
    a = RandomSource(5).random(10)
    b = RandomSource(5).random(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RandomSource(6).random(10))


def test_spawn_is_keyed_not_order_dependent():
    root = RandomSource(11)
    first = root.spawn(3, 1).random(4)
    root.spawn(0, 0).random(100)
    again = RandomSource(11).spawn(3, 1).random(4)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, root.spawn(3, 0).random(4))


def test_secure_source_and_children():
    s = RandomSource()
    assert s.kind == "secure" and s.seed is None
    u = s.random(1000)
    assert np.all((u >= 0) & (u < 1))
    assert s.spawn(1).kind == "secure"
    z = s.standard_normal(2000)
    assert abs(z.mean()) < 0.2 and abs(z.std() - 1) < 0.1


def test_from_env(monkeypatch):
    monkeypatch.setenv(SEED_ENV_VAR, "42")
    assert RandomSource.from_env().seed == 42
    assert RandomSource.from_env(7).seed == 7
    monkeypatch.delenv(SEED_ENV_VAR)
    assert RandomSource.from_env().kind == "secure"


def test_bad_seed():
    with pytest.raises(ParameterError):
        RandomSource(-1)


def test_laplace_moments_and_tail():
    z = laplace_sample(4.0, RandomSource(0), size=200_000)
    assert abs(z.mean()) < 0.05
    assert abs(np.mean(np.abs(z)) - 4.0) < 0.05
    # P(Z > 8) = e^{-2} / 2
    assert abs(np.mean(z > 8) - 0.5 * math.exp(-2)) < 0.003
    with pytest.raises(ParameterError):
        laplace_sample(0.0)


def test_racing_matches_weights():
    w = np.array([0.1, 0.2, 0.3, 0.4])
    idx = racing_argmin(np.log(w), RandomSource(1), size=100_000)
    counts = np.bincount(idx, minlength=4)
    assert stats.chisquare(counts, 1e5 * w).pvalue > 1e-3


def test_racing_handles_huge_and_minus_inf_weights():
    lw = np.array([-np.inf, 1000.0, 1000.0 + math.log(3), -np.inf])
    idx = racing_argmin(lw, RandomSource(2), size=40_000)
    assert set(np.unique(idx)) <= {1, 2}
    assert abs(np.mean(idx == 2) - 0.75) < 0.01
    with pytest.raises(EmptySupportError):
        racing_argmin([-np.inf, -np.inf])
    with pytest.raises(ParameterError):
        racing_argmin([0.0, np.nan])


def test_unit_sphere_uniform():
    v = unit_sphere_direction(3, RandomSource(3), size=50_000)
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
    assert np.all(np.abs(v.mean(axis=0)) < 0.02)
    # first coordinate uniform on [-1, 1] in three dimensions (Archimedes)
    assert stats.kstest(v[:, 0], "uniform", args=(-1, 2)).pvalue > 1e-3
    with pytest.raises(ParameterError):
        unit_sphere_direction(0)


def test_gaussian_vector_covariance_forms():
    rng = RandomSource(4)
    full = np.array([[2.0, 0.6], [0.6, 1.0]])
    x = gaussian_vector([1.0, -1.0], full, rng, size=100_000)
    assert np.allclose(x.mean(axis=0), [1, -1], atol=0.02)
    assert np.allclose(np.cov(x.T), full, atol=0.03)
    y = gaussian_vector([0, 0], [4.0, 0.25], rng, size=50_000)
    assert np.allclose(y.std(axis=0), [2.0, 0.5], atol=0.02)
    with pytest.raises(ParameterError):
        gaussian_vector([0, 0], [[1, 2], [0, 1]])
