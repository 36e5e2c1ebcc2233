"""Tests for the random Fourier feature projector."""

import numpy as np
import pytest

from sasr.exceptions import DimensionError, ValidationError
from sasr.rff import (
    approximate_kernel,
    exact_kernel,
    frobenius_error,
    kernel_matrix,
    new_projector,
    project,
)
from sasr.sasr_types import KernelKind


def test_same_seed_gives_identical_projector():
    a = new_projector(3, 128, 0.2, KernelKind.LAPLACIAN, seed=11)
    b = new_projector(3, 128, 0.2, KernelKind.LAPLACIAN, seed=11)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.offsets, b.offsets)


def test_different_seeds_differ():
    a = new_projector(2, 64, 0.2, seed=1)
    b = new_projector(2, 64, 0.2, seed=2)
    assert not np.array_equal(a.weights, b.weights)


def test_offsets_lie_in_one_period():
    p = new_projector(2, 1000, 1.0, seed=0)
    assert p.offsets.min() >= 0.0
    assert p.offsets.max() < 2 * np.pi


def test_projector_is_read_only(projector):
    with pytest.raises(ValueError):
        projector.weights[0, 0] = 1.0


def test_project_vector_and_batch(projector):
    single = project(projector, [0.1, -0.2])
    batch = project(projector, [[0.1, -0.2], [0.3, 0.4]])
    assert single.shape == (256,)
    assert batch.shape == (2, 256)
    assert np.allclose(batch[0], single)


def test_features_are_bounded(projector, rng):
    features = project(projector, rng.uniform(-5, 5, (50, 2)))
    assert np.all(np.abs(features) <= np.sqrt(2.0 / 256) + 1e-12)


def test_with_bandwidth_keeps_draws(projector):
    wider = projector.with_bandwidth(1.0)
    assert np.array_equal(wider.unit_weights, projector.unit_weights)
    assert np.allclose(wider.weights, projector.unit_weights)
    assert np.allclose(projector.weights, projector.unit_weights / 0.5)


def test_exact_kernels_at_zero_distance():
    s = np.array([0.3, -0.1])
    assert exact_kernel(s, s, 0.2, KernelKind.GAUSSIAN) == pytest.approx(1.0)
    assert exact_kernel(s, s, 0.2, KernelKind.LAPLACIAN) == pytest.approx(1.0)
    assert exact_kernel(s, s, 0.2, KernelKind.CAUCHY) == pytest.approx((2 / np.pi) ** 2)


def test_exact_kernel_values():
    a, b = np.array([0.0]), np.array([0.5])
    assert exact_kernel(a, b, 0.5, "gaussian") == pytest.approx(np.exp(-0.5))
    assert exact_kernel(a, b, 0.5, "laplacian") == pytest.approx(np.exp(-1.0))
    assert exact_kernel(a, b, 0.5, "cauchy") == pytest.approx(2 / (np.pi * 2.0))


def test_gaussian_approximation_error_on_1000_pairs():
    """M=1000, h=0.2: every one of 1000 nearby pairs within 0.1 of the exact kernel."""
    rng = np.random.default_rng(0)
    p = new_projector(2, 1000, 0.2, seed=3)
    left = rng.uniform(-0.1, 0.1, (1000, 2))
    right = rng.uniform(-0.1, 0.1, (1000, 2))
    approx = np.sum(project(p, left) * project(p, right), axis=1)
    exact = np.exp(-0.5 * np.sum(((left - right) / 0.2) ** 2, axis=1))
    errors = np.abs(approx - exact)

    assert exact.min() < 0.6
    assert np.mean(errors) <= 0.035
    assert errors.max() <= 0.1


def _seed_average(kernel, pairs, seeds=300):
    """Mean and standard error over independently seeded M=64, h=0.2 projectors, one column per pair."""
    projectors = [new_projector(2, 64, 0.2, kernel, seed=seed) for seed in range(seeds)]
    estimates = np.array([[approximate_kernel(p, a, b) for a, b in pairs] for p in projectors])
    return estimates, estimates.mean(axis=0), estimates.std(axis=0, ddof=1) / np.sqrt(seeds)


def test_estimate_is_unbiased_over_projectors():
    """Averaged over 300 projectors the estimate is within 3 standard errors of the kernel."""
    rng = np.random.default_rng(42)
    pairs = [(a, a + rng.normal(0.0, 0.2, 2)) for a in rng.uniform(-1, 1, (20, 2))]
    _, mean, stderr = _seed_average(KernelKind.GAUSSIAN, pairs)
    exact = np.array([exact_kernel(a, b, 0.2, KernelKind.GAUSSIAN) for a, b in pairs])

    assert np.all(np.abs(mean - exact) < 3.0 * stderr)


@pytest.mark.parametrize("kernel", list(KernelKind))
def test_approximation_is_shift_invariant_on_average(kernel):
    """Translating both states leaves the seed-averaged estimate unchanged."""
    rng = np.random.default_rng(8)
    a = rng.uniform(-1, 1, 2)
    b = a + rng.normal(0.0, 0.2, 2)
    shift = rng.uniform(-3, 3, 2)
    estimates, _, _ = _seed_average(kernel, [(a, b), (a + shift, b + shift)])
    gaps = estimates[:, 0] - estimates[:, 1]

    assert abs(gaps.mean()) < 3.0 * gaps.std(ddof=1) / np.sqrt(len(gaps))


def test_exact_kernel_shift_invariance():
    rng = np.random.default_rng(5)
    a, b = rng.uniform(-1, 1, (2, 3))
    shift = rng.uniform(-10, 10, 3)
    for kernel in KernelKind:
        shifted = exact_kernel(a + shift, b + shift, 0.3, kernel)
        assert exact_kernel(a, b, 0.3, kernel) == pytest.approx(shifted)


def test_frobenius_error_shrinks_with_more_features(rng):
    states = rng.uniform(-1, 1, (60, 2))
    wins = 0
    for seed in range(10):
        errors = [frobenius_error(new_projector(2, m, 0.5, seed=seed), states) for m in (50, 200, 2000)]
        wins += errors[0] > errors[1] > errors[2]
    assert wins >= 6


def test_kernel_matrix_is_symmetric(rng):
    states = rng.normal(size=(10, 2))
    matrix = kernel_matrix(states, states, 0.4, KernelKind.LAPLACIAN)
    assert np.allclose(matrix, matrix.T)
    assert np.allclose(np.diag(matrix), 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"state_dim": 0, "feature_dim": 10, "bandwidth": 0.2},
        {"state_dim": 2, "feature_dim": 0, "bandwidth": 0.2},
        {"state_dim": 2, "feature_dim": 10, "bandwidth": 0.0},
        {"state_dim": 2, "feature_dim": 10, "bandwidth": -1.0},
        {"state_dim": 2, "feature_dim": 10, "bandwidth": 0.2, "seed": -1},
    ],
)
def test_new_projector_rejects_bad_arguments(kwargs):
    with pytest.raises(ValidationError):
        new_projector(**kwargs)


def test_unknown_kernel_name():
    with pytest.raises(ValueError):
        new_projector(2, 10, 0.2, kernel="polynomial")


def test_project_wrong_dimension(projector):
    with pytest.raises(DimensionError):
        project(projector, [0.1, 0.2, 0.3])


def test_project_rejects_non_finite(projector):
    with pytest.raises(ValidationError):
        project(projector, [np.nan, 0.0])


def test_frobenius_error_needs_two_states(projector):
    with pytest.raises(ValidationError):
        frobenius_error(projector, [[0.0, 0.0]])
    with pytest.raises(ValidationError):
        frobenius_error(projector, np.empty((0, 2)))


def test_exact_kernel_needs_matching_vectors():
    with pytest.raises(DimensionError):
        exact_kernel([0.0, 1.0], [0.0], 0.2, "gaussian")
