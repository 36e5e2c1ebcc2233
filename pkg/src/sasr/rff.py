"""
Random Fourier feature projection for shift-invariant kernels.

A projector maps a k-dimensional state to ``sqrt(2/M) * cos(W^T s + b)``. The
columns of ``W`` are drawn from the kernel's spectral density at unit bandwidth
and divided by the bandwidth, so that inner products of projected states
estimate ``K((s_i - s_j) / h)``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from sasr.exceptions import DimensionError, ValidationError
from sasr.sasr_types import FloatArray, KernelKind
from sasr.validation import finite_matrix, positive, positive_int

logger = logging.getLogger("sasr.rff")


def _spectral_draws(
    kernel: KernelKind, rng: np.random.Generator, state_dim: int, feature_dim: int
) -> FloatArray:
    """Unit-bandwidth frequency samples, one column per feature."""
    size = (state_dim, feature_dim)
    if kernel is KernelKind.GAUSSIAN:
        return rng.standard_normal(size)
    if kernel is KernelKind.LAPLACIAN:
        return rng.standard_cauchy(size)
    if kernel is KernelKind.CAUCHY:
        return rng.laplace(0.0, 1.0, size)
    raise ValidationError(f"Unsupported kernel {kernel!r}")


def _frozen(array: FloatArray) -> FloatArray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RffProjector:
    """Frozen random projection; build it with :func:`new_projector`."""

    unit_weights: FloatArray
    offsets: FloatArray
    bandwidth: float
    kernel: KernelKind
    seed: int
    _weights: FloatArray = field(init=False, repr=False)

    @property
    def weights(self) -> FloatArray:
        return self._weights

    @property
    def state_dim(self) -> int:
        return int(self.unit_weights.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.unit_weights.shape[1])

    @property
    def kernel_scale(self) -> float:
        """Peak value of the tabulated kernel; feature inner products estimate a unit-peak kernel."""
        if self.kernel is KernelKind.CAUCHY:
            return float((2.0 / np.pi) ** self.state_dim)
        return 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "_weights", _frozen(self.unit_weights / self.bandwidth))

    def with_bandwidth(self, bandwidth: float) -> "RffProjector":
        """Same spectral draws and offsets, different bandwidth."""
        return RffProjector(
            unit_weights=self.unit_weights,
            offsets=self.offsets,
            bandwidth=positive(bandwidth, "bandwidth"),
            kernel=self.kernel,
            seed=self.seed,
        )

    def __repr__(self) -> str:
        return (
            f"RffProjector(state_dim={self.state_dim}, feature_dim={self.feature_dim}, "
            f"bandwidth={self.bandwidth!r}, kernel={self.kernel.value}, seed={self.seed})"
        )


def new_projector(
    state_dim: int,
    feature_dim: int,
    bandwidth: float,
    kernel: KernelKind | str = KernelKind.GAUSSIAN,
    seed: int = 0,
) -> RffProjector:
    """Draw a projector; identical arguments give bitwise-identical projectors."""
    state_dim = positive_int(state_dim, "state_dim")
    feature_dim = positive_int(feature_dim, "feature_dim")
    bandwidth = positive(bandwidth, "bandwidth")
    kernel = KernelKind(kernel)
    if seed < 0:
        raise ValidationError("seed must be unsigned", reason=f"got {seed}")

    rng = np.random.Generator(np.random.PCG64(seed))
    unit_weights = _frozen(_spectral_draws(kernel, rng, state_dim, feature_dim))
    offsets = _frozen(rng.uniform(0.0, 2.0 * np.pi, feature_dim))

    logger.debug(
        "Projector drawn: kernel=%s state_dim=%d M=%d h=%s seed=%d",
        kernel.value,
        state_dim,
        feature_dim,
        bandwidth,
        seed,
    )
    return RffProjector(
        unit_weights=unit_weights,
        offsets=offsets,
        bandwidth=bandwidth,
        kernel=kernel,
        seed=int(seed),
    )


def project(p: RffProjector, states: npt.ArrayLike) -> FloatArray:
    """Project one state (vector in, vector out) or a batch of states (rows)."""
    single = np.ndim(states) == 1
    rows = finite_matrix(states, "state", width=p.state_dim)
    features = np.sqrt(2.0 / p.feature_dim) * np.cos(rows @ p.weights + p.offsets)
    return features[0] if single else features


def kernel_matrix(
    a: npt.ArrayLike, b: npt.ArrayLike, bandwidth: float, kernel: KernelKind | str
) -> FloatArray:
    """Pairwise exact kernel values between the rows of ``a`` and ``b``."""
    kernel = KernelKind(kernel)
    bandwidth = positive(bandwidth, "bandwidth")
    left = finite_matrix(a, "a")
    right = finite_matrix(b, "b", width=left.shape[1])

    scaled = (left[:, None, :] - right[None, :, :]) / bandwidth
    if kernel is KernelKind.GAUSSIAN:
        return np.exp(-0.5 * np.sum(scaled**2, axis=-1))
    if kernel is KernelKind.LAPLACIAN:
        return np.exp(-np.sum(np.abs(scaled), axis=-1))
    return np.prod(2.0 / (np.pi * (1.0 + scaled**2)), axis=-1)


def exact_kernel(
    s_i: npt.ArrayLike, s_j: npt.ArrayLike, bandwidth: float, kernel: KernelKind | str
) -> float:
    if np.ndim(s_i) != 1 or np.ndim(s_j) != 1 or np.size(s_i) != np.size(s_j):
        raise DimensionError(
            "exact_kernel needs two vectors of equal length",
            reason=f"shapes {np.shape(s_i)} and {np.shape(s_j)}",
        )
    return float(kernel_matrix(s_i, s_j, bandwidth, kernel)[0, 0])


def approximate_kernel(p: RffProjector, s_i: npt.ArrayLike, s_j: npt.ArrayLike) -> float:
    """Single-projector estimate of ``exact_kernel(s_i, s_j, p.bandwidth, p.kernel)``."""
    return p.kernel_scale * float(project(p, s_i) @ project(p, s_j))


def frobenius_error(p: RffProjector, states: npt.ArrayLike) -> float:
    """Frobenius norm between the feature Gram matrix and the exact kernel matrix."""
    if np.size(states) == 0:
        raise ValidationError("frobenius_error needs at least two states", reason="got none")
    rows = finite_matrix(states, "states", width=p.state_dim)
    if rows.shape[0] < 2:
        raise ValidationError("frobenius_error needs at least two states", reason=f"got {rows.shape[0]}")
    features = project(p, rows)
    approx = p.kernel_scale * (features @ features.T)
    exact = kernel_matrix(rows, rows, p.bandwidth, p.kernel)
    return float(np.linalg.norm(approx - exact, ord="fro"))
