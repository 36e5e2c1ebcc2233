"""Exact-kernel count oracle used to validate the feature-based estimate."""

import numpy as np
import numpy.typing as npt

from sasr.rff import kernel_matrix
from sasr.sasr_types import FloatArray, KernelKind
from sasr.validation import finite_matrix

QUERY_CHUNK = 256


def brute_force_count(
    raw_states: npt.ArrayLike,
    query: npt.ArrayLike,
    observed_count: int,
    bandwidth: float,
    kernel: KernelKind | str = KernelKind.GAUSSIAN,
) -> FloatArray | float:
    """``(N / |D|) * sum_j K(query, s_j)`` with the exact kernel.

    A single query vector gives a float, a matrix of query rows gives one count per row.
    """
    single = np.ndim(query) == 1
    points = finite_matrix(query, "query")
    if np.size(raw_states) == 0:
        return 0.0 if single else np.zeros(points.shape[0])
    stored = finite_matrix(raw_states, "raw_states", width=points.shape[1])

    sums = np.empty(points.shape[0])
    for start in range(0, points.shape[0], QUERY_CHUNK):
        block = points[start : start + QUERY_CHUNK]
        sums[start : start + QUERY_CHUNK] = kernel_matrix(block, stored, bandwidth, kernel).sum(axis=1)
    counts = observed_count / stored.shape[0] * sums
    return float(counts[0]) if single else counts
