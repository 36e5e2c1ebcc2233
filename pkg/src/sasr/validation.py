"""Argument checks shared by the numerical modules."""

import numpy as np
import numpy.typing as npt

from sasr.exceptions import DimensionError, ValidationError
from sasr.sasr_types import FloatArray


def finite_matrix(values: npt.ArrayLike, name: str, width: int | None = None) -> FloatArray:
    """Return ``values`` as a 2-D float array of rows, rejecting non-finite entries.

    A single vector is promoted to one row.
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2:
        raise DimensionError(f"{name} must be a vector or a matrix of rows", reason=f"ndim={array.ndim}")
    if width is not None and array.shape[1] != width:
        raise DimensionError(
            f"{name} has the wrong dimension",
            reason=f"expected {width}, got {array.shape[1]}",
        )
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} contains non-finite values")
    return array


def positive(value: float, name: str) -> float:
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive", reason=f"got {value!r}")
    return float(value)


def positive_int(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValidationError(f"{name} must be a positive integer", reason=f"got {value!r}")
    return int(value)
