"""Shared value types."""

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]


class KernelKind(str, Enum):
    """Shift-invariant kernels with a known spectral distribution."""

    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"
    CAUCHY = "cauchy"


class Outcome(str, Enum):
    """Label of a state store."""

    SUCCESS = "success"
    FAILURE = "failure"


class SuccessFlag(IntEnum):
    """Per-transition label kept in the replay buffer."""

    UNKNOWN = -1
    FAILURE = 0
    SUCCESS = 1


@dataclass(frozen=True)
class StepResult:
    next_state: FloatArray
    reward: float
    terminated: bool
    truncated: bool


@dataclass(frozen=True)
class CountEstimate:
    """Smoothed success and failure counts; scalars or one entry per batch row."""

    n_success: FloatArray
    n_failure: FloatArray

    @classmethod
    def of(cls, n_success: npt.ArrayLike, n_failure: npt.ArrayLike) -> "CountEstimate":
        return cls(
            n_success=np.maximum(np.asarray(n_success, dtype=np.float64), 0.0),
            n_failure=np.maximum(np.asarray(n_failure, dtype=np.float64), 0.0),
        )


@dataclass(frozen=True)
class EvalResult:
    mean: float
    stderr: float
    episodes: int
    returns: tuple[float, ...] = ()
