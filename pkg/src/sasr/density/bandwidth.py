"""Kernel bandwidth selection and schedules."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sasr.exceptions import ValidationError
from sasr.validation import finite_matrix, positive, positive_int


def bandwidth_silverman(sample_std: float, n: int) -> float:
    """Silverman's rule of thumb: ``1.06 * sigma * n ** (-1/5)``."""
    sample_std = positive(sample_std, "sample_std")
    n = positive_int(n, "n")
    return 1.06 * sample_std * n ** (-0.2)


def bandwidth_from_states(states: npt.ArrayLike) -> float:
    """Silverman bandwidth from the mean per-dimension sample standard deviation."""
    rows = finite_matrix(states, "states")
    if rows.shape[0] < 2:
        raise ValidationError("Need at least two states to estimate a bandwidth")
    sigma = float(np.mean(np.std(rows, axis=0, ddof=1)))
    return bandwidth_silverman(sigma, rows.shape[0])


@dataclass(frozen=True)
class BandwidthSchedule:
    """Constant bandwidth, or a linear decrease from ``start`` to ``end`` over ``total_steps``.

    The value changes only every ``update_interval`` steps so that stores are
    reprojected a bounded number of times.
    """

    start: float
    end: float | None = None
    total_steps: int = 1
    update_interval: int = 10_000

    def __post_init__(self) -> None:
        positive(self.start, "bandwidth")
        if self.end is not None:
            positive(self.end, "bandwidth_end")
        positive_int(self.total_steps, "total_steps")
        positive_int(self.update_interval, "update_interval")

    @property
    def is_constant(self) -> bool:
        return self.end is None or self.end == self.start

    def value(self, step: int) -> float:
        if self.end is None or self.is_constant:
            return self.start
        anchor = (step // self.update_interval) * self.update_interval
        fraction = min(anchor / self.total_steps, 1.0)
        return self.start + fraction * (self.end - self.start)

    def changes_at(self, step: int) -> bool:
        return not self.is_constant and step > 0 and step % self.update_interval == 0

    def label(self) -> str:
        if self.is_constant:
            return f"{self.start:g}"
        return f"{self.start:g}->{self.end:g}"
