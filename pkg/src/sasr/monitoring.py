"""
Run-time logs kept by the trainer.

- ``ShapingStats``: moments of the sampled shaped rewards and Beta shapes
  between two evaluation rows.
- ``VisitLog``: every visited state with its step, for density maps.
- ``RewardBinLog``: per state-space cell and per step window, moments of the
  sampled shaped rewards; used to check that reward variance shrinks.
"""

import csv
import itertools
from pathlib import Path

import numpy as np
import numpy.typing as npt

from sasr.exceptions import ValidationError
from sasr.sasr_types import FloatArray
from sasr.validation import positive_int


class ShapingStats:
    def __init__(self) -> None:
        self.reset()

    def reset(self) -> None:
        self.count = 0
        self._sum = 0.0
        self._sum_sq = 0.0
        self._alpha = 0.0
        self._beta = 0.0

    def add(self, rewards: FloatArray, alpha: FloatArray, beta: FloatArray) -> None:
        self.count += rewards.size
        self._sum += float(rewards.sum())
        self._sum_sq += float(np.square(rewards).sum())
        self._alpha += float(alpha.sum())
        self._beta += float(beta.sum())

    def summary(self) -> dict[str, float]:
        if self.count == 0:
            nan = float("nan")
            return {"mean": nan, "var": nan, "mean_alpha": nan, "mean_beta": nan}
        mean = self._sum / self.count
        return {
            "mean": mean,
            "var": max(self._sum_sq / self.count - mean**2, 0.0),
            "mean_alpha": self._alpha / self.count,
            "mean_beta": self._beta / self.count,
        }

    def flush(self) -> dict[str, float]:
        summary = self.summary()
        self.reset()
        return summary

    def state_dict(self) -> dict[str, float]:
        return {
            "count": float(self.count),
            "sum": self._sum,
            "sum_sq": self._sum_sq,
            "alpha": self._alpha,
            "beta": self._beta,
        }

    def load_state_dict(self, values: dict[str, float]) -> None:
        self.count = int(values["count"])
        self._sum = float(values["sum"])
        self._sum_sq = float(values["sum_sq"])
        self._alpha = float(values["alpha"])
        self._beta = float(values["beta"])


class VisitLog:
    def __init__(self, state_dim: int) -> None:
        self._rows = np.empty((1024, state_dim + 1))
        self._size = 0

    def add(self, step: int, state: FloatArray) -> None:
        if self._size == self._rows.shape[0]:
            grown = np.empty((2 * self._size, self._rows.shape[1]))
            grown[: self._size] = self._rows
            self._rows = grown
        self._rows[self._size, 0] = step
        self._rows[self._size, 1:] = state
        self._size += 1

    @property
    def rows(self) -> FloatArray:
        """Columns: step, then the state."""
        return self._rows[: self._size]

    def load_rows(self, rows: FloatArray) -> None:
        self._rows = np.array(rows, dtype=np.float64).reshape(-1, self._rows.shape[1])
        self._size = self._rows.shape[0]
        if self._size == 0:
            self._rows = np.empty((1024, self._rows.shape[1]))

    def save(self, path: str | Path) -> Path:
        target = Path(path)
        np.save(target, self.rows)
        return target


class StateGrid:
    """Regular grid over a box of the state space."""

    def __init__(self, low: npt.ArrayLike, high: npt.ArrayLike, bins: int) -> None:
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        self.bins = positive_int(bins, "bins")
        if self.low.shape != self.high.shape or np.any(self.high <= self.low):
            raise ValidationError("Grid bounds must satisfy low < high in every dimension")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.bins,) * self.low.shape[0]

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.shape))

    def cell_indices(self, states: FloatArray) -> npt.NDArray[np.int64]:
        scaled = (np.atleast_2d(states) - self.low) / (self.high - self.low)
        per_dim = np.clip((scaled * self.bins).astype(np.int64), 0, self.bins - 1)
        return np.ravel_multi_index(per_dim.T, self.shape)

    def cells(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(b) for b in self.shape)))


class RewardBinLog:
    CSV_HEADER = "# sasr-reward-bins v1"

    def __init__(self, grid: StateGrid, window: int) -> None:
        self.grid = grid
        self.window = positive_int(window, "log_window")
        self._windows: dict[int, FloatArray] = {}

    def add(self, step: int, states: FloatArray, rewards: FloatArray) -> None:
        index = (step - 1) // self.window
        moments = self._windows.get(index)
        if moments is None:
            moments = np.zeros((3, self.grid.cell_count))
            self._windows[index] = moments
        cells = self.grid.cell_indices(states)
        np.add.at(moments[0], cells, 1.0)
        np.add.at(moments[1], cells, rewards)
        np.add.at(moments[2], cells, np.square(rewards))

    def state_dict(self) -> dict[str, FloatArray]:
        return {f"window_{index}": moments.copy() for index, moments in self._windows.items()}

    def load_state_dict(self, arrays: dict[str, FloatArray]) -> None:
        self._windows = {
            int(name.removeprefix("window_")): np.array(moments, dtype=np.float64)
            for name, moments in arrays.items()
        }

    def save(self, path: str | Path) -> Path:
        target = Path(path)
        dims = len(self.grid.shape)
        with target.open("w", newline="") as handle:
            handle.write(self.CSV_HEADER + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(
                ["window_start", "window_end", *(f"bin_{d}" for d in range(dims)), "count", "sum", "sum_sq"]
            )
            for index in sorted(self._windows):
                moments = self._windows[index]
                for flat, cell in enumerate(self.grid.cells()):
                    if moments[0, flat] == 0:
                        continue
                    writer.writerow(
                        [
                            index * self.window + 1,
                            (index + 1) * self.window,
                            *cell,
                            int(moments[0, flat]),
                            repr(float(moments[1, flat])),
                            repr(float(moments[2, flat])),
                        ]
                    )
        return target
