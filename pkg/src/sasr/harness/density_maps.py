"""
Visit-density histograms and binned shaped-reward variance, per step window.

Both read the artifacts a training run leaves in its run directory:
``visits.npy`` (step, state per environment step) and ``reward_bins.csv``.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from sasr.envs import make_env
from sasr.exceptions import ArtifactError
from sasr.harness.records import write_csv
from sasr.monitoring import RewardBinLog
from sasr.sasr_types import FloatArray
from sasr.validation import positive_int

logger = logging.getLogger("sasr.harness")

DENSITY_CSV_HEADER = "# sasr-density-csv v1"
DEFAULT_WINDOW = 25_000


@dataclass(frozen=True)
class DensityWindow:
    start: int
    end: int
    counts: npt.NDArray[np.int64]
    edges: tuple[FloatArray, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def coverage(self) -> int:
        """Number of cells visited at least once."""
        return int(np.count_nonzero(self.counts))


def load_visits(run_dir: str | Path) -> FloatArray:
    source = Path(run_dir) / "visits.npy"
    if not source.is_file():
        raise ArtifactError(f"No visit log in {run_dir}", reason="run with log_visits = true")
    try:
        visits = np.load(source)
    except (OSError, ValueError) as e:
        raise ArtifactError(f"Cannot read visit log {source}", reason=str(e)) from e
    if visits.ndim != 2 or visits.shape[1] < 2:
        raise ArtifactError(f"Visit log {source} has the wrong shape", reason=f"got {visits.shape}")
    return np.asarray(visits, dtype=np.float64)


def density_windows(
    visits: FloatArray,
    low: npt.ArrayLike,
    high: npt.ArrayLike,
    bins: int,
    window: int = DEFAULT_WINDOW,
) -> list[DensityWindow]:
    """One histogram over the state box per ``window`` steps (columns of ``visits``: step, state)."""
    bins = positive_int(bins, "bins")
    window = positive_int(window, "window")
    ranges = list(zip(np.asarray(low, dtype=np.float64), np.asarray(high, dtype=np.float64), strict=True))
    if visits.shape[1] - 1 != len(ranges):
        raise ArtifactError("Visit log and state bounds disagree on the state dimension")

    steps = visits[:, 0].astype(np.int64)
    windows: list[DensityWindow] = []
    if steps.size == 0:
        return windows
    last = int((steps.max() - 1) // window)
    for index in range(last + 1):
        start, end = index * window + 1, (index + 1) * window
        states = visits[(steps >= start) & (steps <= end), 1:]
        counts, edges = np.histogramdd(states, bins=bins, range=ranges)
        windows.append(DensityWindow(start, end, counts.astype(np.int64), tuple(edges)))
    return windows


def run_density(
    run_dir: str | Path, env: str, bins: int, window: int = DEFAULT_WINDOW
) -> list[DensityWindow]:
    environment = make_env(env)
    visits = load_visits(run_dir)
    windows = density_windows(visits, environment.state_low, environment.state_high, bins, window)
    logger.info("Density of %s: coverage per window %s", run_dir, [w.coverage for w in windows])
    return windows


def write_density_csv(path: str | Path, windows: Sequence[DensityWindow]) -> Path:
    dims = windows[0].counts.ndim if windows else 0
    rows = []
    for w in windows:
        for cell in zip(*np.nonzero(w.counts), strict=True):
            rows.append((w.start, w.end, *(int(i) for i in cell), int(w.counts[cell])))
    return write_csv(
        path,
        DENSITY_CSV_HEADER,
        ("window_start", "window_end", *(f"bin_{d}" for d in range(dims)), "count"),
        rows,
    )


@dataclass(frozen=True)
class VarianceRow:
    window_start: int
    window_end: int
    samples: int
    mean_bin_variance: float


def _read_bins(path: str | Path) -> list[dict[str, str]]:
    source = Path(path)
    try:
        lines = source.read_text().splitlines()
    except OSError as e:
        raise ArtifactError(f"Cannot read reward bins {source}", reason=str(e)) from e
    if len(lines) < 2 or lines[0] != RewardBinLog.CSV_HEADER:
        raise ArtifactError(f"{source} is not a reward-bin file")
    header = lines[1].split(",")
    return [dict(zip(header, line.split(","), strict=True)) for line in lines[2:]]


def _cell(record: dict[str, str]) -> tuple[int, ...]:
    return tuple(int(value) for key, value in record.items() if key.startswith("bin_"))


def reward_variance_trend(path: str | Path) -> list[VarianceRow]:
    """Per window, the count-weighted mean of the within-cell variance of sampled shaped rewards."""
    totals: dict[tuple[int, int], list[float]] = {}
    for record in _read_bins(path):
        count = int(record["count"])
        mean = float(record["sum"]) / count
        variance = max(float(record["sum_sq"]) / count - mean**2, 0.0)
        key = (int(record["window_start"]), int(record["window_end"]))
        acc = totals.setdefault(key, [0.0, 0.0])
        acc[0] += count
        acc[1] += count * variance
    return [
        VarianceRow(start, end, int(samples), weighted / samples)
        for (start, end), (samples, weighted) in sorted(totals.items())
    ]


@dataclass(frozen=True)
class BinVarianceShift:
    """Shaped-reward variance of one state bin early and late in a run."""

    cell: tuple[int, ...]
    early: float
    late: float

    @property
    def shrank(self) -> bool:
        return self.late < self.early


def _pooled_variance(records: Sequence[dict[str, str]]) -> float:
    count = sum(int(r["count"]) for r in records)
    if count == 0:
        return float("nan")
    mean = sum(float(r["sum"]) for r in records) / count
    return max(sum(float(r["sum_sq"]) for r in records) / count - mean**2, 0.0)


def busiest_bin_variance(path: str | Path, total_steps: int | None = None) -> BinVarianceShift:
    """Variance in the most visited bin over the first and last quarter of training.

    Only windows lying wholly inside a quarter count towards it. ``total_steps``
    defaults to the end of the last logged window.
    """
    records = _read_bins(path)
    if not records:
        raise ArtifactError(f"{path} holds no reward samples")
    visits: dict[tuple[int, ...], int] = {}
    for record in records:
        visits[_cell(record)] = visits.get(_cell(record), 0) + int(record["count"])
    busiest = max(visits, key=visits.__getitem__)

    end = total_steps if total_steps is not None else max(int(r["window_end"]) for r in records)
    quarter = positive_int(end // 4, "total_steps")
    mine = [r for r in records if _cell(r) == busiest]
    early = [r for r in mine if int(r["window_end"]) <= quarter]
    late = [r for r in mine if int(r["window_start"]) > end - quarter]
    shift = BinVarianceShift(busiest, _pooled_variance(early), _pooled_variance(late))
    if not (early and late):
        logger.warning(
            "Bin %s has no window wholly inside the %s quarter of %d steps",
            busiest,
            "first" if not early else "last",
            end,
        )
    logger.info("Busiest bin %s: variance %.4g early, %.4g late", busiest, shift.early, shift.late)
    return shift
