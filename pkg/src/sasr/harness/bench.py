"""
Time and space cost of count estimation.

The per-pair path evaluates every (query, stored state) inner product and
should scale linearly in both the store size D and the batch size B. The
cached path uses the running feature sum and should not depend on D at all.
The exact path sums the true kernel over the raw retained states, which is
what the feature map replaces.
"""

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from sasr.density import (
    LabeledStateStore,
    brute_force_count,
    estimate_count,
    estimate_count_per_pair,
    record_states,
)
from sasr.exceptions import ValidationError
from sasr.harness.records import write_csv
from sasr.rff import RffProjector, new_projector, project
from sasr.sasr_types import Outcome
from sasr.validation import positive_int

logger = logging.getLogger("sasr.harness")

BENCH_CSV_HEADER = "# sasr-bench-csv v1"
SLOPE_CSV_HEADER = "# sasr-bench-slope-csv v2"
SPACE_CSV_HEADER = "# sasr-bench-space-csv v1"
PATHS = ("per-pair", "cached", "exact")
STATE_DIM = 2
BANDWIDTH = 0.2


@dataclass(frozen=True)
class BenchRow:
    path: str
    buffer_size: int
    batch_size: int
    feature_dim: int
    seconds: float


@dataclass(frozen=True)
class SlopeRow:
    """Fitted exponent of time against one grid axis, the other two held fixed."""

    path: str
    axis: str
    buffer_size: int | None
    batch_size: int | None
    feature_dim: int
    slope: float


@dataclass(frozen=True)
class SpaceRow:
    buffer_size: int
    feature_dim: int
    store_bytes: int
    raw_state_bytes: int


def _filled_store(
    size: int, feature_dim: int, rng: np.random.Generator, *, keep_raw: bool = False
) -> tuple[LabeledStateStore, RffProjector]:
    projector = new_projector(STATE_DIM, feature_dim, BANDWIDTH, seed=int(rng.integers(0, 2**31)))
    store = LabeledStateStore(Outcome.SUCCESS, feature_dim, 1.0, keep_raw=keep_raw)
    record_states(store, rng.uniform(-1.0, 1.0, (size, STATE_DIM)), projector, rng)
    return store, projector


def _best_time(fn: Callable[[], object], repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_bench(
    buffer_sizes: Sequence[int],
    batch_sizes: Sequence[int],
    feature_dims: Sequence[int],
    repeats: int = 3,
    seed: int = 0,
    paths: Sequence[str] = PATHS,
) -> list[BenchRow]:
    """Best-of-``repeats`` wall time of each count path over the full grid.

    The exact path does not depend on M, so it is timed once per (D, B) under the
    first feature dimension.
    """
    sizes = [positive_int(d, "buffer_size") for d in buffer_sizes]
    batches = [positive_int(b, "batch_size") for b in batch_sizes]
    dims = [positive_int(m, "feature_dim") for m in feature_dims]
    repeats = positive_int(repeats, "repeats")
    unknown = sorted(set(paths) - set(PATHS))
    if unknown:
        raise ValidationError(f"Unknown bench paths {unknown}", reason=f"choose from {PATHS}")
    rng = np.random.default_rng(seed)

    rows = []
    for dim_index, feature_dim in enumerate(dims):
        time_exact = dim_index == 0 and "exact" in paths
        for size in sizes:
            store, projector = _filled_store(size, feature_dim, rng, keep_raw=time_exact)
            for batch in batches:
                raw_queries = rng.uniform(-1.0, 1.0, (batch, STATE_DIM))
                queries = project(projector, raw_queries)
                estimate_count(store, queries)
                timed: dict[str, Callable[[], object]] = {
                    "per-pair": partial(estimate_count_per_pair, store, queries),
                    "cached": partial(estimate_count, store, queries),
                }
                if time_exact:
                    timed["exact"] = partial(
                        brute_force_count,
                        store.retained_states,
                        raw_queries,
                        store.observed_count,
                        BANDWIDTH,
                    )
                for path in (p for p in PATHS if p in paths and p in timed):
                    seconds = _best_time(timed[path], repeats)
                    rows.append(BenchRow(path, size, batch, feature_dim, seconds))
                    logger.info(
                        "bench %s D=%d B=%d M=%d: %.3gs", path, size, batch, feature_dim, seconds
                    )
    return rows


def _fit_slope(xs: Sequence[int], rows: Sequence[BenchRow]) -> float:
    slope, _ = np.polyfit(np.log(xs), np.log([max(r.seconds, 1e-9) for r in rows]), 1)
    return float(slope)


def scaling_slopes(rows: Sequence[BenchRow], axis: str = "buffer") -> dict[tuple[str, int, int], float]:
    """Slope of log(time) against log(D) per (path, B, M), or against log(B) per (path, D, M).

    Only groups with at least two distinct values on the fitted axis get a slope.
    """
    if axis not in ("buffer", "batch"):
        raise ValidationError("axis must be 'buffer' or 'batch'", reason=f"got {axis!r}")
    groups: dict[tuple[str, int, int], list[BenchRow]] = {}
    for row in rows:
        fixed = row.batch_size if axis == "buffer" else row.buffer_size
        groups.setdefault((row.path, fixed, row.feature_dim), []).append(row)
    slopes = {}
    for key, group in groups.items():
        xs = [r.buffer_size if axis == "buffer" else r.batch_size for r in group]
        if len(set(xs)) >= 2:
            slopes[key] = _fit_slope(xs, group)
    return slopes


def slope_table(rows: Sequence[BenchRow]) -> list[SlopeRow]:
    table = [
        SlopeRow(path, "buffer", None, batch, m, slope)
        for (path, batch, m), slope in sorted(scaling_slopes(rows, "buffer").items())
    ]
    table += [
        SlopeRow(path, "batch", size, None, m, slope)
        for (path, size, m), slope in sorted(scaling_slopes(rows, "batch").items())
    ]
    return table


def space_table(buffer_sizes: Sequence[int], feature_dims: Sequence[int], seed: int = 0) -> list[SpaceRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for feature_dim in (positive_int(m, "feature_dim") for m in feature_dims):
        for size in (positive_int(d, "buffer_size") for d in buffer_sizes):
            store, _ = _filled_store(size, feature_dim, rng)
            rows.append(SpaceRow(size, feature_dim, store.nbytes, size * STATE_DIM * 8))
    return rows


def write_bench_csv(
    directory: str | Path,
    rows: Sequence[BenchRow],
    space: Sequence[SpaceRow] = (),
) -> list[Path]:
    target = Path(directory)
    written = [
        write_csv(
            target / "bench.csv",
            BENCH_CSV_HEADER,
            ("path", "buffer_size", "batch_size", "feature_dim", "seconds"),
            ((r.path, r.buffer_size, r.batch_size, r.feature_dim, r.seconds) for r in rows),
        ),
        write_csv(
            target / "bench_slopes.csv",
            SLOPE_CSV_HEADER,
            ("path", "axis", "buffer_size", "batch_size", "feature_dim", "log_log_slope"),
            (
                (s.path, s.axis, s.buffer_size, s.batch_size, s.feature_dim, s.slope)
                for s in slope_table(rows)
            ),
        ),
    ]
    if space:
        written.append(
            write_csv(
                target / "bench_space.csv",
                SPACE_CSV_HEADER,
                ("buffer_size", "feature_dim", "store_bytes", "raw_state_bytes"),
                ((r.buffer_size, r.feature_dim, r.store_bytes, r.raw_state_bytes) for r in space),
            )
        )
    return written
