"""
CSV records written by the harness.

Every file starts with a versioned ``# sasr-<kind>-csv vN`` comment line followed by a
header row. Floats are written with ``repr`` so identical runs give
byte-identical files.
"""

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from sasr.exceptions import ArtifactError, ValidationError
from sasr.sac import EvalRow

TRAIN_CSV_HEADER = "# sasr-train-csv v1"
TRAIN_COLUMNS = tuple(f.name for f in fields(EvalRow))


@dataclass(frozen=True)
class RunRecord:
    """Outputs of one training run."""

    env: str
    seed: int
    rows: tuple[EvalRow, ...]
    run_dir: Path

    @property
    def train_csv(self) -> Path:
        return self.run_dir / "train.csv"

    @property
    def checkpoint_dir(self) -> Path:
        return self.run_dir / "checkpoint"

    @property
    def visits_path(self) -> Path:
        return self.run_dir / "visits.npy"

    @property
    def reward_bins_path(self) -> Path:
        return self.run_dir / "reward_bins.csv"

    @property
    def final_return(self) -> float:
        if not self.rows:
            raise ValidationError(f"Run {self.env} seed={self.seed} has no evaluation rows")
        return self.rows[-1].eval_mean_return

    @property
    def curve_area(self) -> float:
        """Mean evaluation return over every row: the area under the learning curve per interval."""
        if not self.rows:
            raise ValidationError(f"Run {self.env} seed={self.seed} has no evaluation rows")
        return float(sum(row.eval_mean_return for row in self.rows) / len(self.rows))


def format_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def write_csv(
    path: str | Path, header: str, columns: Sequence[str], rows: Iterable[Sequence[object]]
) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="") as handle:
        handle.write(header + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return target


def read_csv(path: str | Path, header: str) -> list[dict[str, str]]:
    source = Path(path)
    try:
        lines = source.read_text().splitlines()
    except OSError as e:
        raise ArtifactError(f"Cannot read {source}", reason=str(e)) from e
    if not lines or lines[0] != header:
        raise ArtifactError(f"{source} is not a {header.lstrip('# ')} file")
    return list(csv.DictReader(lines[1:]))


def write_train_csv(path: str | Path, rows: Sequence[EvalRow]) -> Path:
    steps = [row.step for row in rows]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValidationError("Training rows must be strictly increasing in step")
    return write_csv(path, TRAIN_CSV_HEADER, TRAIN_COLUMNS, (astuple(row) for row in rows))


def read_train_csv(path: str | Path) -> list[EvalRow]:
    rows = []
    for raw in read_csv(path, TRAIN_CSV_HEADER):
        try:
            rows.append(
                EvalRow(
                    step=int(raw["step"]),
                    eval_mean_return=float(raw["eval_mean_return"]),
                    eval_stderr=float(raw["eval_stderr"]),
                    shaped_reward_mean=float(raw["shaped_reward_mean"]),
                    shaped_reward_var=float(raw["shaped_reward_var"]),
                    mean_alpha=float(raw["mean_alpha"]),
                    mean_beta=float(raw["mean_beta"]),
                    success_store_size=int(raw["success_store_size"]),
                    failure_store_size=int(raw["failure_store_size"]),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ArtifactError(f"Malformed training row in {path}", reason=str(e)) from e
    return rows
