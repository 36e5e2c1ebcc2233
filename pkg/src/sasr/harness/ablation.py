"""
Ablation sweeps.

Each study is a list of cells; a cell is a label plus config overrides. A
sweep runs every seed of every cell on every environment and reports the
mean and standard error of the final evaluation return over seeds, plus the
seed mean of the area under each learning curve. Cells that all end at the
same return still separate on the area.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from sasr.config import RunConfig, with_overrides
from sasr.exceptions import ConfigurationError
from sasr.harness.records import write_csv
from sasr.harness.runs import run_seeds

logger = logging.getLogger("sasr.harness")

ABLATION_CSV_HEADER = "# sasr-ablation-csv v2"
ABLATION_COLUMNS = ("study", "env", "setting", "mean_return", "stderr", "mean_curve_area", "seeds")


@dataclass(frozen=True)
class AblationCell:
    setting: str
    overrides: dict[str, Any]


@dataclass(frozen=True)
class AblationRow:
    study: str
    env: str
    setting: str
    mean_return: float
    stderr: float
    mean_curve_area: float
    seeds: int


STUDIES: dict[str, tuple[AblationCell, ...]] = {
    "beta-sampling": (
        AblationCell("sampling", {"beta_sampling": True}),
        AblationCell("no-sampling", {"beta_sampling": False}),
    ),
    "state-action": (
        AblationCell("state", {"state_action_features": False}),
        AblationCell("state-action", {"state_action_features": True}),
    ),
    "retention": tuple(AblationCell(f"phi={phi:g}", {"phi": phi}) for phi in (1.0, 0.1, 0.01)),
    "rff-dim": tuple(AblationCell(f"M={m}", {"rff_dim": m}) for m in (50, 500, 1000, 2000)),
    "lambda": tuple(
        AblationCell(f"lambda={weight:g}", {"lambda": weight}) for weight in (0.2, 0.4, 0.6, 0.8, 1.0)
    ),
    "bandwidth": (
        *(AblationCell(f"h={h:g}", {"bandwidth": h, "bandwidth_end": None}) for h in (0.01, 0.1, 0.2, 1.0)),
        AblationCell("h=0.5->0.1", {"bandwidth": 0.5, "bandwidth_end": 0.1}),
    ),
}


def study_cells(study: str) -> tuple[AblationCell, ...]:
    try:
        return STUDIES[study]
    except KeyError:
        raise ConfigurationError(
            f"Unknown ablation study {study!r}", reason=f"choose one of {sorted(STUDIES)}", key="study"
        ) from None


def run_ablation(study: str, config: RunConfig, envs: Sequence[str]) -> list[AblationRow]:
    cells = study_cells(study)
    rows = []
    for env in envs:
        for cell in cells:
            cell_config = with_overrides(config, **cell.overrides)
            out_dir = Path(config.out_dir) / "ablate" / study / cell.setting.replace(">", "")
            cell_config = replace(cell_config, env=env, out_dir=str(out_dir))
            logger.info("Ablation %s: %s on %s", study, cell.setting, env)
            records = run_seeds(cell_config)
            finals = np.array([record.final_return for record in records])
            stderr = float(np.std(finals, ddof=1) / np.sqrt(finals.size)) if finals.size > 1 else 0.0
            rows.append(
                AblationRow(
                    study=study,
                    env=env,
                    setting=cell.setting,
                    mean_return=float(finals.mean()),
                    stderr=stderr,
                    mean_curve_area=float(np.mean([record.curve_area for record in records])),
                    seeds=int(finals.size),
                )
            )
    return rows


def write_ablation_csv(path: str | Path, rows: Sequence[AblationRow]) -> Path:
    return write_csv(
        path,
        ABLATION_CSV_HEADER,
        ABLATION_COLUMNS,
        ((r.study, r.env, r.setting, r.mean_return, r.stderr, r.mean_curve_area, r.seeds) for r in rows),
    )
