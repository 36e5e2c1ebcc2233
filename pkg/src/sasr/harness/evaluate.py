"""Greedy evaluation of a saved checkpoint."""

import logging
from functools import partial
from pathlib import Path

from sasr.envs import make_env
from sasr.exceptions import ValidationError
from sasr.harness.records import write_csv
from sasr.sac import evaluate, load_agent
from sasr.sasr_types import EvalResult

logger = logging.getLogger("sasr.harness")

EVAL_CSV_HEADER = "# sasr-eval-csv v1"
DEFAULT_EPISODES = 100


def evaluate_checkpoint(directory: str | Path, episodes: int = DEFAULT_EPISODES, seed: int = 0) -> EvalResult:
    if episodes < 1:
        raise ValidationError("episodes must be a positive integer", reason=f"got {episodes!r}")
    bundle, config = load_agent(directory)
    result = evaluate(bundle, partial(make_env, config.env), episodes, seed)
    logger.info(
        "Checkpoint %s on %s: %.3f +- %.3f over %d episodes",
        directory,
        config.env,
        result.mean,
        result.stderr,
        episodes,
    )
    return result


def write_eval_csv(path: str | Path, result: EvalResult) -> Path:
    return write_csv(
        path,
        EVAL_CSV_HEADER,
        ("episodes", "mean_return", "stderr"),
        [(result.episodes, result.mean, result.stderr)],
    )
