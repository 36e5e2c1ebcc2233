"""Run one seed, or a sweep of seeds in worker processes."""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from sasr.config import RunConfig
from sasr.exceptions import SasrError, TrainingError
from sasr.harness.records import RunRecord, write_train_csv
from sasr.sac import Trainer

logger = logging.getLogger("sasr.harness")


def run_dir_for(config: RunConfig, seed: int) -> Path:
    return Path(config.out_dir) / config.env / f"seed-{seed}"


def run_seed(config: RunConfig, seed: int) -> RunRecord:
    """Train one seed and write its CSV, visit log, reward bins and checkpoint."""
    target = run_dir_for(config, seed)
    target.mkdir(parents=True, exist_ok=True)
    try:
        trainer = Trainer(config, seed)
        trainer.run()
        if not trainer.rows or trainer.rows[-1].step != trainer.step:
            trainer.evaluate_now()
    except SasrError:
        logger.error("Run %s seed=%d failed", config.env, seed)
        raise

    record = RunRecord(env=config.env, seed=seed, rows=tuple(trainer.rows), run_dir=target)
    write_train_csv(record.train_csv, trainer.rows)
    trainer.reward_bins.save(record.reward_bins_path)
    if trainer.visits is not None:
        trainer.visits.save(record.visits_path)
    trainer.save_checkpoint(record.checkpoint_dir)
    logger.info(
        "Run %s seed=%d final return %.3f -> %s", config.env, seed, record.final_return, target
    )
    return record


def run_seeds(config: RunConfig) -> list[RunRecord]:
    """One run per seed; every run is attempted before failures are reported."""
    records: dict[int, RunRecord] = {}
    failures: dict[int, str] = {}
    if config.workers == 1 or len(config.seeds) == 1:
        for seed in config.seeds:
            try:
                records[seed] = run_seed(config, seed)
            except SasrError as e:
                failures[seed] = str(e)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {seed: pool.submit(run_seed, config, seed) for seed in config.seeds}
            for seed, future in futures.items():
                try:
                    records[seed] = future.result()
                except SasrError as e:
                    failures[seed] = str(e)

    if failures:
        raise TrainingError(
            f"{len(failures)} of {len(config.seeds)} runs failed",
            reason="; ".join(f"seed {seed}: {message}" for seed, message in sorted(failures.items())),
            details={"failed_seeds": sorted(failures)},
        )
    return [records[seed] for seed in config.seeds]
