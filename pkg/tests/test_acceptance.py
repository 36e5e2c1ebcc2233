"""End-to-end acceptance checks: learning, self-adaptation, scaling and ablation orderings.

Every test here is marked ``slow``; set SASR_RUN_SLOW=1 to run them.
"""

import numpy as np
import pytest

from sasr.config import RunConfig, with_overrides
from sasr.harness import (
    busiest_bin_variance,
    run_ablation,
    run_bench,
    run_density,
    run_seeds,
    scaling_slopes,
)
from sasr.rff import new_projector, project

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture(scope="module")
def mountain_car_runs(tmp_path_factory):
    config = RunConfig(
        env="mountain-car",
        seeds=SEEDS,
        workers=len(SEEDS),
        out_dir=str(tmp_path_factory.mktemp("sasr")),
    )
    return run_seeds(config)


@pytest.fixture(scope="module")
def unshaped_runs(tmp_path_factory):
    config = RunConfig(env="mountain-car", seeds=SEEDS, workers=len(SEEDS))
    config = with_overrides(config, **{"lambda": 0.0, "out": str(tmp_path_factory.mktemp("sac"))})
    return run_seeds(config)


def _best_return(record):
    return max(row.eval_mean_return for row in record.rows)


def test_sparse_chain_is_solved(tmp_path):
    config = RunConfig(
        env="sparse-chain", total_steps=50_000, seeds=SEEDS, workers=len(SEEDS), out_dir=str(tmp_path)
    )
    assert all(record.final_return >= 0.9 for record in run_seeds(config))


def test_mountain_car_is_solved_with_shaping(mountain_car_runs):
    assert sum(_best_return(record) >= 0.9 for record in mountain_car_runs) >= 4


def test_mountain_car_stays_unsolved_without_shaping(unshaped_runs):
    assert sum(_best_return(record) <= 0.2 for record in unshaped_runs) >= 4


def test_shaped_reward_variance_shrinks_in_the_busiest_bin(mountain_car_runs):
    shifts = [busiest_bin_variance(r.reward_bins_path, r.rows[-1].step) for r in mountain_car_runs]
    assert sum(shift.shrank for shift in shifts) >= 4


def test_state_coverage_expands(mountain_car_runs):
    for record in mountain_car_runs:
        windows = run_density(record.run_dir, "mountain-car", bins=20)
        assert windows[-1].coverage >= windows[0].coverage


def test_rff_fidelity_at_default_bandwidth():
    rng = np.random.default_rng(0)
    projector = new_projector(2, 1000, 0.2, seed=0)
    left = rng.uniform(-0.1, 0.1, (1000, 2))
    right = rng.uniform(-0.1, 0.1, (1000, 2))
    approx = np.sum(project(projector, left) * project(projector, right), axis=1)
    exact = np.exp(-0.5 * np.sum(((left - right) / 0.2) ** 2, axis=1))
    assert np.max(np.abs(approx - exact)) <= 0.1


def test_per_pair_path_scales_linearly():
    sizes = [256, 1024, 4096]
    rows = run_bench(sizes, sizes, [1000], repeats=3, paths=("per-pair",))
    slopes = [*scaling_slopes(rows, "buffer").values(), *scaling_slopes(rows, "batch").values()]
    assert len(slopes) == 6
    assert all(slope == pytest.approx(1.0, abs=0.25) for slope in slopes)


def test_doubling_the_store():
    rows = run_bench([2048, 4096], [1024], [1000], repeats=5)
    times = {(r.path, r.buffer_size): r.seconds for r in rows}
    assert 1.5 <= times[("per-pair", 4096)] / times[("per-pair", 2048)] <= 2.5
    assert 0.8 <= times[("cached", 4096)] / times[("cached", 2048)] <= 1.25


def test_cached_features_beat_the_exact_kernel():
    rows = run_bench([4096], [1024], [1000], repeats=3)
    times = {r.path: r.seconds for r in rows}
    assert times["exact"] > 10 * times["cached"]


def _curve_areas(study, tmp_path):
    """Seed-mean learning-curve area per setting; final returns saturate at desk scale."""
    config = RunConfig(env="mountain-car", seeds=SEEDS, workers=len(SEEDS), out_dir=str(tmp_path))
    return {row.setting: row.mean_curve_area for row in run_ablation(study, config, ["mountain-car"])}


def test_beta_sampling_beats_the_plain_ratio(tmp_path):
    areas = _curve_areas("beta-sampling", tmp_path)
    assert areas["sampling"] > areas["no-sampling"]


def test_partial_retention_beats_keeping_everything(tmp_path):
    areas = _curve_areas("retention", tmp_path)
    assert areas["phi=0.1"] > areas["phi=1"]


def test_more_features_beat_fewer(tmp_path):
    areas = _curve_areas("rff-dim", tmp_path)
    assert areas["M=1000"] > areas["M=50"]
