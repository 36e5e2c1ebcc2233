"""Tests for the replay buffer, trajectory labelling, SAC updates and the training loop."""

import json
from dataclasses import astuple, replace

import numpy as np
import pytest

import sasr.sac.agent as agent_module
from sasr.config import SacConfig
from sasr.density import record_states
from sasr.envs import make_env
from sasr.exceptions import ArtifactError, ConfigurationError, DimensionError, TrainingError, ValidationError
from sasr.rff import new_projector
from sasr.sac import (
    ReplayBuffer,
    Trainer,
    Trajectory,
    act,
    classify_and_commit,
    evaluate,
    load_agent,
    load_checkpoint,
    new_agent,
    policy_loss,
    segment_labels,
    select_action,
    soft_update,
    train,
    update_critics,
    update_temperature,
)
from sasr.sac.agent import ShapingSample
from sasr.sasr_types import SuccessFlag
from sasr.shaping import ShapingConfig


def _rows_array(rows):
    return np.array([astuple(row) for row in rows], dtype=np.float64)


def _filled_replay(rng, size=64, state_dim=2):
    replay = ReplayBuffer(state_dim, 1, capacity=128)
    for _ in range(size):
        replay.add(rng.normal(size=state_dim), rng.uniform(-1, 1, 1), 0.0, rng.normal(size=state_dim), False)
    return replay


@pytest.fixture
def bundle(tiny_sac):
    return new_agent(2, 1, tiny_sac, np.random.default_rng(0))


# Replay buffer


def test_replay_add_and_wrap():
    replay = ReplayBuffer(1, 1, capacity=3)
    slots = [replay.add([float(i)], [0.0], float(i), [float(i + 1)], i == 3) for i in range(4)]
    assert slots == [0, 1, 2, 0]
    assert len(replay) == 3
    assert replay.transition(0).state[0] == 3.0
    assert replay.transition(0).terminated
    assert replay.transition(1).success_flag is SuccessFlag.UNKNOWN


def test_replay_flags():
    replay = ReplayBuffer(1, 1, capacity=4)
    for i in range(3):
        replay.add([0.0], [0.0], 0.0, [0.0], False)
    replay.set_flags([0, 2], [SuccessFlag.SUCCESS, SuccessFlag.FAILURE])
    assert replay.transition(0).success_flag is SuccessFlag.SUCCESS
    assert replay.transition(1).success_flag is SuccessFlag.UNKNOWN
    assert replay.transition(2).success_flag is SuccessFlag.FAILURE


def test_replay_sample(rng):
    replay = _filled_replay(rng, size=10)
    batch = replay.sample(32, rng)
    assert len(batch) == 32
    assert batch.states.shape == (32, 2)
    assert np.all(batch.indices < 10)


def test_replay_samples_a_full_buffer_uniformly(rng):
    replay = ReplayBuffer(2, 1, capacity=8)
    for _ in range(13):
        replay.add(rng.normal(size=2), [0.0], 0.0, rng.normal(size=2), False)
    assert len(replay) == 8

    counts = np.zeros(8)
    for _ in range(100):
        counts += np.bincount(replay.sample(1000, rng).indices, minlength=8)
    expected = 100_000 / 8
    sigma = np.sqrt(100_000 * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - expected) <= 3 * sigma)


def test_replay_empty_sample_fails(rng):
    with pytest.raises(TrainingError):
        ReplayBuffer(2, 1, capacity=4).sample(8, rng)


def test_replay_unfilled_slot():
    with pytest.raises(ValidationError):
        ReplayBuffer(2, 1, capacity=4).transition(0)


def test_replay_state_round_trip(rng):
    replay = _filled_replay(rng, size=20)
    replay.set_flags([3], [SuccessFlag.SUCCESS])
    clone = ReplayBuffer(2, 1, capacity=128)
    clone.load_state_dict(replay.state_dict())
    assert clone.size == 20
    assert clone.cursor == replay.cursor
    assert np.array_equal(clone.states[:20], replay.states[:20])
    assert clone.transition(3).success_flag is SuccessFlag.SUCCESS

    with pytest.raises(ValidationError):
        ReplayBuffer(2, 1, capacity=64).load_state_dict(replay.state_dict())


# Trajectory labelling


def test_terminal_reward_labels_whole_trajectory():
    assert list(segment_labels([0, 0, 1], terminal_reward=True)) == [1, 1, 1]
    assert list(segment_labels([0, 0, 0], terminal_reward=True)) == [0, 0, 0]
    assert segment_labels([], terminal_reward=True).size == 0


def test_segments_cut_at_positive_rewards():
    rewards = [0, 1, 0, 0, 1, 0]
    assert list(segment_labels(rewards, terminal_reward=False, max_segment_steps=2)) == [1, 1, 0, 0, 0, 0]
    assert list(segment_labels(rewards, terminal_reward=False, max_segment_steps=3)) == [1, 1, 1, 1, 1, 0]
    assert list(segment_labels([0, 0, 0], terminal_reward=False, max_segment_steps=5)) == [0, 0, 0]


def test_classify_and_commit_feeds_stores_and_flags(projector, stores, rng):
    replay = ReplayBuffer(2, 1, capacity=16)
    trajectory = Trajectory()
    for t in range(5):
        state = rng.normal(size=2)
        slot = replay.add(state, [0.0], float(t == 4), state, t == 4)
        trajectory.append(state, [0.0], float(t == 4), slot)

    labels = classify_and_commit(
        trajectory, stores, projector, ShapingConfig(feature_dim=256), rng, replay=replay
    )
    assert list(labels) == [1] * 5
    assert stores.success.observed_count == 5
    assert stores.failure.observed_count == 0
    assert all(replay.transition(i).success_flag is SuccessFlag.SUCCESS for i in range(5))


def test_classify_failed_trajectory(projector, stores, rng):
    trajectory = Trajectory()
    for _ in range(4):
        trajectory.append(rng.normal(size=2), [0.0], 0.0)
    classify_and_commit(trajectory, stores, projector, ShapingConfig(feature_dim=256), rng)
    assert stores.failure.observed_count == 4
    assert stores.success.observed_count == 0


def test_state_action_queries(rng):
    trajectory = Trajectory()
    trajectory.append([1.0, 2.0], [0.5], 0.0)
    assert trajectory.queries(False).shape == (1, 2)
    assert np.array_equal(trajectory.queries(True), [[1.0, 2.0, 0.5]])


# Agent


def test_act_respects_action_bounds(tiny_sac, rng):
    agent = new_agent(2, 1, tiny_sac, rng, action_low=[0.0], action_high=[2.0])
    actions = act(agent, rng.normal(size=(50, 2)), greedy=False, rng=rng)
    assert actions.shape == (50, 1)
    assert np.all((actions >= 0.0) & (actions <= 2.0))
    assert np.all((act(agent, rng.normal(size=(5, 2)), greedy=True) >= 0.0))


def test_select_action_errors(bundle):
    with pytest.raises(ValidationError):
        select_action(bundle, [0.0, 0.0], mode="random")
    with pytest.raises(ValidationError):
        select_action(bundle, [0.0, 0.0], mode="stochastic")
    with pytest.raises(ValidationError):
        select_action(bundle, [np.nan, 0.0], mode="greedy")


def test_greedy_action_is_deterministic(bundle):
    a = select_action(bundle, [0.1, 0.2], mode="greedy")
    b = select_action(bundle, [0.1, 0.2], mode="greedy")
    assert np.array_equal(a, b)
    assert a.shape == (1,)


@pytest.mark.parametrize("seed", range(10))
def test_policy_gradient_matches_finite_differences(tiny_sac, seed):
    bundle = new_agent(2, 1, tiny_sac, np.random.default_rng(seed))
    rng = np.random.default_rng(100 + seed)
    states = rng.normal(size=(6, 2))
    noise = rng.standard_normal((6, 1))
    _, grads, _ = policy_loss(bundle, states, noise)

    eps = 1e-5
    for param, grad in zip(bundle.policy.parameters, grads, strict=True):
        flat = param.reshape(-1)
        for index in range(0, flat.size, max(1, flat.size // 5)):
            original = flat[index]
            flat[index] = original + eps
            plus, _, _ = policy_loss(bundle, states, noise)
            flat[index] = original - eps
            minus, _, _ = policy_loss(bundle, states, noise)
            flat[index] = original
            expected = (plus - minus) / (2 * eps)
            assert grad.reshape(-1)[index] == pytest.approx(expected, rel=1e-4, abs=1e-8)


def test_flat_objective_has_zero_policy_gradient(bundle):
    for critic in (bundle.q1, bundle.q2):
        for weight in critic.weights:
            weight[...] = 0.0
    bundle.log_temperature[0] = -1000.0
    rng = np.random.default_rng(6)
    _, grads, _ = policy_loss(bundle, rng.normal(size=(8, 2)), rng.standard_normal((8, 1)))
    assert all(np.allclose(grad, 0.0) for grad in grads)


def test_stochastic_actions_vary(bundle):
    rng = np.random.default_rng(3)
    draws = np.array([select_action(bundle, [0.1, 0.2], mode="stochastic", rng=rng) for _ in range(200)])
    assert np.var(draws) > 0.0

def test_zero_lambda_targets_ignore_the_stores(bundle, projector, stores, rng):
    replay = _filled_replay(rng)
    batch = replay.gather(np.arange(32))
    cfg = ShapingConfig(lambda_weight=0.0, feature_dim=256)

    def run(config):
        return update_critics(
            bundle.copy(),
            batch,
            stores,
            projector,
            config,
            np.random.default_rng(1),
            shaping_rng=np.random.default_rng(2),
        )

    empty = run(cfg)

    record_states(stores.success, rng.normal(size=(100, 2)), projector, rng)
    filled = run(cfg)
    assert np.array_equal(empty.targets, filled.targets)

    shaped_cfg = replace(cfg, lambda_weight=0.6)
    shaped = run(shaped_cfg)
    assert not np.array_equal(shaped.targets, filled.targets)


def test_critic_update_changes_only_online_critics(bundle, projector, stores, rng):
    batch = _filled_replay(rng).gather(np.arange(16))
    before = [p.copy() for p in bundle.q1.parameters]
    target_before = [p.copy() for p in bundle.q1_target.parameters]
    update = update_critics(bundle, batch, stores, projector, ShapingConfig(feature_dim=256), rng)
    assert np.isfinite(update.loss)
    assert update.shaping.rewards.shape == (16,)
    assert any(not np.array_equal(a, b) for a, b in zip(before, bundle.q1.parameters, strict=True))
    assert all(np.array_equal(a, b) for a, b in zip(target_before, bundle.q1_target.parameters, strict=True))


def test_soft_update_moves_targets_by_tau(rng):
    agent = new_agent(2, 1, SacConfig(tau=0.5, hidden_sizes=(4,)), rng)
    for param in agent.q1.parameters:
        param += 1.0
    expected = [t + 0.5 for t in agent.q1_target.parameters]
    soft_update(agent)
    assert all(np.allclose(a, b) for a, b in zip(agent.q1_target.parameters, expected, strict=True))


def test_temperature_follows_entropy(bundle, rng):
    batch = _filled_replay(rng).gather(np.arange(8))
    start = bundle.temperature
    assert update_temperature(bundle.copy(), batch, log_probs=np.full(8, 10.0)) > start
    assert update_temperature(bundle.copy(), batch, log_probs=np.full(8, -10.0)) < start
    with pytest.raises(ValidationError):
        update_temperature(bundle, batch)


# Evaluation


def test_evaluate_rejects_zero_episodes(bundle):
    with pytest.raises(ValidationError):
        evaluate(bundle, lambda seed: make_env("mountain-car", seed=seed), 0, 0)


def test_evaluate_policy_that_always_moves_right(tiny_sac):
    agent = new_agent(1, 1, tiny_sac, np.random.default_rng(0))
    agent.policy.weights[-2][...] = 0.0
    agent.policy.biases[-2][...] = 5.0
    result = evaluate(agent, lambda seed: make_env("sparse-chain", seed=seed), 4, 0)
    assert result.mean == 1.0
    assert result.stderr == 0.0
    assert result.returns == (1.0,) * 4


def test_evaluate_idle_car_never_succeeds(bundle):
    bundle.policy.weights[-2][...] = 0.0
    bundle.policy.biases[-2][...] = 0.0
    result = evaluate(bundle, lambda seed: make_env("mountain-car", seed=seed), 3, 7)
    assert result.mean == 0.0
    assert result.episodes == 3


# Training loop


def test_trainer_needs_an_environment(tiny_config):
    with pytest.raises(ValidationError):
        Trainer(replace(tiny_config, env=""), 0)


def test_tiny_run_produces_rows(tiny_config):
    trainer = Trainer(tiny_config, 0)
    rows = trainer.run()
    assert trainer.done
    assert [row.step for row in rows] == [100, 200, 300]
    assert np.isnan(rows[0].shaped_reward_mean)
    assert all(np.isfinite(row.shaped_reward_mean) for row in rows[1:])
    assert all(0.0 <= row.shaped_reward_mean <= 1.0 for row in rows[1:])
    assert rows[-1].success_store_size + rows[-1].failure_store_size > 0
    assert all(row.mean_alpha >= 1.0 and row.mean_beta >= 1.0 for row in rows[1:])


def test_runs_are_reproducible(tiny_config):
    first = train("sparse-chain", tiny_config, 3)
    second = train("sparse-chain", tiny_config, 3)
    np.testing.assert_array_equal(_rows_array(first.rows), _rows_array(second.rows))
    for a, b in zip(first.bundle.policy.parameters, second.bundle.policy.parameters, strict=True):
        assert np.array_equal(a, b)


def test_zero_lambda_matches_unshaped_run(tiny_config, monkeypatch):
    config = replace(tiny_config, shaping=replace(tiny_config.shaping, lambda_weight=0.0))
    shaped_off = train("sparse-chain", config, 1)

    def no_shaping(batch, stores, projector, cfg, rng):
        ones = np.ones(len(batch))
        return ShapingSample(rewards=np.zeros(len(batch)), alpha=ones, beta=ones)

    monkeypatch.setattr(agent_module, "shaping_rewards", no_shaping)
    unshaped = train("sparse-chain", config, 1)

    assert [r.eval_mean_return for r in shaped_off.rows] == [r.eval_mean_return for r in unshaped.rows]
    for a, b in zip(shaped_off.bundle.policy.parameters, unshaped.bundle.policy.parameters, strict=True):
        assert np.array_equal(a, b)
    for a, b in zip(shaped_off.bundle.q1.parameters, unshaped.bundle.q1.parameters, strict=True):
        assert np.array_equal(a, b)


def test_resume_matches_uninterrupted_run(tiny_config, tmp_path):
    whole = Trainer(tiny_config, 2)
    whole.run()

    first_half = Trainer(tiny_config, 2)
    first_half.run(until=150)
    first_half.save_checkpoint(tmp_path / "ckpt")
    resumed = Trainer.from_checkpoint(tmp_path / "ckpt")
    assert resumed.step == 150
    resumed.run()

    np.testing.assert_array_equal(_rows_array(resumed.rows), _rows_array(whole.rows))
    for name in ("policy", "q1", "q2", "q1_target", "q2_target"):
        for a, b in zip(
            getattr(resumed.bundle, name).parameters, getattr(whole.bundle, name).parameters, strict=True
        ):
            assert np.array_equal(a, b)
    assert resumed.episodes == whole.episodes
    assert np.array_equal(resumed.stores.failure.feature_sum, whole.stores.failure.feature_sum)


def test_checkpoint_files(tiny_config, tmp_path):
    trainer = Trainer(tiny_config, 0)
    trainer.run(until=120)
    target = trainer.save_checkpoint(tmp_path / "ckpt")
    names = {path.name for path in target.iterdir()}
    assert {"meta.json", "policy.bin", "optim.npz", "stores.npz", "replay.npz", "running.npz"} <= names
    meta = json.loads((target / "meta.json").read_text())
    assert meta["step"] == 120
    assert "env = sparse-chain" in meta["config"].splitlines()


def test_load_agent(tiny_config, tmp_path):
    trainer = Trainer(tiny_config, 0)
    trainer.run(until=150)
    trainer.save_checkpoint(tmp_path / "ckpt")
    agent, config = load_agent(tmp_path / "ckpt")
    assert config.env == "sparse-chain"
    assert config.total_steps == 300
    for a, b in zip(agent.policy.parameters, trainer.bundle.policy.parameters, strict=True):
        assert np.array_equal(a, b)


def test_bad_checkpoints(tmp_path):
    with pytest.raises(ArtifactError):
        load_checkpoint(tmp_path / "missing")

    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "meta.json").write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(ArtifactError):
        load_agent(broken)


def test_checkpoint_with_missing_network(tiny_config, tmp_path):
    trainer = Trainer(tiny_config, 0)
    trainer.run(until=110)
    target = trainer.save_checkpoint(tmp_path / "ckpt")
    (target / "q2.bin").unlink()
    with pytest.raises(ArtifactError):
        load_checkpoint(target)


def test_bandwidth_schedule_rescales_projector(tiny_config, caplog):
    shaping = replace(tiny_config.shaping, bandwidth=0.5, bandwidth_end=0.1)
    config = replace(tiny_config, total_steps=20_000, shaping=shaping, eval_interval=20_000)
    trainer = Trainer(config, 0)
    assert trainer.stores.success.keep_raw
    assert "Bandwidth schedule 0.5->0.1 needs the raw states" in caplog.text
    assert trainer.schedule.changes_at(10_000)
    trainer.step = 10_000
    trainer._rescale()
    assert trainer.projector.bandwidth == pytest.approx(0.3)


def test_constant_bandwidth_keeps_no_raw_states(tiny_config, caplog):
    trainer = Trainer(tiny_config, 0)
    assert not trainer.stores.success.keep_raw
    assert "needs the raw states" not in caplog.text


def test_sac_config_validation():
    with pytest.raises(ConfigurationError) as exc_info:
        SacConfig(batch_size=0)
    assert exc_info.value.key == "batch_size"


def test_critic_update_needs_a_batch(bundle, projector, stores, rng):
    empty = _filled_replay(rng).gather(np.array([], dtype=np.int64))
    with pytest.raises(TrainingError):
        update_critics(bundle, empty, stores, projector, ShapingConfig(feature_dim=256), rng)


def test_projector_must_match_query_width(bundle, stores, rng):
    batch = _filled_replay(rng).gather(np.arange(4))
    with pytest.raises(DimensionError):
        update_critics(bundle, batch, stores, new_projector(3, 256, 0.2), ShapingConfig(feature_dim=256), rng)
