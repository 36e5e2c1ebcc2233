"""Tests for the sparse-reward environments."""

import numpy as np
import pytest

from sasr.envs import ENVIRONMENTS, MountainCar, SparseChain, make_env
from sasr.exceptions import ConfigurationError, ValidationError


def test_registry():
    assert set(ENVIRONMENTS) == {"mountain-car", "sparse-chain"}
    assert isinstance(make_env("mountain-car", seed=0), MountainCar)
    assert make_env("sparse-chain", seed=0, length=5).length == 5


def test_unknown_environment_names_the_key():
    with pytest.raises(ConfigurationError) as exc_info:
        make_env("cartpole")
    assert exc_info.value.key == "env"


def test_mountain_car_reset_range():
    env = MountainCar(seed=3)
    for _ in range(50):
        position, velocity = env.reset()
        assert -0.6 <= position <= -0.4
        assert velocity == 0.0


def test_mountain_car_reset_is_seeded():
    assert np.array_equal(MountainCar(seed=5).reset(), MountainCar(seed=5).reset())
    env = MountainCar(seed=1)
    assert np.array_equal(env.reset(seed=9), MountainCar().reset(seed=9))


def test_mountain_car_reaches_goal():
    env = MountainCar(seed=0)
    env.reset()
    env.place(0.44, 0.07)
    result = env.step([1.0])
    assert result.terminated
    assert not result.truncated
    assert result.reward == 1.0
    assert result.next_state[0] >= MountainCar.GOAL_POSITION


def test_mountain_car_left_wall_stops_the_car():
    env = MountainCar(seed=0)
    env.reset()
    env.place(-1.2, -0.07)
    result = env.step([-1.0])
    assert result.next_state[0] == MountainCar.MIN_POSITION
    assert result.next_state[1] == 0.0
    assert result.reward == 0.0


def test_mountain_car_truncates():
    env = MountainCar(seed=0, max_episode_steps=5)
    env.reset()
    results = [env.step([0.0]) for _ in range(5)]
    assert [r.truncated for r in results] == [False] * 4 + [True]
    assert not any(r.terminated for r in results)
    assert all(r.reward == 0.0 for r in results)


def test_mountain_car_clips_actions():
    env = MountainCar(seed=0)
    env.reset()
    snapshot = env.get_state()
    wild = env.step([5.0])
    env.set_state(snapshot)
    assert np.array_equal(wild.next_state, env.step([1.0]).next_state)


def test_mountain_car_state_round_trip():
    env = MountainCar(seed=2)
    env.reset()
    for _ in range(10):
        env.step([0.5])
    snapshot = env.get_state()
    expected = [env.step([-0.3]).next_state for _ in range(5)]

    other = MountainCar(seed=99)
    other.set_state(snapshot)
    assert all(np.array_equal(a, other.step([-0.3]).next_state) for a in expected)
    assert np.array_equal(env.reset(), other.reset())


def test_mountain_car_bounds():
    env = MountainCar()
    assert np.allclose(env.state_low, [-1.2, -0.07])
    assert np.allclose(env.state_high, [0.6, 0.07])
    assert env.max_segment_steps == env.max_episode_steps == 1000


def test_sparse_chain_reaches_goal():
    env = SparseChain(seed=0, length=3)
    assert np.array_equal(env.reset(), [0.0])
    results = [env.step([0.2]) for _ in range(3)]
    assert [r.reward for r in results] == [0.0, 0.0, 1.0]
    assert results[-1].terminated
    assert results[-1].next_state[0] == 3.0


def test_sparse_chain_left_wall():
    env = SparseChain(seed=0, length=4)
    env.reset()
    result = env.step([-1.0])
    assert result.next_state[0] == 0.0
    assert result.reward == 0.0


def test_sparse_chain_zero_action_moves_right():
    env = SparseChain(length=4)
    env.reset()
    assert env.step([0.0]).next_state[0] == 1.0


def test_sparse_chain_truncates():
    env = SparseChain(length=10, max_episode_steps=3)
    env.reset()
    results = [env.step([-1.0]) for _ in range(3)]
    assert results[-1].truncated
    assert not results[-1].terminated


def test_sparse_chain_rejects_empty_corridor():
    with pytest.raises(ValidationError):
        SparseChain(length=0)
