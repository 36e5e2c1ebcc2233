"""
Continuous MountainCar with a sparse success reward.

Dynamics follow the classic-control constants; the only reward is 1 when the
car reaches the flag, and episodes are truncated after 1000 steps.
"""

import math

import numpy as np

from sasr.envs.base import SparseEnv
from sasr.sasr_types import FloatArray


class MountainCar(SparseEnv):
    name = "mountain-car"
    state_dim = 2
    action_dim = 1
    max_episode_steps = 1000
    terminal_reward = True

    MIN_POSITION = -1.2
    MAX_POSITION = 0.6
    MAX_SPEED = 0.07
    GOAL_POSITION = 0.45
    POWER = 0.0015
    GRAVITY = 0.0025

    def __init__(self, seed: int | None = None, max_episode_steps: int | None = None) -> None:
        super().__init__(seed)
        if max_episode_steps is not None:
            self.max_episode_steps = max_episode_steps
        self.position = -0.5
        self.velocity = 0.0

    @property
    def state_low(self) -> FloatArray:
        return np.array([self.MIN_POSITION, -self.MAX_SPEED])

    @property
    def state_high(self) -> FloatArray:
        return np.array([self.MAX_POSITION, self.MAX_SPEED])

    def _observation(self) -> FloatArray:
        return np.array([self.position, self.velocity])

    def _reset_state(self) -> FloatArray:
        self.position = float(self._rng.uniform(-0.6, -0.4))
        self.velocity = 0.0
        return self._observation()

    def _advance(self, action: FloatArray) -> tuple[FloatArray, float, bool]:
        force = float(action[0])
        velocity = self.velocity + force * self.POWER - self.GRAVITY * math.cos(3 * self.position)
        velocity = min(max(velocity, -self.MAX_SPEED), self.MAX_SPEED)
        position = min(max(self.position + velocity, self.MIN_POSITION), self.MAX_POSITION)
        if position == self.MIN_POSITION and velocity < 0:
            velocity = 0.0
        self.position, self.velocity = position, velocity

        reached = position >= self.GOAL_POSITION
        return self._observation(), 1.0 if reached else 0.0, reached

    def place(self, position: float, velocity: float) -> FloatArray:
        """Put the car at an arbitrary point of the state space."""
        self.position = min(max(float(position), self.MIN_POSITION), self.MAX_POSITION)
        self.velocity = min(max(float(velocity), -self.MAX_SPEED), self.MAX_SPEED)
        return self._observation()

    def _state_values(self) -> list[float]:
        return [self.position, self.velocity]

    def _restore_values(self, values: list[float]) -> None:
        self.position, self.velocity = float(values[0]), float(values[1])
