"""
SparseChain: a one-dimensional corridor with a single rewarding end.

Not part of the published benchmark set; it exists so the whole training loop
can be exercised in seconds. The agent starts at index 0, the sign of its
action moves it one cell left or right, and reaching index ``length`` ends the
episode with reward 1.
"""

import numpy as np

from sasr.envs.base import SparseEnv
from sasr.exceptions import ValidationError
from sasr.sasr_types import FloatArray


class SparseChain(SparseEnv):
    name = "sparse-chain"
    state_dim = 1
    action_dim = 1
    max_episode_steps = 200
    terminal_reward = True

    def __init__(
        self, seed: int | None = None, length: int = 20, max_episode_steps: int | None = None
    ) -> None:
        super().__init__(seed)
        if length < 1:
            raise ValidationError("SparseChain length must be at least 1", reason=f"got {length}")
        self.length = length
        if max_episode_steps is not None:
            self.max_episode_steps = max_episode_steps
        self.index = 0

    @property
    def state_low(self) -> FloatArray:
        return np.zeros(1)

    @property
    def state_high(self) -> FloatArray:
        return np.array([float(self.length)])

    def _reset_state(self) -> FloatArray:
        self.index = 0
        return np.array([0.0])

    def _advance(self, action: FloatArray) -> tuple[FloatArray, float, bool]:
        move = 1 if action[0] >= 0 else -1
        self.index = min(max(self.index + move, 0), self.length)
        reached = self.index == self.length
        return np.array([float(self.index)]), 1.0 if reached else 0.0, reached

    def _state_values(self) -> list[float]:
        return [float(self.index)]

    def _restore_values(self, values: list[float]) -> None:
        self.index = int(values[0])
