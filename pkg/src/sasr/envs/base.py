"""Common contract for the sparse-reward environments."""

import logging
from abc import ABC, abstractmethod
from typing import Any

import numpy as np
import numpy.typing as npt

from sasr.sasr_types import FloatArray, StepResult

logger = logging.getLogger("sasr.envs")


class SparseEnv(ABC):
    """Seedable single-owner environment with rewards in {0, 1}.

    ``terminal_reward`` tells the trajectory classifier whether the reward
    marks task completion (whole trajectory labelled at once) or whether the
    trajectory must be segmented at positive rewards within
    ``max_segment_steps``.
    """

    name: str = ""
    state_dim: int = 1
    action_dim: int = 1
    max_episode_steps: int = 1
    terminal_reward: bool = True

    def __init__(self, seed: int | None = None) -> None:
        self._rng = np.random.default_rng(seed)
        self._elapsed = 0

    @property
    def max_segment_steps(self) -> int:
        return self.max_episode_steps

    @property
    def action_low(self) -> FloatArray:
        return -np.ones(self.action_dim)

    @property
    def action_high(self) -> FloatArray:
        return np.ones(self.action_dim)

    @property
    @abstractmethod
    def state_low(self) -> FloatArray: ...

    @property
    @abstractmethod
    def state_high(self) -> FloatArray: ...

    def reset(self, seed: int | None = None) -> FloatArray:
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        self._elapsed = 0
        return self._reset_state()

    def step(self, action: npt.ArrayLike) -> StepResult:
        raw = np.asarray(action, dtype=np.float64).reshape(self.action_dim)
        clipped = np.clip(np.nan_to_num(raw, nan=0.0), self.action_low, self.action_high)
        if not np.array_equal(clipped, raw):
            logger.debug("%s: action %s clipped to %s", self.name, raw, clipped)

        self._elapsed += 1
        next_state, reward, terminated = self._advance(clipped)
        truncated = not terminated and self._elapsed >= self.max_episode_steps
        return StepResult(
            next_state=next_state, reward=reward, terminated=terminated, truncated=truncated
        )

    def get_state(self) -> dict[str, Any]:
        return {
            "elapsed": self._elapsed,
            "rng": self._rng.bit_generator.state,
            "state": self._state_values(),
        }

    def set_state(self, snapshot: dict[str, Any]) -> None:
        self._elapsed = int(snapshot["elapsed"])
        self._rng.bit_generator.state = snapshot["rng"]
        self._restore_values(snapshot["state"])

    @abstractmethod
    def _reset_state(self) -> FloatArray: ...

    @abstractmethod
    def _advance(self, action: FloatArray) -> tuple[FloatArray, float, bool]: ...

    @abstractmethod
    def _state_values(self) -> list[float]: ...

    @abstractmethod
    def _restore_values(self, values: list[float]) -> None: ...

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} elapsed={self._elapsed}>"
