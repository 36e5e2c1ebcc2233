"""Ring replay buffer whose transitions carry a success/failure flag."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sasr.exceptions import TrainingError, ValidationError
from sasr.sasr_types import FloatArray, SuccessFlag
from sasr.validation import positive_int


@dataclass(frozen=True)
class Transition:
    state: FloatArray
    action: FloatArray
    env_reward: float
    next_state: FloatArray
    terminated: bool
    success_flag: SuccessFlag = SuccessFlag.UNKNOWN


@dataclass(frozen=True)
class Batch:
    states: FloatArray
    actions: FloatArray
    env_rewards: FloatArray
    next_states: FloatArray
    terminated: FloatArray
    indices: npt.NDArray[np.int64]

    def __len__(self) -> int:
        return int(self.states.shape[0])


class ReplayBuffer:
    def __init__(self, state_dim: int, action_dim: int, capacity: int = 1_000_000) -> None:
        self.capacity = positive_int(capacity, "buffer_size")
        self.states = np.zeros((self.capacity, state_dim))
        self.actions = np.zeros((self.capacity, action_dim))
        self.env_rewards = np.zeros(self.capacity)
        self.next_states = np.zeros((self.capacity, state_dim))
        self.terminated = np.zeros(self.capacity)
        self.flags = np.full(self.capacity, SuccessFlag.UNKNOWN, dtype=np.int8)
        self.cursor = 0
        self.size = 0

    def add(
        self,
        state: npt.ArrayLike,
        action: npt.ArrayLike,
        env_reward: float,
        next_state: npt.ArrayLike,
        terminated: bool,
    ) -> int:
        """Store a transition and return its slot."""
        slot = self.cursor
        self.states[slot] = state
        self.actions[slot] = action
        self.env_rewards[slot] = env_reward
        self.next_states[slot] = next_state
        self.terminated[slot] = float(terminated)
        self.flags[slot] = SuccessFlag.UNKNOWN
        self.cursor = (slot + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        return slot

    def set_flags(self, slots: npt.ArrayLike, flags: npt.ArrayLike) -> None:
        self.flags[np.asarray(slots, dtype=np.int64)] = np.asarray(flags, dtype=np.int8)

    def transition(self, slot: int) -> Transition:
        if not 0 <= slot < self.size:
            raise ValidationError(f"Slot {slot} is not filled", reason=f"size={self.size}")
        return Transition(
            state=self.states[slot].copy(),
            action=self.actions[slot].copy(),
            env_reward=float(self.env_rewards[slot]),
            next_state=self.next_states[slot].copy(),
            terminated=bool(self.terminated[slot]),
            success_flag=SuccessFlag(int(self.flags[slot])),
        )

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniform sample (with replacement) over the filled slots."""
        if self.size == 0:
            raise TrainingError("Cannot sample from an empty replay buffer")
        indices = rng.integers(0, self.size, positive_int(batch_size, "batch_size"))
        return self.gather(indices)

    def gather(self, indices: npt.ArrayLike) -> Batch:
        idx = np.asarray(indices, dtype=np.int64)
        return Batch(
            states=self.states[idx],
            actions=self.actions[idx],
            env_rewards=self.env_rewards[idx],
            next_states=self.next_states[idx],
            terminated=self.terminated[idx],
            indices=idx,
        )

    def state_dict(self) -> dict[str, npt.NDArray[np.generic]]:
        filled = slice(0, self.size)
        return {
            "states": self.states[filled],
            "actions": self.actions[filled],
            "env_rewards": self.env_rewards[filled],
            "next_states": self.next_states[filled],
            "terminated": self.terminated[filled],
            "flags": self.flags[filled],
            "position": np.array([self.cursor, self.size, self.capacity], dtype=np.int64),
        }

    def load_state_dict(self, arrays: dict[str, npt.NDArray[np.generic]]) -> None:
        cursor, size, capacity = (int(v) for v in arrays["position"])
        if capacity != self.capacity:
            raise ValidationError(
                "Replay capacity mismatch", reason=f"saved {capacity}, buffer {self.capacity}"
            )
        for name in ("states", "actions", "env_rewards", "next_states", "terminated", "flags"):
            getattr(self, name)[:size] = arrays[name]
        self.cursor, self.size = cursor, size

    def __len__(self) -> int:
        return self.size
