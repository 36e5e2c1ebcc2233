"""Success/failure labelling of finished trajectories."""

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from sasr.density import StorePair, record_states
from sasr.rff import RffProjector
from sasr.sac.replay import ReplayBuffer
from sasr.sasr_types import FloatArray, Outcome, SuccessFlag
from sasr.shaping import ShapingConfig

logger = logging.getLogger("sasr.sac")


@dataclass
class Trajectory:
    """States, actions and rewards of the running episode, with their replay slots."""

    states: list[FloatArray] = field(default_factory=list)
    actions: list[FloatArray] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    slots: list[int] = field(default_factory=list)

    def append(self, state: FloatArray, action: FloatArray, reward: float, slot: int = -1) -> None:
        self.states.append(np.asarray(state, dtype=np.float64))
        self.actions.append(np.asarray(action, dtype=np.float64))
        self.rewards.append(float(reward))
        self.slots.append(slot)

    def queries(self, state_action: bool) -> FloatArray:
        states = np.asarray(self.states, dtype=np.float64)
        if not state_action:
            return states
        return np.concatenate([states, np.asarray(self.actions, dtype=np.float64)], axis=1)

    def clear(self) -> None:
        self.states.clear()
        self.actions.clear()
        self.rewards.clear()
        self.slots.clear()

    def __len__(self) -> int:
        return len(self.rewards)


def segment_labels(
    rewards: npt.ArrayLike, terminal_reward: bool, max_segment_steps: int | None = None
) -> npt.NDArray[np.int8]:
    """Per-step success/failure labels.

    With a terminal reward the whole trajectory is a success iff its return is
    positive. Otherwise the trajectory is cut after every positive reward; a
    piece is a success when it is at most ``max_segment_steps`` long, and the
    tail after the last positive reward is a failure.
    """
    values = np.asarray(rewards, dtype=np.float64)
    labels = np.full(values.shape[0], SuccessFlag.FAILURE, dtype=np.int8)
    if values.shape[0] == 0:
        return labels
    if terminal_reward:
        if values.sum() > 0:
            labels[:] = SuccessFlag.SUCCESS
        return labels

    limit = max_segment_steps if max_segment_steps is not None else values.shape[0]
    start = 0
    for t in np.flatnonzero(values > 0):
        if t - start + 1 <= limit:
            labels[start : t + 1] = SuccessFlag.SUCCESS
        start = t + 1
    return labels


def classify_and_commit(
    trajectory: Trajectory,
    stores: StorePair,
    projector: RffProjector,
    cfg: ShapingConfig,
    rng: np.random.Generator,
    *,
    terminal_reward: bool = True,
    max_segment_steps: int | None = None,
    replay: ReplayBuffer | None = None,
) -> npt.NDArray[np.int8]:
    """Label a finished trajectory, feed its states to the stores and flag its replay slots."""
    labels = segment_labels(trajectory.rewards, terminal_reward, max_segment_steps)
    if len(trajectory) == 0:
        return labels

    queries = trajectory.queries(cfg.state_action_features)
    for outcome, flag in ((Outcome.SUCCESS, SuccessFlag.SUCCESS), (Outcome.FAILURE, SuccessFlag.FAILURE)):
        selected = labels == flag
        if selected.any():
            record_states(stores.for_label(outcome), queries[selected], projector, rng)

    if replay is not None:
        slots = np.asarray(trajectory.slots, dtype=np.int64)
        known = slots >= 0
        replay.set_flags(slots[known], labels[known])

    logger.debug(
        "Committed trajectory: steps=%d success=%d failure=%d",
        len(trajectory),
        int(np.sum(labels == SuccessFlag.SUCCESS)),
        int(np.sum(labels == SuccessFlag.FAILURE)),
    )
    return labels
