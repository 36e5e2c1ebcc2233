from .agent import (
    AgentBundle,
    act,
    new_agent,
    policy_loss,
    sample_policy,
    select_action,
    soft_update,
    update_critics,
    update_policy,
    update_temperature,
)
from .checkpoint import load_agent, load_checkpoint, save_checkpoint
from .replay import Batch, ReplayBuffer, Transition
from .segmentation import Trajectory, classify_and_commit, segment_labels
from .trainer import EvalRow, Trainer, TrainResult, evaluate, train

__all__ = [
    "AgentBundle",
    "Batch",
    "EvalRow",
    "ReplayBuffer",
    "TrainResult",
    "Trainer",
    "Trajectory",
    "Transition",
    "act",
    "classify_and_commit",
    "evaluate",
    "load_agent",
    "load_checkpoint",
    "new_agent",
    "policy_loss",
    "sample_policy",
    "save_checkpoint",
    "segment_labels",
    "select_action",
    "soft_update",
    "train",
    "update_critics",
    "update_policy",
    "update_temperature",
]
