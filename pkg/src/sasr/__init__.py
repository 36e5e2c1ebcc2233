"""Self-adaptive success-rate reward shaping for sparse-reward reinforcement learning."""

from sasr.config import Config, RunConfig, SacConfig, read_config, write_config
from sasr.density import LabeledStateStore, StorePair, estimate_count, record_states
from sasr.envs import make_env
from sasr.exceptions import (
    ArtifactError,
    ConfigurationError,
    DimensionError,
    SasrError,
    TrainingError,
    ValidationError,
)
from sasr.rff import RffProjector, new_projector, project
from sasr.sac import Trainer, evaluate, train
from sasr.sasr_types import CountEstimate, EvalResult, KernelKind, Outcome, StepResult
from sasr.shaping import BetaParams, ShapingConfig, beta_sample, compose, scale, shaped_reward

__version__ = "0.1.0"
__all__ = [
    "Config",
    "RunConfig",
    "SacConfig",
    "ShapingConfig",
    "read_config",
    "write_config",
    "RffProjector",
    "new_projector",
    "project",
    "LabeledStateStore",
    "StorePair",
    "estimate_count",
    "record_states",
    "BetaParams",
    "beta_sample",
    "compose",
    "scale",
    "shaped_reward",
    "Trainer",
    "evaluate",
    "train",
    "make_env",
    "CountEstimate",
    "EvalResult",
    "KernelKind",
    "Outcome",
    "StepResult",
    # Exceptions
    "SasrError",
    "ValidationError",
    "DimensionError",
    "ConfigurationError",
    "TrainingError",
    "ArtifactError",
]
