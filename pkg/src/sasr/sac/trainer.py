"""
Training loop: SAC on a sparse-reward environment with success-rate shaping.

Every run draws from six independent streams spawned from one seed:
network init, action/update noise, shaping draws, retention filtering,
environment, projector. Turning shaping off (lambda = 0) therefore leaves the
agent's trajectory identical to an unshaped run.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np

from sasr.config import RunConfig
from sasr.density import BandwidthSchedule, StorePair
from sasr.envs import SparseEnv, make_env
from sasr.exceptions import TrainingError, ValidationError
from sasr.monitoring import RewardBinLog, ShapingStats, StateGrid, VisitLog
from sasr.rff import new_projector
from sasr.sac.agent import (
    AgentBundle,
    act,
    new_agent,
    select_action,
    soft_update,
    to_squashed,
    update_critics,
    update_policy,
    update_temperature,
)
from sasr.sac.replay import ReplayBuffer
from sasr.sac.segmentation import Trajectory, classify_and_commit
from sasr.sasr_types import EvalResult, FloatArray

logger = logging.getLogger("sasr.sac")

STREAMS = ("init", "agent", "shaping", "retention", "env", "projector")
REWARD_BINS = 10


@dataclass(frozen=True)
class EvalRow:
    step: int
    eval_mean_return: float
    eval_stderr: float
    shaped_reward_mean: float
    shaped_reward_var: float
    mean_alpha: float
    mean_beta: float
    success_store_size: int
    failure_store_size: int


@dataclass(frozen=True)
class TrainResult:
    seed: int
    rows: list[EvalRow]
    bundle: AgentBundle


def evaluate(
    bundle: AgentBundle,
    env_factory: Callable[[int], SparseEnv],
    episodes: int,
    seed: int | Sequence[int],
) -> EvalResult:
    """Greedy returns over ``episodes`` environment copies stepped in lockstep."""
    if episodes < 1:
        raise ValidationError("episodes must be a positive integer", reason=f"got {episodes!r}")
    env_seeds = np.random.SeedSequence(seed).generate_state(episodes)
    envs = [env_factory(int(s)) for s in env_seeds]
    states = np.stack([env.reset() for env in envs])
    returns = np.zeros(episodes)
    active = np.ones(episodes, dtype=bool)

    while active.any():
        running = np.flatnonzero(active)
        actions = act(bundle, states[running], greedy=True)
        for action, index in zip(actions, running, strict=True):
            result = envs[index].step(action)
            returns[index] += result.reward
            states[index] = result.next_state
            if result.terminated or result.truncated:
                active[index] = False

    stderr = float(np.std(returns, ddof=1) / np.sqrt(episodes)) if episodes > 1 else 0.0
    return EvalResult(
        mean=float(returns.mean()),
        stderr=stderr,
        episodes=episodes,
        returns=tuple(float(r) for r in returns),
    )


class Trainer:
    """Full state of one training run; :meth:`run` advances it."""

    def __init__(self, config: RunConfig, seed: int) -> None:
        if not config.env:
            raise ValidationError("A training run needs an environment name")
        self.config = config
        self.seed = int(seed)
        streams = np.random.SeedSequence(self.seed).spawn(len(STREAMS))
        self.rngs: dict[str, np.random.Generator] = {
            name: np.random.default_rng(stream) for name, stream in zip(STREAMS, streams, strict=True)
        }

        env_seed = int(self.rngs["env"].integers(0, 2**31))
        self.env = make_env(config.env, seed=env_seed)
        self.eval_factory = partial(make_env, config.env)

        shaping = config.shaping
        query_dim = self.env.state_dim + (self.env.action_dim if shaping.state_action_features else 0)
        self.schedule = BandwidthSchedule(shaping.bandwidth, shaping.bandwidth_end, config.total_steps)
        projector_seed = int(self.rngs["projector"].integers(0, 2**31))
        self.projector = new_projector(
            query_dim, shaping.feature_dim, self.schedule.value(0), shaping.kernel, projector_seed
        )
        self.stores = StorePair.empty(
            shaping.feature_dim, shaping.retention_rate, keep_raw=not self.schedule.is_constant
        )
        if not self.schedule.is_constant:
            logger.warning(
                "Bandwidth schedule %s needs the raw states; both stores keep them in memory",
                self.schedule.label(),
            )

        self.replay = ReplayBuffer(
            self.env.state_dim,
            self.env.action_dim,
            capacity=min(config.sac.buffer_size, config.total_steps),
        )
        self.bundle = new_agent(
            self.env.state_dim,
            self.env.action_dim,
            config.sac,
            self.rngs["init"],
            action_low=self.env.action_low,
            action_high=self.env.action_high,
        )

        self.trajectory = Trajectory()
        self.state: FloatArray = self.env.reset()
        self.step = 0
        self.episodes = 0
        self.rows: list[EvalRow] = []
        self.shaping_stats = ShapingStats()
        self.visits = VisitLog(self.env.state_dim) if config.log_visits else None
        self.reward_bins = RewardBinLog(
            StateGrid(self.env.state_low, self.env.state_high, REWARD_BINS), config.log_window
        )

    @property
    def done(self) -> bool:
        return self.step >= self.config.total_steps

    def run(self, until: int | None = None) -> list[EvalRow]:
        """Advance to step ``until`` (default: the end of the run); returns all rows so far."""
        stop = self.config.total_steps if until is None else min(until, self.config.total_steps)
        if self.step == 0:
            logger.info(
                "Training %s seed=%d steps=%d lambda=%s",
                self.config.env,
                self.seed,
                self.config.total_steps,
                self.config.shaping.lambda_weight,
            )
        while self.step < stop:
            self.step += 1
            self._interact()
            if self.step > self.config.sac.burn_in:
                self._update()
            if self.schedule.changes_at(self.step):
                self._rescale()
            if self.step % self.config.eval_interval == 0:
                self.evaluate_now()
        if self.done:
            logger.info("Finished %s seed=%d after %d episodes", self.config.env, self.seed, self.episodes)
        return self.rows

    def _interact(self) -> None:
        if self.step <= self.config.sac.burn_in:
            squashed = self.rngs["agent"].uniform(-1.0, 1.0, self.env.action_dim)
            action = self.bundle.action_low + 0.5 * (squashed + 1.0) * (
                self.bundle.action_high - self.bundle.action_low
            )
        else:
            action = select_action(self.bundle, self.state, "stochastic", self.rngs["agent"])
            squashed = to_squashed(self.bundle, action)

        result = self.env.step(action)
        slot = self.replay.add(self.state, squashed, result.reward, result.next_state, result.terminated)
        self.trajectory.append(self.state, squashed, result.reward, slot)
        if self.visits is not None:
            self.visits.add(self.step, self.state)
        self.state = result.next_state

        if result.terminated or result.truncated:
            classify_and_commit(
                self.trajectory,
                self.stores,
                self.projector,
                self.config.shaping,
                self.rngs["retention"],
                terminal_reward=self.env.terminal_reward,
                max_segment_steps=self.env.max_segment_steps,
                replay=self.replay,
            )
            self.trajectory.clear()
            self.episodes += 1
            self.state = self.env.reset()

    def _update(self) -> None:
        sac = self.config.sac
        rng = self.rngs["agent"]
        batch = self.replay.sample(sac.batch_size, rng)
        critic = update_critics(
            self.bundle,
            batch,
            self.stores,
            self.projector,
            self.config.shaping,
            rng,
            shaping_rng=self.rngs["shaping"],
        )
        if not np.isfinite(critic.loss):
            raise TrainingError("Critic loss is not finite", reason=f"step {self.step}")
        shaping = critic.shaping
        self.shaping_stats.add(shaping.rewards, shaping.alpha, shaping.beta)
        self.reward_bins.add(self.step, batch.states, shaping.rewards)

        if self.step % sac.policy_frequency == 0:
            policy = update_policy(self.bundle, batch, rng)
            update_temperature(self.bundle, batch, log_probs=policy.log_probs)
        if self.step % sac.target_frequency == 0:
            soft_update(self.bundle)

    def _rescale(self) -> None:
        bandwidth = self.schedule.value(self.step)
        if bandwidth == self.projector.bandwidth:
            return
        self.projector = self.projector.with_bandwidth(bandwidth)
        self.stores.reproject(self.projector)
        logger.info("Bandwidth now %s at step %d", bandwidth, self.step)

    def evaluate_now(self) -> EvalRow:
        """Evaluate the greedy policy now and append a row."""
        result = evaluate(
            self.bundle, self.eval_factory, self.config.eval_episodes, (self.seed, self.step)
        )
        stats = self.shaping_stats.flush()
        row = EvalRow(
            step=self.step,
            eval_mean_return=result.mean,
            eval_stderr=result.stderr,
            shaped_reward_mean=stats["mean"],
            shaped_reward_var=stats["var"],
            mean_alpha=stats["mean_alpha"],
            mean_beta=stats["mean_beta"],
            success_store_size=self.stores.success.retained_count,
            failure_store_size=self.stores.failure.retained_count,
        )
        self.rows.append(row)
        logger.info(
            "%s seed=%d step=%d return=%.3f+-%.3f stores=%d/%d",
            self.config.env,
            self.seed,
            self.step,
            result.mean,
            result.stderr,
            row.success_store_size,
            row.failure_store_size,
        )
        return row

    def save_checkpoint(self, directory: str | Path) -> Path:
        from sasr.sac.checkpoint import save_checkpoint

        return save_checkpoint(self, directory)

    @classmethod
    def from_checkpoint(cls, directory: str | Path) -> "Trainer":
        from sasr.sac.checkpoint import load_checkpoint

        return load_checkpoint(directory)

    def __repr__(self) -> str:
        return f"<Trainer env={self.config.env} seed={self.seed} step={self.step}/{self.config.total_steps}>"


def train(env: str, config: RunConfig, seed: int) -> TrainResult:
    """Run one seed to completion."""
    trainer = Trainer(replace(config, env=env), seed)
    rows = trainer.run()
    return TrainResult(seed=trainer.seed, rows=list(rows), bundle=trainer.bundle)
