"""
Soft actor-critic with the success-rate shaped reward injected at update time.

The policy is a tanh-squashed Gaussian with separate mean and log-std heads.
Twin critics are trained toward

    y = r_env + lambda * R_S(s) + gamma * (1 - done) * (min Q'(s', a') - temp * log pi(a' | s'))

where ``R_S`` is recomputed from the current stores on every update.
"""

import copy
import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sasr.config import SacConfig
from sasr.density import StorePair
from sasr.exceptions import TrainingError, ValidationError
from sasr.nn import AdamState, Mlp, adam_step
from sasr.rff import RffProjector, project
from sasr.sac.replay import Batch
from sasr.sasr_types import FloatArray
from sasr.shaping import BetaParams, ShapingConfig, compose, shaped_reward

logger = logging.getLogger("sasr.sac")

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_SQUASH_EPS = 1e-6


@dataclass
class AgentBundle:
    policy: Mlp
    q1: Mlp
    q2: Mlp
    q1_target: Mlp
    q2_target: Mlp
    log_temperature: FloatArray
    policy_optimizer: AdamState
    critic_optimizer: AdamState
    temperature_optimizer: AdamState
    config: SacConfig
    action_low: FloatArray
    action_high: FloatArray

    @property
    def state_dim(self) -> int:
        return self.policy.input_dim

    @property
    def action_dim(self) -> int:
        return self.policy.head_dims[0]

    @property
    def temperature(self) -> float:
        return float(np.exp(self.log_temperature[0]))

    @property
    def target_entropy(self) -> float:
        return -float(self.action_dim)

    @property
    def critic_parameters(self) -> list[FloatArray]:
        return self.q1.parameters + self.q2.parameters

    def copy(self) -> "AgentBundle":
        return copy.deepcopy(self)

    def __repr__(self) -> str:
        return f"<AgentBundle {self.policy!r} temperature={self.temperature:.4g}>"


@dataclass(frozen=True)
class PolicySample:
    """Reparameterised policy draw and the intermediates its gradient needs."""

    actions: FloatArray
    log_probs: FloatArray
    mean: FloatArray
    log_std: FloatArray
    std: FloatArray
    noise: FloatArray
    clip_mask: FloatArray


@dataclass(frozen=True)
class ShapingSample:
    rewards: FloatArray
    alpha: FloatArray
    beta: FloatArray


@dataclass(frozen=True)
class CriticUpdate:
    loss: float
    targets: FloatArray
    shaping: ShapingSample


@dataclass(frozen=True)
class PolicyUpdate:
    loss: float
    log_probs: FloatArray


def new_agent(
    state_dim: int,
    action_dim: int,
    config: SacConfig,
    rng: np.random.Generator,
    action_low: npt.ArrayLike | None = None,
    action_high: npt.ArrayLike | None = None,
) -> AgentBundle:
    hidden = config.hidden_sizes
    policy = Mlp(state_dim, hidden, (action_dim, action_dim), rng)
    q1 = Mlp(state_dim + action_dim, hidden, (1,), rng)
    q2 = Mlp(state_dim + action_dim, hidden, (1,), rng)
    log_temperature = np.array([np.log(config.initial_temperature)])
    low = np.full(action_dim, -1.0) if action_low is None else np.asarray(action_low, dtype=np.float64)
    high = np.full(action_dim, 1.0) if action_high is None else np.asarray(action_high, dtype=np.float64)
    return AgentBundle(
        policy=policy,
        q1=q1,
        q2=q2,
        q1_target=q1.copy(),
        q2_target=q2.copy(),
        log_temperature=log_temperature,
        policy_optimizer=AdamState.for_parameters(policy.parameters, config.actor_lr),
        critic_optimizer=AdamState.for_parameters(q1.parameters + q2.parameters, config.critic_lr),
        temperature_optimizer=AdamState.for_parameters([log_temperature], config.temperature_lr),
        config=config,
        action_low=low,
        action_high=high,
    )


def sample_policy(bundle: AgentBundle, states: FloatArray, noise: FloatArray) -> PolicySample:
    """Squashed Gaussian draw ``tanh(mean + std * noise)`` with its log-density."""
    mean, raw_log_std = bundle.policy.forward(states)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(raw_log_std))):
        raise TrainingError("Policy produced non-finite outputs")
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    clip_mask = ((raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX)).astype(np.float64)
    std = np.exp(log_std)
    actions = np.tanh(mean + std * noise)
    gaussian = -0.5 * noise**2 - log_std - _HALF_LOG_2PI
    squash = np.log(1.0 - actions**2 + _SQUASH_EPS)
    log_probs = np.sum(gaussian - squash, axis=1)
    return PolicySample(
        actions=actions,
        log_probs=log_probs,
        mean=mean,
        log_std=log_std,
        std=std,
        noise=noise,
        clip_mask=clip_mask,
    )


def _to_env_actions(bundle: AgentBundle, squashed: FloatArray) -> FloatArray:
    return bundle.action_low + 0.5 * (squashed + 1.0) * (bundle.action_high - bundle.action_low)


def act(
    bundle: AgentBundle,
    states: npt.ArrayLike,
    greedy: bool,
    rng: np.random.Generator | None = None,
) -> FloatArray:
    """Env-scaled actions for a batch of states (rows)."""
    rows = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if not np.all(np.isfinite(rows)):
        raise ValidationError("State contains non-finite values")
    if greedy:
        mean, _ = bundle.policy.forward(rows)
        if not np.all(np.isfinite(mean)):
            raise TrainingError("Policy produced non-finite outputs")
        squashed = np.tanh(mean)
    else:
        if rng is None:
            raise ValidationError("Stochastic action selection needs an rng")
        noise = rng.standard_normal((rows.shape[0], bundle.action_dim))
        squashed = sample_policy(bundle, rows, noise).actions
    return _to_env_actions(bundle, squashed)


def select_action(
    bundle: AgentBundle,
    state: npt.ArrayLike,
    mode: str = "stochastic",
    rng: np.random.Generator | None = None,
) -> FloatArray:
    if mode not in ("stochastic", "greedy"):
        raise ValidationError(f"Unknown action mode {mode!r}")
    return act(bundle, state, mode == "greedy", rng)[0]


def to_squashed(bundle: AgentBundle, env_actions: npt.ArrayLike) -> FloatArray:
    """Inverse of the env scaling: map env actions back into [-1, 1]."""
    span = bundle.action_high - bundle.action_low
    return 2.0 * (np.asarray(env_actions, dtype=np.float64) - bundle.action_low) / span - 1.0


def _q_values(net: Mlp, states: FloatArray, actions: FloatArray) -> FloatArray:
    values = net.forward(np.concatenate([states, actions], axis=1))[0][:, 0]
    if not np.all(np.isfinite(values)):
        raise TrainingError("Critic produced non-finite outputs")
    return values


def shaping_rewards(
    batch: Batch,
    stores: StorePair,
    projector: RffProjector,
    cfg: ShapingConfig,
    rng: np.random.Generator,
) -> ShapingSample:
    """Shaped rewards for the batch states from the current store contents."""
    queries = batch.states
    if cfg.state_action_features:
        queries = np.concatenate([batch.states, batch.actions], axis=1)
    counts = stores.counts(project(projector, queries))
    params = BetaParams.from_counts(counts)
    rewards = np.asarray(shaped_reward(counts, cfg, rng), dtype=np.float64)
    return ShapingSample(rewards=rewards, alpha=params.alpha, beta=params.beta)


def update_critics(
    bundle: AgentBundle,
    batch: Batch,
    stores: StorePair,
    projector: RffProjector,
    cfg: ShapingConfig,
    rng: np.random.Generator,
    *,
    shaping_rng: np.random.Generator | None = None,
) -> CriticUpdate:
    """One gradient step on both critics; returns the pre-step loss."""
    if len(batch) == 0:
        raise TrainingError("Cannot update critics on an empty batch")
    config = bundle.config
    shaping = shaping_rewards(batch, stores, projector, cfg, shaping_rng or rng)
    rewards = np.asarray(compose(batch.env_rewards, shaping.rewards, cfg.lambda_weight))

    noise = rng.standard_normal((len(batch), bundle.action_dim))
    following = sample_policy(bundle, batch.next_states, noise)
    next_q = np.minimum(
        _q_values(bundle.q1_target, batch.next_states, following.actions),
        _q_values(bundle.q2_target, batch.next_states, following.actions),
    )
    soft_value = next_q - bundle.temperature * following.log_probs
    targets = rewards + config.gamma * (1.0 - batch.terminated) * soft_value

    size = float(len(batch))
    grads: list[FloatArray] = []
    loss = 0.0
    for net in (bundle.q1, bundle.q2):
        error = _q_values(net, batch.states, batch.actions) - targets
        loss += float(np.mean(error**2))
        net_grads, _ = net.backward([(2.0 / size * error)[:, None]])
        grads.extend(net_grads)
    adam_step(bundle.critic_parameters, grads, bundle.critic_optimizer)
    return CriticUpdate(loss=loss, targets=targets, shaping=shaping)


def policy_loss(
    bundle: AgentBundle, states: FloatArray, noise: FloatArray
) -> tuple[float, list[FloatArray], PolicySample]:
    """``mean(temp * log pi(a|s) - min Q(s, a))`` and its gradient wrt the policy parameters."""
    size = float(states.shape[0])
    temperature = bundle.temperature
    sample = sample_policy(bundle, states, noise)

    inputs = np.concatenate([states, sample.actions], axis=1)
    q1 = bundle.q1.forward(inputs)[0][:, 0]
    q2 = bundle.q2.forward(inputs)[0][:, 0]
    first_is_min = (q1 <= q2).astype(np.float64)
    _, dx1 = bundle.q1.backward([(-first_is_min / size)[:, None]])
    _, dx2 = bundle.q2.backward([(-(1.0 - first_is_min) / size)[:, None]])
    d_actions = (dx1 + dx2)[:, bundle.state_dim :]

    a = sample.actions
    one_minus_a2 = 1.0 - a**2
    d_logp_d_pre = 2.0 * a * one_minus_a2 / (one_minus_a2 + _SQUASH_EPS)
    d_pre = d_actions * one_minus_a2 + (temperature / size) * d_logp_d_pre
    d_mean = d_pre
    d_log_std = (d_pre * sample.std * sample.noise - temperature / size) * sample.clip_mask

    loss = float(np.mean(temperature * sample.log_probs - np.minimum(q1, q2)))
    grads, _ = bundle.policy.backward([d_mean, d_log_std])
    return loss, grads, sample


def update_policy(bundle: AgentBundle, batch: Batch, rng: np.random.Generator) -> PolicyUpdate:
    noise = rng.standard_normal((len(batch), bundle.action_dim))
    loss, grads, sample = policy_loss(bundle, batch.states, noise)
    adam_step(bundle.policy.parameters, grads, bundle.policy_optimizer)
    return PolicyUpdate(loss=loss, log_probs=sample.log_probs)


def update_temperature(
    bundle: AgentBundle,
    batch: Batch,
    rng: np.random.Generator | None = None,
    *,
    log_probs: FloatArray | None = None,
) -> float:
    """Adam step on log-temperature toward the target entropy ``-action_dim``."""
    if log_probs is None:
        if rng is None:
            raise ValidationError("update_temperature needs log_probs or an rng")
        noise = rng.standard_normal((len(batch), bundle.action_dim))
        log_probs = sample_policy(bundle, batch.states, noise).log_probs
    gradient = -float(np.mean(log_probs + bundle.target_entropy))
    adam_step([bundle.log_temperature], [np.array([gradient])], bundle.temperature_optimizer)
    logger.debug("Temperature %.4g, entropy gap %.4g", bundle.temperature, -gradient)
    return bundle.temperature


def soft_update(bundle: AgentBundle) -> None:
    """Move each target parameter to ``(1 - tau) * target + tau * online``."""
    tau = bundle.config.tau
    pairs = ((bundle.q1_target, bundle.q1), (bundle.q2_target, bundle.q2))
    for target, online in pairs:
        for target_param, online_param in zip(target.parameters, online.parameters, strict=True):
            target_param[...] = (1.0 - tau) * target_param + tau * online_param
